"""Inventory liquidation on a time x inventory grid.

The traded price follows an arithmetic Brownian motion with drift ``alpha``
and volatility ``sigma``.  Trading at speed ``nu`` over one step of length
``delta`` costs quadratic temporary impact ``kappa * nu**2 * delta``;
running inventory is penalised by ``phi`` and the terminal inventory by
``terminal_a``.  The learned table is the reduced value surface
v(time index, inventory index) with the terminal row pinned to
``-terminal_a * q**2``.

One observation at state (n_t, q) draws the price increment and its running
integral over the step and evaluates, for every admissible target inventory
on the grid, the realized one-step gain

    M(nu) = -nu * ds_bar - kappa * nu**2 * delta + q * ds + nu * delta * ds,

keeping the best ``M(nu) - phi * delta * q**2 + v(n_t + 1, target)``.  The
residual is v(n_t, q) minus that best value, so the relaxation step moves
v toward the sampled optimum.  The increment pair (ds, ds_bar) is drawn
from its exact joint Gaussian law: means (alpha*delta, alpha*delta**2/2),
variances (sigma**2*delta, sigma**2*delta**3/3) and covariance
sigma**2*delta**2/2.

Episodes start from a uniformly drawn grid inventory and move through the
grid by sampling actions from an exploration policy; admissible targets
never leave the inventory grid, so the cap is respected by construction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..validation import check_non_negative, check_positive
from .policies import ActionPolicyState, sample_action


@dataclass
class ExecModel:
    alpha: float = 0.1
    sigma: float = 0.05
    kappa: float = 0.1
    phi: float = 0.0
    terminal_a: float = 1.0
    horizon_t: float = 1.0
    k_t: int = 10
    k_q: int = 10
    q_bar: float = 1.0

    def __post_init__(self):
        self.sigma = check_non_negative("sigma", self.sigma)
        self.kappa = check_positive("kappa", self.kappa)
        self.phi = check_non_negative("phi", self.phi)
        self.terminal_a = check_non_negative("terminal_a", self.terminal_a)
        self.horizon_t = check_positive("horizon_t", self.horizon_t)
        self.q_bar = check_positive("q_bar", self.q_bar)
        self.k_t = int(self.k_t)
        self.k_q = int(self.k_q)
        if self.k_t < 1 or self.k_q < 1:
            raise ValueError("k_t and k_q must be >= 1")

    @property
    def delta(self):
        return self.horizon_t / self.k_t

    @property
    def q_grid(self):
        i = np.arange(self.k_q + 1)
        return -self.q_bar + 2.0 * i * self.q_bar / self.k_q

    def terminal_values(self):
        return -self.terminal_a * self.q_grid**2


def expected_step_gain(model: ExecModel, nu, q):
    """E[M(nu)] = q*alpha*delta + nu*alpha*delta**2/2 - kappa*nu**2*delta."""
    d = model.delta
    return (q * model.alpha * d + nu * model.alpha * d * d / 2.0
            - model.kappa * nu * nu * d)


def realized_step_gain(model: ExecModel, nu, q, ds, ds_bar):
    d = model.delta
    return -nu * ds_bar - model.kappa * nu * nu * d + q * ds + nu * d * ds


def sample_increment_pair(model: ExecModel, rng):
    """Draw (ds, ds_bar) from the exact joint Gaussian law of the step."""
    d = model.delta
    xi1, xi2 = rng.normal(size=2)
    ds = model.alpha * d + model.sigma * np.sqrt(d) * xi1
    ds_bar = (model.alpha * d * d / 2.0
              + 0.5 * d * (ds - model.alpha * d)
              + model.sigma * np.sqrt(d**3 / 12.0) * xi2)
    return float(ds), float(ds_bar)


class ExecutionEnvironment:
    """Episode driver over the (k_t + 1) x (k_q + 1) value grid."""

    def __init__(self, model: ExecModel = None, policy_mode="explore_softmax",
                 beta_bar=5.0, unvisited_bonus=1.0):
        self.model = model if model is not None else ExecModel()
        m = self.model
        self.n_states = (m.k_t + 1) * (m.k_q + 1)
        self.policy = ActionPolicyState(self.n_states, mode=policy_mode,
                                        beta_bar=beta_bar,
                                        unvisited_bonus=unvisited_bonus)
        self.last_residuals = np.zeros(self.n_states)
        self._nu_matrix = (m.q_grid[None, :] - m.q_grid[:, None]) / m.delta

    @property
    def initial_values(self):
        """Start table: zero on learnable rows, exact on the terminal row."""
        init = np.zeros(self.n_states)
        m = self.model
        init[self.state_index(m.k_t, np.arange(m.k_q + 1))] = m.terminal_values()
        return init

    def state_index(self, n_t, n_q):
        return n_t * (self.model.k_q + 1) + n_q

    def decode_state(self, idx):
        return divmod(int(idx), self.model.k_q + 1)

    def exec_residual(self, values, n_t, n_q, ds, ds_bar):
        """v(n_t, n_q) minus the best sampled one-step continuation."""
        m = self.model
        if not 0 <= n_t < m.k_t:
            raise ValueError(f"time index {n_t} is not a decision time")
        q = m.q_grid[n_q]
        nu = self._nu_matrix[n_q]
        gains = (-nu * ds_bar - m.kappa * nu * nu * m.delta
                 + q * ds + nu * m.delta * ds)
        next_row = values[self.state_index(n_t + 1, 0):self.state_index(n_t + 1, m.k_q) + 1]
        targets = gains - m.phi * m.delta * q * q + next_row
        assert targets.size > 0
        return float(values[self.state_index(n_t, n_q)] - targets.max())

    def run_episode(self, learner, rng):
        """One liquidation pass from a uniformly drawn initial inventory."""
        if learner.wants_full_residual:
            raise ValueError("the price path reveals one transition at a time; "
                             "vector learners are not supported here")
        m = self.model
        n_q = int(rng.integers(0, m.k_q + 1))
        for n_t in range(m.k_t):
            z = self.state_index(n_t, n_q)
            ds, ds_bar = sample_increment_pair(m, rng)
            residual = self.exec_residual(learner.values_, n_t, n_q, ds, ds_bar)
            learner.step(z, residual)
            self.last_residuals[z] = residual
            self.policy.note_residual(z, residual)
            successors = self.state_index(n_t + 1, np.arange(m.k_q + 1))
            n_q = sample_action(self.policy, successors, None, rng)
        norm = float(np.linalg.norm(self.last_residuals))
        learner.end_episode(norm)
        return norm

    def reference(self):
        from ..reference import solve_execution_reference

        return solve_execution_reference(self.model)

    def value_grid(self, values):
        m = self.model
        return np.asarray(values).reshape(m.k_t + 1, m.k_q + 1)
