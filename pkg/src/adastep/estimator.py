"""Scikit-learn style front end for the tabular learners.

``AdaptiveRateLearner`` packages an update rule (``rl``, ``saga``, ``pass``
or ``pass_vec``) together with a rate policy (``constant``, ``inv``, ``pc``
or ``optimal``) behind the usual ``fit`` / ``predict`` / ``get_params``
surface, so runs compose with cloning and parameter grids.  ``fit`` consumes
an environment object exposing ``n_states`` and
``run_episode(learner, rng)``; the learned table is available as ``values_``
and through ``predict``.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator

from . import algorithms
from .core import IterateTable, Transition
from .schedules import (
    BaseSchedule,
    LbEstimate,
    OptimalRatePolicy,
    PassState,
    PcPolicy,
)
from .validation import check_choice

POLICIES = ("constant", "inv", "pc", "optimal")

_POLICY_KIND = {
    "constant": "constant",
    "inv": "inverse_power",
    "pc": "piecewise_constant",
    "optimal": "constant",  # placeholder; rates come from the optimal policy
}


class AdaptiveRateLearner(BaseEstimator):
    """Tabular stochastic-approximation learner with a pluggable rate policy.

    Parameters mirror the experiment configuration: ``gamma`` is the base
    rate scale, ``alpha`` the decay exponent of the ``inv`` policy, ``w`` /
    ``p`` / ``floor`` / ``mode`` the outer reduction policy, ``hl_scheme``
    the increase/decrease map family of the sign-search rule, ``saga_m``
    the memory depth, and ``proxy_window`` / ``kappa_up`` /
    ``e_proxy_kind`` the optimal-rate machinery.
    """

    def __init__(self, algo="pass", policy="pc", gamma=0.5, alpha=1.0,
                 hl_scheme="additive", w=5, p=0.01, floor=0.01, mode="halve",
                 kappa_up=2.0, proxy_window=5, e_proxy_kind="squared_mean",
                 lb_init=1.0, saga_m=5, initial_value=0.0, episodes=100,
                 random_state=0):
        self.algo = algo
        self.policy = policy
        self.gamma = gamma
        self.alpha = alpha
        self.hl_scheme = hl_scheme
        self.w = w
        self.p = p
        self.floor = floor
        self.mode = mode
        self.kappa_up = kappa_up
        self.proxy_window = proxy_window
        self.e_proxy_kind = e_proxy_kind
        self.lb_init = lb_init
        self.saga_m = saga_m
        self.initial_value = initial_value
        self.episodes = episodes
        self.random_state = random_state

    # -- construction -----------------------------------------------------

    def setup(self, n_states, rng=None, initial=None):
        """Allocate the mutable run state for a problem of ``n_states``."""
        check_choice("algo", self.algo, algorithms.ALGORITHMS)
        check_choice("policy", self.policy, POLICIES)
        self._rng = rng if rng is not None else np.random.default_rng(self.random_state)
        init = self.initial_value if initial is None else initial
        self.table_ = IterateTable(n_states, initial=init)
        self.schedule_ = BaseSchedule(
            _POLICY_KIND[self.policy], self.gamma, alpha=self.alpha, n_states=n_states
        )
        self.pass_state_ = None
        if self.algo in ("pass", "pass_vec"):
            self.pass_state_ = PassState(n_states, hl_scheme=self.hl_scheme)
        self.memory_ = None
        if self.algo == "saga":
            self.memory_ = algorithms.SagaMemory(n_states, m=self.saga_m)
        self.pc_ = None
        if self.policy == "pc":
            self.pc_ = PcPolicy(window=self.w, improvement=self.p,
                                floor=self.floor, mode=self.mode)
        self.optimal_ = None
        self._rate_source = self.schedule_
        if self.policy == "optimal":
            lb = LbEstimate(n_states, L=self.lb_init, B=self.lb_init,
                            window=self.proxy_window, kappa_up=self.kappa_up,
                            e_proxy_kind=self.e_proxy_kind)
            self.optimal_ = OptimalRatePolicy(lb, algo=self.algo,
                                              pass_state=self.pass_state_)
            self._rate_source = self.optimal_
        self.steps_ = 0
        self.episodes_done_ = 0
        return self

    # -- per-observation surface used by the environments ------------------

    @property
    def wants_full_residual(self):
        return self.algo == "pass_vec"

    @property
    def values_(self):
        return self.table_.values

    def value(self, z):
        return self.table_.value(z)

    def step(self, z, residual):
        if self.optimal_ is not None:
            self.optimal_.lb.observe(z, residual)
        t = Transition(z, float(residual), step=self.steps_, episode=self.episodes_done_)
        if self.algo == "rl":
            report = algorithms.step_rl(self.table_, self._rate_source, t)
        elif self.algo == "saga":
            report = algorithms.step_saga(self.table_, self.memory_,
                                          self._rate_source, t, self._rng)
        elif self.algo == "pass":
            report = algorithms.step_pass(self.table_, self.pass_state_,
                                          self._rate_source, t)
        else:
            raise ValueError("pass_vec learners take whole residual vectors; "
                             "use step_vector")
        self.steps_ += 1
        return report

    def step_vector(self, residuals):
        if self.algo != "pass_vec":
            raise ValueError(f"step_vector is only valid for pass_vec, not {self.algo}")
        if self.optimal_ is not None:
            for z, r in enumerate(residuals):
                self.optimal_.lb.observe(z, float(r))
        report = algorithms.step_pass_vectorial(
            self.table_, self.pass_state_, self._rate_source, residuals,
            step=self.steps_, episode=self.episodes_done_,
        )
        self.steps_ += 1
        return report

    def end_episode(self, episode_error_norm):
        if self.pc_ is not None:
            self.pc_.observe(self.schedule_, episode_error_norm)
        self.episodes_done_ += 1

    # -- scikit-learn surface ----------------------------------------------

    def fit(self, X, y=None, episodes=None):
        """Run ``episodes`` episodes against the environment ``X``."""
        rng = np.random.default_rng(self.random_state)
        self.setup(X.n_states, rng=rng, initial=getattr(X, "initial_values", None))
        n_episodes = self.episodes if episodes is None else int(episodes)
        for _ in range(n_episodes):
            X.run_episode(self, rng)
        return self

    def predict(self, X=None):
        """Learned values, either the whole table or at the given indices."""
        if X is None:
            return self.table_.values.copy()
        idx = np.asarray(X, dtype=int)
        return self.table_.values[idx]

    def score(self, X, y=None):
        """Negative root weighted squared gap to the environment reference."""
        from .reference import l2_gap

        ref = X.reference()
        return -float(np.sqrt(l2_gap(self.table_.values, ref)))
