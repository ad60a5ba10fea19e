"""Exact baselines for the three benchmark problems.

Each solver returns a :class:`ReferenceTable` whose ``values`` use the same
flat indexing as the corresponding environment, so learner tables compare
directly.  The placement solver runs backward induction on the exact event
kernel of the configured book; the liquidation solver runs the deterministic
backward recursion over the same inventory-target grid the learner uses, so
gaps between the two measure learning error only.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np

from .environments.drift import DriftModel
from .environments.execution import ExecModel, expected_step_gain
from .environments.placement import (
    CROSS,
    STAY,
    BookDynamics,
    LobCosts,
    PlacementEnvironment,
    stay_event_distribution,
)


@dataclass
class ReferenceTable:
    """Exact values (and, when meaningful, the greedy control) per flat state."""

    values: np.ndarray
    control: np.ndarray | None = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)


def solve_drift_reference(model: DriftModel) -> ReferenceTable:
    """The drift vector itself is the fixed point."""
    return ReferenceTable(values=model.f.copy())


def solve_placement_reference(dynamics: BookDynamics, costs: LobCosts) -> ReferenceTable:
    """Backward induction over the exact stay kernel.

    Values are per (state, action) with the environment's flat q-indexing;
    the control is the per-book-state argmin with ties resolved to cross.
    """
    env = PlacementEnvironment(dynamics, costs)
    values = np.zeros(env.n_states)
    control = np.zeros(env.n_book_states, dtype=int)
    T = costs.horizon_T
    d = dynamics
    for t in range(T - 1, -1, -1):
        for b, a, o in product(range(d.b_max + 1), range(d.a_max + 1),
                               range(1, d.o_max + 1)):
            entries = stay_event_distribution(b, a, o, d)
            total = sum(p for p, _, _ in entries)
            if abs(total - 1.0) > 1e-9:
                raise ValueError(f"kernel row at ({b},{a},{o}) sums to {total}")
            stay_value = costs.wait_cost_c
            for prob, kind, nxt in entries:
                if kind == "executed":
                    continuation = 0.0
                elif kind == "moved":
                    continuation = costs.spread_psi + costs.tick_penalty
                elif t + 1 >= T:
                    continuation = costs.spread_psi
                else:
                    nb, na, no = nxt
                    continuation = min(
                        values[env.q_index(t + 1, nb, na, no, CROSS)],
                        values[env.q_index(t + 1, nb, na, no, STAY)],
                    )
                stay_value += prob * continuation
            values[env.q_index(t, b, a, o, CROSS)] = costs.spread_psi
            values[env.q_index(t, b, a, o, STAY)] = stay_value
            control[env.book_index(t, b, a, o)] = (
                STAY if stay_value < costs.spread_psi else CROSS
            )
    return ReferenceTable(values=values, control=control)


def solve_execution_reference(model: ExecModel) -> ReferenceTable:
    """Deterministic backward recursion over the inventory-target grid."""
    k_q = model.k_q
    grid = model.q_grid
    values = np.zeros((model.k_t + 1, k_q + 1))
    control = np.zeros((model.k_t + 1, k_q + 1), dtype=int)
    values[model.k_t] = model.terminal_values()
    control[model.k_t] = np.arange(k_q + 1)
    nu = (grid[None, :] - grid[:, None]) / model.delta
    for n_t in range(model.k_t - 1, -1, -1):
        gains = expected_step_gain(model, nu, grid[:, None])
        candidate = gains - model.phi * model.delta * grid[:, None] ** 2 + values[n_t + 1]
        control[n_t] = np.argmax(candidate, axis=1)
        values[n_t] = candidate[np.arange(k_q + 1), control[n_t]]
    return ReferenceTable(values=values.ravel(), control=control.ravel())


def placement_bellman_residual(table: ReferenceTable, dynamics: BookDynamics,
                               costs: LobCosts) -> float:
    """Max absolute fixed-point defect of a placement reference table."""
    recomputed = solve_placement_reference(dynamics, costs)
    return float(np.max(np.abs(recomputed.values - table.values)))


def execution_bellman_residual(table: ReferenceTable, model: ExecModel) -> float:
    recomputed = solve_execution_reference(model)
    return float(np.max(np.abs(recomputed.values - table.values)))


def l2_gap(values, reference: ReferenceTable, weights=None, saga_memory=None,
           m_star=None, memory_coeff=1.0):
    """Weighted squared gap: sum_z w_z * (values[z] - reference[z])**2.

    With a memory table the per-state mean squared deviation of the stored
    residuals from ``m_star`` (defaults to zero) is added, scaled so the
    squared value gap carries the ``memory_coeff`` factor, matching the
    augmented error used to grade memory-corrected runs.
    """
    values = np.asarray(values, dtype=float)
    ref = reference.values
    if values.shape != ref.shape:
        raise ValueError(f"state spaces differ: {values.shape} vs {ref.shape}")
    if weights is None:
        w = np.full(values.shape[0], 1.0 / values.shape[0])
    else:
        w = np.asarray(weights, dtype=float)
        if w.shape != values.shape:
            raise ValueError(f"weights shape {w.shape} != values shape {values.shape}")
    gap = memory_coeff * (values - ref) ** 2
    if saga_memory is not None:
        star = np.zeros(values.shape[0]) if m_star is None else np.asarray(m_star, float)
        deviation = (saga_memory.slots - star[:, None]) ** 2
        gap = gap + deviation.mean(axis=1)
    return float(np.dot(w, gap))
