"""Per-observation update rules.

Three scalar rules share the same engine surface: the plain relaxation step,
a memory-corrected step that subtracts a stored residual sample and adds the
slot mean (variance reduction), and the sign-search step that grows the rate
while consecutive residual signs at a state agree and shrinks it on a flip.
A vector variant of the sign-search rule updates every coordinate at once and
branches on an inner product instead of a scalar product of signs.

Each function mutates the passed state objects in place and returns a
:class:`StepReport`; nothing here owns global state, so independent runs can
execute concurrently as long as they do not share the state objects.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import EngineError, IterateTable, Transition
from .schedules import BaseSchedule, PassState, h_increase, l_decrease
from .validation import check_state

ALGORITHMS = ("rl", "saga", "pass", "pass_vec")


@dataclass(frozen=True)
class StepReport:
    """What one update did: branch is one of increase/decrease/first_visit/plain."""

    state: int
    rate_used: float
    residual: float
    branch: str


class SagaMemory:
    """Per-state table of the last stored residuals, m slots per state."""

    def __init__(self, n_states, m=5):
        m = int(m)
        if m < 1:
            raise ValueError(f"memory depth must be >= 1, got {m}")
        self.m = m
        self.slots = np.zeros((int(n_states), m))

    def mean(self, z):
        return float(self.slots[z].mean())


def _sign(x):
    if x > 0.0:
        return 1
    if x < 0.0:
        return -1
    return 0


def step_rl(table: IterateTable, schedule: BaseSchedule, t: Transition) -> StepReport:
    """Plain relaxation: q[z] -= rate(z) * residual with the scheduled rate."""
    z = check_state(t.state, table.n_states)
    if not np.isfinite(t.residual):
        raise EngineError(f"non-finite residual at state {z}")
    first = table.visits[z] == 0
    table.record_visit(z, t.step)
    rate = schedule.rate(z, int(table.visits[z]))
    table.apply_update(z, rate, t.residual)
    return StepReport(z, rate, t.residual, "first_visit" if first else "plain")


def step_saga(table: IterateTable, memory: SagaMemory, schedule: BaseSchedule,
              t: Transition, slot_rng: np.random.Generator) -> StepReport:
    """Memory-corrected step.

    The update direction is ``residual - slots[z][i] + mean_j slots[z][j]``
    with ``i`` drawn uniformly; the sampled slot is then overwritten with the
    fresh residual.  With all slots equal the correction vanishes and the
    step coincides with :func:`step_rl`.
    """
    z = check_state(t.state, table.n_states)
    if not np.isfinite(t.residual):
        raise EngineError(f"non-finite residual at state {z}")
    first = table.visits[z] == 0
    table.record_visit(z, t.step)
    rate = schedule.rate(z, int(table.visits[z]))
    i = int(slot_rng.integers(0, memory.m))
    direction = t.residual - float(memory.slots[z, i]) + memory.mean(z)
    table.apply_update(z, rate, direction)
    memory.slots[z, i] = t.residual
    return StepReport(z, rate, t.residual, "first_visit" if first else "plain")


def step_pass(table: IterateTable, pass_state: PassState, schedule: BaseSchedule,
              t: Transition) -> StepReport:
    """Sign-search step at one state.

    First visit uses the base rate unchanged.  Afterwards, if the new
    residual has the same sign as the one from the previous visit of the
    state (a zero product counts as agreement), the adapted rate is raised
    with ``h``, otherwise lowered with ``l``; the update then uses the new
    adapted rate and the residual sign is stored for the next visit.
    """
    z = check_state(t.state, table.n_states)
    if not np.isfinite(t.residual):
        raise EngineError(f"non-finite residual at state {z}")
    first = table.visits[z] == 0
    table.record_visit(z, t.step)
    base = schedule.rate(z, int(table.visits[z]))
    if first:
        branch = "first_visit"
        rate = base
    elif t.residual * pass_state.last_sign[z] >= 0.0:
        branch = "increase"
        rate = h_increase(pass_state.gamma_hat[z], base, pass_state.hl_scheme)
    else:
        branch = "decrease"
        rate = l_decrease(pass_state.gamma_hat[z], base, pass_state.hl_scheme)
    pass_state.gamma_hat[z] = rate
    table.apply_update(z, rate, t.residual)
    pass_state.last_sign[z] = _sign(t.residual)
    return StepReport(z, rate, t.residual, branch)


def step_pass_vectorial(table: IterateTable, pass_state: PassState,
                        schedule: BaseSchedule, residuals, step=0,
                        episode=0) -> StepReport:
    """Vector sign-search step over the full residual vector.

    The increase/decrease branch is shared by all coordinates and decided by
    the sign of ``<base * residuals, previous_residuals>``; an unset previous
    vector plays the role of a first visit and applies the current adapted
    rates unchanged.  Coordinates whose base rate is zero are skipped, which
    restricts the update to the supported coordinates.
    """
    residuals = np.asarray(residuals, dtype=float)
    if residuals.shape != (table.n_states,):
        raise ValueError(
            f"residual vector must have length {table.n_states}, got {residuals.shape}"
        )
    if not np.all(np.isfinite(residuals)):
        raise EngineError("non-finite residual vector")
    table.record_visit_all(step)
    bases = schedule.rate_vector(table.visits)
    active = bases > 0.0
    if pass_state.prev_vector is None:
        branch = "first_visit"
        pass_state.gamma_hat[active] = bases[active]
    else:
        inner = float(np.dot(bases * residuals, pass_state.prev_vector))
        move = h_increase if inner >= 0.0 else l_decrease
        branch = "increase" if inner >= 0.0 else "decrease"
        for z in np.flatnonzero(active):
            pass_state.gamma_hat[z] = move(
                pass_state.gamma_hat[z], bases[z], pass_state.hl_scheme
            )
    rates = np.where(active, pass_state.gamma_hat, 0.0)
    table.apply_update_all(rates, residuals)
    pass_state.prev_vector = residuals.copy()
    pass_state.last_sign[:] = np.sign(residuals).astype(np.int8)
    return StepReport(-1, float(rates.max()), float(np.linalg.norm(residuals)), branch)
