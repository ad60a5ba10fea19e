"""Flat state-indexed estimate table with per-state visit bookkeeping.

The whole toolkit estimates a finite family of scalars
``q : {0, ..., n_states-1} -> R`` from one noisy observation at a time:

    q[z] <- q[z] - rate * residual

where ``residual = q[z] - sampled_target``, so a rate in (0, 1] relaxes
``q[z]`` toward the sampled target.  Coordinates not visited by the current
observation are never touched; problem definitions own the bijection between
their structured state (e.g. ``(t, queue_ahead, queue_behind)``) and the flat
index used here.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol

import numpy as np

from .validation import check_state


class EngineError(RuntimeError):
    """A step produced non-finite arithmetic; the run must abort."""


@dataclass(frozen=True)
class Transition:
    """One observed update opportunity.

    ``state`` is the visited flat index, ``residual`` the sampled gap
    q(state) - target, ``step`` the global observation counter and
    ``episode`` the episode the observation belongs to.
    """

    state: int
    residual: float
    step: int = 0
    episode: int = 0


class ResidualOracle(Protocol):
    """Sampling contract used by synthetic problems and tests.

    Implementations draw one sample for state ``z`` and return the residual
    of the current table at ``z``.  With a fixed generator the draws must be
    reproducible.
    """

    def __call__(self, table: "IterateTable", z: int, rng: np.random.Generator) -> float: ...


class IterateTable:
    """Current estimate plus visit statistics, stored as flat arrays."""

    def __init__(self, n_states, initial=0.0):
        n_states = int(n_states)
        if n_states < 1:
            raise ValueError(f"n_states must be >= 1, got {n_states}")
        if np.ndim(initial) == 0:
            self.values = np.full(n_states, float(initial))
        else:
            init = np.asarray(initial, dtype=float)
            if init.shape != (n_states,):
                raise ValueError(f"initial values must have shape ({n_states},), got {init.shape}")
            self.values = init.copy()
        self.visits = np.zeros(n_states, dtype=np.int64)
        self.last_visit_step = np.full(n_states, -1, dtype=np.int64)

    @property
    def n_states(self):
        return self.values.shape[0]

    def value(self, z):
        return float(self.values[check_state(z, self.n_states)])

    def record_visit(self, z, step):
        z = check_state(z, self.n_states)
        self.visits[z] += 1
        self.last_visit_step[z] = int(step)

    def record_visit_all(self, step):
        """Vector-update bookkeeping: every coordinate counts as visited."""
        self.visits += 1
        self.last_visit_step[:] = int(step)

    def apply_update(self, z, rate, residual):
        z = check_state(z, self.n_states)
        rate = float(rate)
        residual = float(residual)
        if not np.isfinite(rate) or not np.isfinite(residual):
            raise EngineError(
                f"non-finite step at state {z}: rate={rate!r} residual={residual!r}"
            )
        if rate < 0.0:
            raise ValueError(f"rate must be >= 0, got {rate!r}")
        new = self.values[z] - rate * residual
        if not np.isfinite(new):
            raise EngineError(f"update at state {z} produced non-finite value {new!r}")
        self.values[z] = new

    def apply_update_all(self, rates, residuals):
        rates = np.asarray(rates, dtype=float)
        residuals = np.asarray(residuals, dtype=float)
        if rates.shape != (self.n_states,) or residuals.shape != (self.n_states,):
            raise ValueError(
                f"expected vectors of length {self.n_states}, "
                f"got {rates.shape} and {residuals.shape}"
            )
        if not (np.all(np.isfinite(rates)) and np.all(np.isfinite(residuals))):
            raise EngineError("non-finite entries in vector update")
        if np.any(rates < 0.0):
            raise ValueError("rates must be >= 0")
        new = self.values - rates * residuals
        if not np.all(np.isfinite(new)):
            raise EngineError("vector update produced non-finite values")
        self.values = new

    def copy(self):
        dup = IterateTable(self.n_states, initial=self.values)
        dup.visits = self.visits.copy()
        dup.last_visit_step = self.last_visit_step.copy()
        return dup
