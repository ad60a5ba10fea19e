"""Per-step drift identification.

A scalar signal moves as ``S[t+1] = S[t] + f[t+1] + noise`` with centred
noise; an episode walks t = 0 .. n_max-1 in order, observes each increment
and feeds the residual ``q(t) - (S[t+1] - S[t])`` to the learner, whose
table therefore converges to the drift vector f.  The exact reference is f
itself.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..validation import as_float_vector, check_non_negative


@dataclass
class DriftModel:
    """True drifts and noise level; ``f[t]`` is the increment mean at step t."""

    f: np.ndarray
    noise_sigma: float = 0.5

    def __post_init__(self):
        self.f = as_float_vector("f", self.f)
        if self.f.size < 1:
            raise ValueError("f must contain at least one drift value")
        self.noise_sigma = check_non_negative("noise_sigma", self.noise_sigma)

    @property
    def n_max(self):
        return self.f.size


class DriftEnvironment:
    """Episode driver: one pass over t = 0..n_max-1 per episode."""

    def __init__(self, model: DriftModel):
        self.model = model
        self.n_states = model.n_max
        self.last_residuals = np.zeros(model.n_max)

    def run_episode(self, learner, rng):
        """Feed one full pass of increments; returns the episode error norm."""
        model = self.model
        noise = (
            rng.normal(0.0, model.noise_sigma, model.n_max)
            if model.noise_sigma > 0.0
            else np.zeros(model.n_max)
        )
        increments = model.f + noise
        if learner.wants_full_residual:
            residuals = learner.values_[: model.n_max] - increments
            learner.step_vector(residuals)
            self.last_residuals = np.asarray(residuals, dtype=float).copy()
        else:
            for t in range(model.n_max):
                residual = learner.value(t) - increments[t]
                learner.step(t, residual)
                self.last_residuals[t] = residual
        norm = float(np.linalg.norm(self.last_residuals))
        learner.end_episode(norm)
        return norm

    def reference(self):
        from ..reference import solve_drift_reference

        return solve_drift_reference(self.model)
