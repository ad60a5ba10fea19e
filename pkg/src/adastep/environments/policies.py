"""Action selection for the episode drivers.

``explore_softmax`` weights each candidate action by the last observed
residual magnitude of the state it leads to (unvisited states get the
exploration bonus ``b``), scaled by ``beta_bar``, and samples from the
softmax of those weights: actions leading to poorly learned states are
preferred.  ``boltzmann`` instead weights actions by exp(beta_bar * value)
of the candidate's table entry, concentrating on the maximizing action as
``beta_bar`` grows.  ``epsilon_uniform`` ignores the table and samples
uniformly.
"""

from __future__ import annotations

import numpy as np

from ..validation import check_choice, check_positive

POLICY_MODES = ("explore_softmax", "boltzmann", "epsilon_uniform")


def softmax_probabilities(weights):
    w = np.asarray(weights, dtype=float)
    w = w - w.max()
    e = np.exp(w)
    return e / e.sum()


class ActionPolicyState:
    """Exploration bookkeeping: last residual magnitude per state."""

    def __init__(self, n_states, mode="explore_softmax", beta_bar=5.0,
                 unvisited_bonus=1.0):
        check_choice("mode", mode, POLICY_MODES)
        self.mode = mode
        self.beta_bar = float(beta_bar)
        self.unvisited_bonus = check_positive("unvisited_bonus", unvisited_bonus)
        self.residual_magnitude = np.full(int(n_states), np.nan)

    def note_residual(self, z, residual):
        self.residual_magnitude[z] = abs(float(residual))

    def magnitude(self, z):
        m = self.residual_magnitude[z]
        return self.unvisited_bonus if np.isnan(m) else float(m)


def sample_action(policy: ActionPolicyState, candidate_states, q_values, rng):
    """Pick one of the candidate actions; returns its index.

    ``candidate_states`` are the flat indices the actions lead to (used by
    ``explore_softmax``); ``q_values`` are the per-action table values (used
    by ``boltzmann``).  Either may be None when the mode does not need it.
    """
    if policy.mode == "explore_softmax":
        if candidate_states is None or len(candidate_states) == 0:
            raise ValueError("explore_softmax needs candidate successor states")
        weights = policy.beta_bar * np.array(
            [policy.magnitude(z) for z in candidate_states]
        )
    elif policy.mode == "boltzmann":
        if q_values is None or len(q_values) == 0:
            raise ValueError("boltzmann needs candidate action values")
        weights = policy.beta_bar * np.asarray(q_values, dtype=float)
    else:
        n = len(candidate_states) if candidate_states is not None else len(q_values)
        if n == 0:
            raise ValueError("no candidate actions")
        weights = np.zeros(n)
    probs = softmax_probabilities(weights)
    return int(rng.choice(len(probs), p=probs))
