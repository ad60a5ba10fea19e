"""Queue-position control for a single resting order.

The agent holds one unit order in a book described by the queue ahead of it
(``q_before``), the queue behind it (``q_after``) and the opposite-side queue
(``q_opp``), all capped on a finite grid.  Each decision step it either
crosses the spread (immediate fill at cost ``psi``) or stays.  Staying costs
``wait_cost`` per step and exposes the order to one random book event:

* a market order consumes the front of our side (fills us when ``q_before``
  is zero, cost 0),
* an arrival grows the queue behind us,
* a same-side cancel removes one share drawn uniformly from ahead/behind,
* an opposite-side arrival grows ``q_opp``,
* an opposite-side cancel shrinks ``q_opp``; when the opposite queue empties
  the price moves away and the episode ends with a forced cross at
  ``psi + tick_penalty``.

Remaining probability mass is a no-op.  At the horizon the order is forced
to cross at ``psi``.  Costs are measured relative to the mid at decision
time, so the passive fill is the zero-cost outcome.  The chain is fully
specified, which lets the backward-induction solver compute the exact
optimum of the same dynamics.

Episodes always keep the resting order in the book; both action values are
updated from each observed transition (the crossing value needs no order to
be sent, its payoff is known).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..validation import check_non_negative

CROSS, STAY = 0, 1


@dataclass(frozen=True)
class LobState:
    """Snapshot of the order's situation; ``price_moved`` marks the adverse end."""

    t: int
    q_before: int
    q_after: int
    q_opp: int
    price_moved: bool = False


@dataclass
class LobCosts:
    spread_psi: float = 0.7
    wait_cost_c: float = 0.05
    horizon_T: int = 4
    tick_penalty: float = 0.5

    def __post_init__(self):
        self.spread_psi = check_non_negative("spread_psi", self.spread_psi)
        self.wait_cost_c = check_non_negative("wait_cost_c", self.wait_cost_c)
        self.tick_penalty = check_non_negative("tick_penalty", self.tick_penalty)
        self.horizon_T = int(self.horizon_T)
        if self.horizon_T < 1:
            raise ValueError("horizon_T must be >= 1")


@dataclass
class BookDynamics:
    """Event probabilities and grid caps of the Markov book."""

    b_max: int = 4
    a_max: int = 2
    o_max: int = 2
    p_market: float = 0.45
    p_arrive_same: float = 0.10
    p_cancel_same: float = 0.10
    p_arrive_opp: float = 0.10
    p_cancel_opp: float = 0.10

    def __post_init__(self):
        for name in ("p_market", "p_arrive_same", "p_cancel_same",
                     "p_arrive_opp", "p_cancel_opp"):
            check_non_negative(name, getattr(self, name))
        total = (self.p_market + self.p_arrive_same + self.p_cancel_same
                 + self.p_arrive_opp + self.p_cancel_opp)
        if total > 1.0 + 1e-12:
            raise ValueError(f"event probabilities sum to {total} > 1")
        if self.b_max < 0 or self.a_max < 0:
            raise ValueError("queue caps must be >= 0")
        if self.o_max < 1:
            raise ValueError("o_max must be >= 1")


def stay_event_distribution(b, a, o, dynamics: BookDynamics):
    """Exact one-step kernel row for the stay action.

    Returns a list of ``(prob, kind, (b, a, o))`` entries with kinds
    ``book`` / ``executed`` / ``moved``; probabilities sum to one.
    """
    d = dynamics
    entries = []
    noop = 1.0 - (d.p_market + d.p_arrive_same + d.p_cancel_same
                  + d.p_arrive_opp + d.p_cancel_opp)
    if d.p_market > 0.0:
        if b > 0:
            entries.append((d.p_market, "book", (b - 1, a, o)))
        else:
            entries.append((d.p_market, "executed", None))
    if d.p_arrive_same > 0.0:
        if a < d.a_max:
            entries.append((d.p_arrive_same, "book", (b, a + 1, o)))
        else:
            noop += d.p_arrive_same
    if d.p_cancel_same > 0.0:
        if b + a > 0:
            share_ahead = b / (b + a)
            if b > 0:
                entries.append((d.p_cancel_same * share_ahead, "book", (b - 1, a, o)))
            if a > 0:
                entries.append((d.p_cancel_same * (1.0 - share_ahead), "book",
                                (b, a - 1, o)))
        else:
            noop += d.p_cancel_same
    if d.p_arrive_opp > 0.0:
        if o < d.o_max:
            entries.append((d.p_arrive_opp, "book", (b, a, o + 1)))
        else:
            noop += d.p_arrive_opp
    if d.p_cancel_opp > 0.0:
        if o > 1:
            entries.append((d.p_cancel_opp, "book", (b, a, o - 1)))
        else:
            entries.append((d.p_cancel_opp, "moved", None))
    if noop > 0.0:
        entries.append((noop, "book", (b, a, o)))
    return entries


def lob_transition(state: LobState, action, costs: LobCosts,
                   dynamics: BookDynamics, rng):
    """Apply one action; returns ``(next_state_or_None, terminal_payoff_or_None)``.

    Crossing ends the episode at ``spread_psi``.  Staying draws one book
    event; execution pays 0, an adverse price move pays
    ``spread_psi + tick_penalty``, reaching the horizon forces a cross.
    The per-step ``wait_cost_c`` is accounted by the caller.
    """
    if action not in (CROSS, STAY):
        raise ValueError(f"action must be {CROSS} (cross) or {STAY} (stay), got {action}")
    if state.price_moved:
        raise ValueError("transition from a terminal (price moved) state")
    if action == CROSS:
        return None, costs.spread_psi
    entries = stay_event_distribution(state.q_before, state.q_after,
                                      state.q_opp, dynamics)
    probs = np.array([e[0] for e in entries])
    pick = entries[rng.choice(len(entries), p=probs / probs.sum())]
    _, kind, nxt = pick
    if kind == "executed":
        return None, 0.0
    if kind == "moved":
        return None, costs.spread_psi + costs.tick_penalty
    if state.t + 1 >= costs.horizon_T:
        return None, costs.spread_psi
    return LobState(state.t + 1, *nxt), None


class PlacementEnvironment:
    """Episode driver over the flat (t, q_before, q_after, q_opp) x action table."""

    def __init__(self, dynamics: BookDynamics = None, costs: LobCosts = None):
        self.dynamics = dynamics if dynamics is not None else BookDynamics()
        self.costs = costs if costs is not None else LobCosts()
        d = self.dynamics
        self._dims = (self.costs.horizon_T, d.b_max + 1, d.a_max + 1, d.o_max)
        self.n_book_states = int(np.prod(self._dims))
        self.n_states = 2 * self.n_book_states
        self.last_residuals = np.zeros(self.n_states)

    # -- state encoding -----------------------------------------------------

    def book_index(self, t, b, a, o):
        T, nb, na, no = self._dims
        if not (0 <= t < T and 0 <= b < nb and 0 <= a < na and 1 <= o <= no):
            raise ValueError(f"state ({t},{b},{a},{o}) off the grid")
        return ((t * nb + b) * na + a) * no + (o - 1)

    def q_index(self, t, b, a, o, action):
        return 2 * self.book_index(t, b, a, o) + action

    def decode_book_index(self, idx):
        T, nb, na, no = self._dims
        idx, rem = divmod(int(idx), no)
        o = rem + 1
        idx, a = divmod(idx, na)
        t, b = divmod(idx, nb)
        return t, b, a, o

    # -- residuals ----------------------------------------------------------

    def continuation_value(self, values, t_next, outcome):
        """Best cost-to-go seen from the observed stay outcome."""
        kind, nxt = outcome
        if kind == "executed":
            return 0.0
        if kind == "moved":
            return self.costs.spread_psi + self.costs.tick_penalty
        if t_next >= self.costs.horizon_T:
            return self.costs.spread_psi
        b, a, o = nxt
        stay_v = values[self.q_index(t_next, b, a, o, STAY)]
        cross_v = values[self.q_index(t_next, b, a, o, CROSS)]
        return float(min(cross_v, stay_v))

    def placement_residual(self, values, t, b, a, o, action, outcome):
        """Sampled gap q(state, action) - target for one observed event."""
        if action == CROSS:
            target = self.costs.spread_psi
        else:
            target = self.costs.wait_cost_c + self.continuation_value(
                values, t + 1, outcome)
        return float(values[self.q_index(t, b, a, o, action)] - target)

    # -- episodes -----------------------------------------------------------

    def initial_book(self, rng):
        d = self.dynamics
        return (int(rng.integers(0, d.b_max + 1)),
                int(rng.integers(0, d.a_max + 1)),
                int(rng.integers(1, d.o_max + 1)))

    def run_episode(self, learner, rng):
        """Walk the book with the resting order until fill, move or horizon.

        Both action values at the visited state are updated from the same
        observed event.  Returns the episode error norm.
        """
        if learner.wants_full_residual:
            raise ValueError("the book only reveals one transition at a time; "
                             "vector learners are not supported here")
        b, a, o = self.initial_book(rng)
        for t in range(self.costs.horizon_T):
            entries = stay_event_distribution(b, a, o, self.dynamics)
            probs = np.array([e[0] for e in entries])
            _, kind, nxt = entries[rng.choice(len(entries), p=probs / probs.sum())]
            outcome = (kind, nxt)
            for action in (CROSS, STAY):
                z = self.q_index(t, b, a, o, action)
                residual = self.placement_residual(
                    learner.values_, t, b, a, o, action, outcome)
                learner.step(z, residual)
                self.last_residuals[z] = residual
            if kind != "book":
                break
            b, a, o = nxt
        norm = float(np.linalg.norm(self.last_residuals))
        learner.end_episode(norm)
        return norm

    # -- reference and reporting ---------------------------------------------

    def reference(self):
        from ..reference import solve_placement_reference

        return solve_placement_reference(self.dynamics, self.costs)

    def control_map(self, values, t=0, o=1):
        """Greedy action for every (q_before, q_after) cell; ties cross."""
        d = self.dynamics
        grid = np.zeros((d.b_max + 1, d.a_max + 1), dtype=int)
        for b in range(d.b_max + 1):
            for a in range(d.a_max + 1):
                cross_v = values[self.q_index(t, b, a, o, CROSS)]
                stay_v = values[self.q_index(t, b, a, o, STAY)]
                grid[b, a] = STAY if stay_v < cross_v else CROSS
        return grid
