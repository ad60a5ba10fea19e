"""Step-size machinery.

Four layers live here:

* predefined base schedules (constant, ``gamma / n(z)**alpha``, and a
  piecewise-constant base that an outer policy can lower),
* the windowed piecewise-constant reduction policy (halve or decrement the
  base when the episode error norm stops improving),
* the sign-search increase/decrease maps ``h`` / ``l`` that move an adapted
  rate inside ``[base, 3*base]``,
* the error-proxy-driven optimal rate formulas with an online (L, B) bracket.

The cap factor 3 is what makes the adapted rate at most a bounded multiple of
the base, so divergence of the base rate sum carries over to the adapted one.
"""

from __future__ import annotations

from collections import deque

import numpy as np

from .validation import (
    check_choice,
    check_finite,
    check_non_negative,
    check_positive,
)

RATE_CAP_FACTOR = 3.0
HL_SCHEMES = ("additive", "two_thirds")
PC_DECREMENT = 0.01


def _hl_args(gamma_hat, gamma_base, scheme):
    gamma_hat = check_non_negative("gamma_hat", gamma_hat)
    gamma_base = check_positive("gamma_base", gamma_base)
    check_choice("scheme", scheme, HL_SCHEMES)
    return gamma_hat, gamma_base


def h_increase(gamma_hat, gamma_base, scheme="additive"):
    """Raise an adapted rate, clamped to [gamma_base, 3 * gamma_base].

    additive:   min(gamma_hat + gamma_base, 3 * gamma_base)
    two_thirds: max(min(gamma_hat + 2/3 * gamma_base, 3 * gamma_base), gamma_base)
    """
    gamma_hat, gamma_base = _hl_args(gamma_hat, gamma_base, scheme)
    if scheme == "additive":
        raised = gamma_hat + gamma_base
    else:
        raised = gamma_hat + (2.0 / 3.0) * gamma_base
    return float(min(max(raised, gamma_base), RATE_CAP_FACTOR * gamma_base))


def l_decrease(gamma_hat, gamma_base, scheme="additive"):
    """Lower an adapted rate, clamped to [gamma_base, 3 * gamma_base].

    additive:   max(gamma_hat - gamma_base, gamma_base)
    two_thirds: max(gamma_hat - 2/3 * gamma_base, gamma_base)
    """
    gamma_hat, gamma_base = _hl_args(gamma_hat, gamma_base, scheme)
    if scheme == "additive":
        lowered = gamma_hat - gamma_base
    else:
        lowered = gamma_hat - (2.0 / 3.0) * gamma_base
    return float(min(max(lowered, gamma_base), RATE_CAP_FACTOR * gamma_base))


class BaseSchedule:
    """Predefined per-state base rate gamma_base(z).

    ``constant`` keeps the initial value, ``inverse_power`` returns
    ``gamma / n(z)**alpha`` from the visit count, and ``piecewise_constant``
    keeps a per-state array that :class:`PcPolicy` lowers between episodes.
    """

    KINDS = ("constant", "inverse_power", "piecewise_constant")

    def __init__(self, kind, gamma, alpha=1.0, n_states=1):
        check_choice("kind", kind, self.KINDS)
        self.kind = kind
        self.gamma = check_positive("gamma", gamma)
        alpha = check_finite("alpha", alpha)
        if not 0.0 < alpha <= 1.0:
            raise ValueError(f"alpha must be in (0, 1], got {alpha}")
        self.alpha = alpha
        self.base = np.full(int(n_states), self.gamma)

    def rate(self, z, visits):
        if self.kind == "inverse_power":
            if visits < 1:
                raise ValueError("inverse_power rate needs visits >= 1")
            return self.gamma / float(visits) ** self.alpha
        return float(self.base[z])

    def rate_vector(self, visits):
        if self.kind == "inverse_power":
            if np.any(visits < 1):
                raise ValueError("inverse_power rate needs visits >= 1")
            return self.gamma / np.asarray(visits, dtype=float) ** self.alpha
        return self.base.copy()


class PcPolicy:
    """Windowed piecewise-constant reduction of the base rate.

    Collects one episode error norm per episode.  Every ``window`` episodes
    the mean of the last window is compared with the mean of the previous
    window; if it did not drop by at least the fraction ``improvement``,
    the base rate is halved (or decremented by 0.01), floored at ``floor``.
    Windows do not overlap.
    """

    MODES = ("halve", "subtract")

    def __init__(self, window=5, improvement=0.01, floor=0.01, mode="halve"):
        self.window = int(window)
        if self.window < 1:
            raise ValueError(f"window must be >= 1, got {window}")
        improvement = check_finite("improvement", improvement)
        if not 0.0 < improvement < 1.0:
            raise ValueError(f"improvement must be in (0, 1), got {improvement}")
        self.improvement = improvement
        self.floor = check_positive("floor", floor)
        check_choice("mode", mode, self.MODES)
        self.mode = mode
        self.history = []
        self._prev_window_mean = None

    def observe(self, schedule, episode_error_norm):
        """Record one episode norm; returns True when the base was reduced."""
        self.history.append(check_non_negative("episode_error_norm", episode_error_norm))
        if len(self.history) % self.window != 0:
            return False
        current = float(np.mean(self.history[-self.window:]))
        previous = self._prev_window_mean
        self._prev_window_mean = current
        if previous is None:
            return False
        if current <= (1.0 - self.improvement) * previous:
            return False
        if self.mode == "halve":
            np.maximum(schedule.base / 2.0, self.floor, out=schedule.base)
        else:
            np.maximum(schedule.base - PC_DECREMENT, self.floor, out=schedule.base)
        return True


class PassState:
    """Sign-search memory: adapted rate and last residual sign per state."""

    def __init__(self, n_states, hl_scheme="additive"):
        check_choice("hl_scheme", hl_scheme, HL_SCHEMES)
        self.hl_scheme = hl_scheme
        self.gamma_hat = np.zeros(int(n_states))
        self.last_sign = np.zeros(int(n_states), dtype=np.int8)
        # previous full residual vector, for the vector variant only
        self.prev_vector = None


class LbEstimate:
    """Online (L, B) bracket plus per-state residual windows.

    The window of the last ``window`` residuals at each state yields the
    squared-error proxy (squared window mean by default, window mean of
    squares with ``e_proxy_kind='mean_square'``) and the noise proxy
    (unbiased window variance).  When the observed residual magnitude grows
    between consecutive visits of a state, B is scaled up and L down by
    ``kappa_up``, keeping 0 < L <= B.
    """

    E_PROXY_KINDS = ("squared_mean", "mean_square")

    def __init__(self, n_states, L=1.0, B=1.0, window=5, kappa_up=2.0,
                 e_proxy_kind="squared_mean", ratio_floor=0.01):
        L = check_positive("L", L)
        B = check_positive("B", B)
        if L > B:
            raise ValueError(f"need L <= B, got L={L} B={B}")
        kappa_up = check_finite("kappa_up", kappa_up)
        if kappa_up <= 1.0:
            raise ValueError(f"kappa_up must be > 1, got {kappa_up}")
        check_choice("e_proxy_kind", e_proxy_kind, self.E_PROXY_KINDS)
        self.L = L
        self.B = B
        self.kappa_up = kappa_up
        self.ratio_floor = check_positive("ratio_floor", ratio_floor)
        self.e_proxy_kind = e_proxy_kind
        self.window = int(window)
        if self.window < 1:
            raise ValueError(f"window must be >= 1, got {window}")
        self.windows = [deque(maxlen=self.window) for _ in range(int(n_states))]
        self.last_abs = np.full(int(n_states), np.nan)

    def update_error_proxy(self, z, residual):
        residual = check_finite("residual", residual)
        self.windows[z].append(residual)

    def observe(self, z, residual):
        """Per-visit hook: adapt (L, B) on residual growth, then push."""
        previous = self.last_abs[z]
        if np.isfinite(previous):
            self.adapt(abs(residual) > previous)
        self.update_error_proxy(z, residual)
        self.last_abs[z] = abs(residual)

    def adapt(self, error_increased):
        # residual magnitudes keep fluctuating at stationarity, so one-sided
        # widening would shrink L/B forever without the floor
        if error_increased:
            widened = (self.L / self.kappa_up) / (self.B * self.kappa_up)
            if widened >= self.ratio_floor:
                self.B *= self.kappa_up
                self.L /= self.kappa_up

    def e_proxy(self, z):
        win = self.windows[z]
        if not win:
            return 0.0
        if self.e_proxy_kind == "mean_square":
            return float(np.mean(np.square(win)))
        return float(np.mean(win)) ** 2

    def v_estimate(self, z):
        win = self.windows[z]
        if len(win) < 2:
            return 0.0
        return float(np.var(win, ddof=1))


def optimal_gamma_rl(e_proxy, L, B, v):
    """Greedy rate for the plain update: (L/B) * e / (e + (2 + v))."""
    e_proxy = check_non_negative("e_proxy", e_proxy)
    L = check_positive("L", L)
    B = check_positive("B", B)
    if L > B:
        raise ValueError(f"need L <= B, got L={L} B={B}")
    v = check_non_negative("v", v)
    if e_proxy == 0.0:
        return 0.0
    return (L / B) * e_proxy / (e_proxy + (2.0 + v))


def optimal_gamma_pass(e_proxy, L_n, B_n, c_n, d1, v):
    """Greedy rate for the sign-search update.

    (L_n/B_n) * e / (e + d1/B_n * [c_n >= 1] + c_n**2 * (2 + v)),
    where c_n is the ratio of the effective adapted rate to L_n/B_n and
    d1 the curvature penalty for overshooting it.
    """
    e_proxy = check_non_negative("e_proxy", e_proxy)
    L_n = check_positive("L_n", L_n)
    B_n = check_positive("B_n", B_n)
    if L_n > B_n:
        raise ValueError(f"need L_n <= B_n, got L_n={L_n} B_n={B_n}")
    c_n = check_non_negative("c_n", c_n)
    d1 = check_non_negative("d1", d1)
    v = check_non_negative("v", v)
    if e_proxy == 0.0:
        return 0.0
    penalty = (d1 / B_n if c_n >= 1.0 else 0.0) + c_n * c_n * (2.0 + v)
    return (L_n / B_n) * e_proxy / (e_proxy + penalty)


def one_step_error(e, gamma, L, B, v):
    """Model recursion for the squared error over one visited step:

    (1 - 2*L*gamma + B*gamma**2) * e + B * (2 + v) * gamma**2.
    """
    alpha = 1.0 - 2.0 * L * gamma + B * gamma * gamma
    return alpha * e + B * (2.0 + v) * gamma * gamma


class OptimalRatePolicy:
    """Per-visit greedy base rate driven by an :class:`LbEstimate`.

    Exposes the same ``rate(z, visits)`` surface as :class:`BaseSchedule`
    so the update rules can consume it transparently.  For the sign-search
    update the local rate ratio c_n is read off the current adapted rate;
    before the first visit it defaults to 1, which reduces the formula to
    the plain variant.
    """

    def __init__(self, lb: LbEstimate, algo="rl", pass_state: PassState | None = None,
                 rate_floor=1e-6):
        self.lb = lb
        self.algo = algo
        self.pass_state = pass_state
        # a vanishing error proxy would hand the sign-search maps a zero base
        self.rate_floor = check_positive("rate_floor", rate_floor)

    def rate(self, z, visits):
        e = self.lb.e_proxy(z)
        v = self.lb.v_estimate(z)
        if self.algo in ("pass", "pass_vec") and self.pass_state is not None:
            gamma_bar = self.lb.L / self.lb.B
            if visits > 0 and self.pass_state.gamma_hat[z] > 0.0:
                c_n = self.pass_state.gamma_hat[z] / gamma_bar
            else:
                c_n = 1.0
            d1 = (RATE_CAP_FACTOR - 1.0) ** 2 * self.lb.B
            value = optimal_gamma_pass(e, self.lb.L, self.lb.B, c_n, d1, v)
        else:
            value = optimal_gamma_rl(e, self.lb.L, self.lb.B, v)
        return max(value, self.rate_floor)

    def rate_vector(self, visits):
        return np.array([self.rate(z, visits[z]) for z in range(len(visits))])
