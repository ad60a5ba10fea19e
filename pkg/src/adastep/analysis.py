"""Error-curve analytics and error-propagation bounds.

Contents:

* :func:`fit_rate` - log-log slope of an error curve, with an optional
  log-log(n) second regressor,
* :func:`lemma5_recursion` - evaluates a delayed linear recursion both
  directly and through its closed convolution representation; the two are
  algebraically identical, so their gap is a correctness oracle,
* :func:`convolution_powers` / :func:`renewal_mass` - iterated convolutions
  of a normalized return-time tail sequence and their accumulated renewal
  mass,
* :func:`theorem1_bound` - the triple-composition upper bound for the
  expected per-state error of a visited-coordinate recursion, evaluated
  against a Monte-Carlo simulation of the same recursion,
* :func:`prop0_contraction_check` - one-step conditional error versus the
  per-algorithm contraction bound on a synthetic quadratic problem.

All sequence arguments are 0-indexed arrays whose position ``i`` holds the
subscript ``i + 1`` entry.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .schedules import h_increase, l_decrease
from .validation import check_choice, check_non_negative, check_positive


@dataclass
class ErrorCurve:
    steps: np.ndarray
    values: np.ndarray
    label: str = ""

    def __post_init__(self):
        self.steps = np.asarray(self.steps, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.steps.shape != self.values.shape or self.steps.ndim != 1:
            raise ValueError("steps and values must be matching 1-d arrays")
        if np.any(np.diff(self.steps) <= 0):
            raise ValueError("steps must be strictly increasing")
        if np.any(self.values < 0):
            raise ValueError("error values must be >= 0")


def fit_rate(curve: ErrorCurve, burn_in=0, with_log_log=False):
    """Least-squares slope of log(value) against log(step).

    Points with step <= burn_in are dropped.  With ``with_log_log`` a
    log(log(step)) regressor is added; the returned slope is still the
    log(step) coefficient.
    """
    mask = curve.steps > max(burn_in, 1 if with_log_log else 0)
    steps = curve.steps[mask]
    values = curve.values[mask]
    if steps.size < 10:
        raise ValueError(f"need at least 10 post-burn-in points, got {steps.size}")
    if np.any(values <= 0):
        raise ValueError("rate fitting needs strictly positive error values")
    x = np.log(steps)
    columns = [np.ones_like(x), x]
    if with_log_log:
        columns.append(np.log(x))
    design = np.column_stack(columns)
    coef, *_ = np.linalg.lstsq(design, np.log(values), rcond=None)
    return float(coef[1])


# -- delayed recursion and its convolution representation ---------------------


def _coefficient_sequence(mu, a, b, length):
    """c[0] = 1, c[i] = mu[i] * sum_l a[i-1-l] * b[l] * c[l]."""
    c = np.zeros(length)
    c[0] = 1.0
    for i in range(1, length):
        c[i] = mu[i] * np.dot(a[:i][::-1], b[:i] * c[:i])
    return c


def lemma5_recursion(mu, a, b, epsilon, n):
    """Evaluate v_i = eps_i + mu_i * sum_{j<i} a_{i-j} b_j v_j two ways.

    Returns ``(v_direct, identity_gap)`` where the second evaluation expands
    v as a weighted sum of the noise terms through shifted coefficient
    sequences; the gap is the maximum absolute difference and should be at
    rounding level.
    """
    mu, a, b, epsilon = (np.asarray(s, dtype=float) for s in (mu, a, b, epsilon))
    n = int(n)
    for name, seq in (("mu", mu), ("a", a), ("b", b), ("epsilon", epsilon)):
        if seq.size < n:
            raise ValueError(f"{name} must have length >= {n}")
        if np.any(seq < 0):
            raise ValueError(f"{name} must be non-negative")
    v = np.zeros(n)
    for i in range(n):
        tail = np.dot(a[:i][::-1], b[:i] * v[:i]) if i else 0.0
        v[i] = epsilon[i] + mu[i] * tail
    v_repr = np.zeros(n)
    for j in range(n):
        coeff = _coefficient_sequence(mu[j:], a, b[j:], n - j)
        v_repr[j:] += coeff * epsilon[j]
    gap = float(np.max(np.abs(v - v_repr)))
    return v, gap


def convolution_powers(a_bar, m_max, k_max, b=None):
    """Iterated convolutions of a normalized tail sequence.

    Returns ``(powers, sup_changes)`` where ``powers[m-1]`` is the m-fold
    convolution truncated at ``k_max`` and ``sup_changes[m-1]`` the sup-norm
    change from the previous power (a convergence diagnostic).  An optional
    ``b`` weights the convolved factor elementwise.
    """
    a0 = np.zeros(int(k_max))
    src = np.asarray(a_bar, dtype=float)
    a0[: min(src.size, k_max)] = src[:k_max]
    if a0.sum() > 1.0 + 1e-9:
        raise ValueError(f"normalized tails must sum to <= 1, got {a0.sum()}")
    weights = None if b is None else np.asarray(b, dtype=float)[:k_max]
    powers = [a0.copy()]
    sup_changes = [float(np.max(np.abs(a0)))]
    for _ in range(1, int(m_max)):
        prev = powers[-1] if weights is None else powers[-1] * weights
        nxt = np.convolve(a0, prev)[:k_max]
        sup_changes.append(float(np.max(np.abs(nxt - powers[-1]))))
        powers.append(nxt)
    return np.array(powers), np.array(sup_changes)


def renewal_mass(a_bar, k_max, tol=1e-12, max_terms=100000):
    """Accumulated convolution powers sum_m a_bar^{*m}, truncated at k_max.

    Mass escapes past ``k_max`` as m grows, so the partial sums converge;
    iteration stops when one more power contributes less than ``tol``
    everywhere.  This accumulated form is the non-degenerate limit object
    entering the error bound (the plain pointwise limit of the powers is
    zero).
    """
    a0 = np.zeros(int(k_max))
    src = np.asarray(a_bar, dtype=float)
    a0[: min(src.size, k_max)] = src[:k_max]
    total = a0.copy()
    term = a0.copy()
    for _ in range(int(max_terms)):
        term = np.convolve(a0, term)[:k_max]
        total += term
        if term.max(initial=0.0) < tol:
            break
    else:
        raise RuntimeError("renewal mass accumulation did not converge")
    return total


@dataclass
class BoundSequences:
    """Everything the error bound needs, on a common horizon."""

    a: np.ndarray            # return-time tail probabilities, a[0] = P[tau >= 1]
    b: np.ndarray            # contraction ratio sequence
    mu_bar_cumsum: np.ndarray  # cumulative sums of r_j = 1 - b_j
    a_star: np.ndarray       # accumulated renewal mass of the normalized tails
    epsilon: np.ndarray      # noise sequence
    epsilon_bar: np.ndarray  # b-weighted noise sequence


def prepare_bound_sequences(a, b, m_means, e1, horizon):
    """Assemble :class:`BoundSequences` from chain and noise primitives.

    ``a`` are the return-time tails, ``b`` the per-step contraction ratios,
    ``m_means`` the expected per-step noise injections and ``e1`` the
    initial error.  The noise sequence is
    eps_n = e1 * a_n + sum_{j<n} a_{n-j} * m_means_j.
    """
    horizon = int(horizon)
    a = np.asarray(a, dtype=float)[:horizon]
    b = np.asarray(b, dtype=float)[:horizon]
    m_means = np.asarray(m_means, dtype=float)[:horizon]
    if a.size < horizon or b.size < horizon or m_means.size < horizon:
        raise ValueError(f"sequences must cover the horizon {horizon}")
    e1 = check_non_negative("e1", e1)
    eps = e1 * a.copy()
    if horizon > 1:
        eps[1:] += np.convolve(a, m_means)[: horizon - 1]
    r_mass = a.sum()
    a_bar = a / r_mass
    a_star = renewal_mass(a_bar, horizon)
    r = 1.0 - b
    return BoundSequences(
        a=a,
        b=b,
        mu_bar_cumsum=np.cumsum(r),
        a_star=a_star,
        epsilon=eps,
        epsilon_bar=b * eps,
    )


def _mu_bar_row(seqs: BoundSequences, j, max_l):
    """exp(-sum_{k=j+1}^{j+l} r_k) for l = 1..max_l (j is 1-based)."""
    cum = seqs.mu_bar_cumsum
    hi = np.minimum(j + np.arange(1, max_l + 1), cum.size) - 1
    lo = cum[j - 1] if j >= 1 else 0.0
    return np.exp(-(cum[hi] - lo))


def theorem1_bound(seqs: BoundSequences, b_const, n):
    """Evaluate b_const * sum over l+j+i = n of eps_bar_j mu_bar_l^j a*_i.

    All three composition indices are >= 1; ``n`` is the horizon (1-based).
    """
    n = int(n)
    b_const = check_non_negative("b_const", b_const)
    total = 0.0
    for j in range(1, n - 1):
        max_l = n - j - 1
        mu_row = _mu_bar_row(seqs, j, max_l)
        i_values = seqs.a_star[np.arange(n - j - 1, 0, -1) - 1]
        total += seqs.epsilon_bar[j - 1] * float(np.dot(mu_row, i_values))
    return b_const * total


def simulate_return_chain_error(alpha, m_const, e1, horizon, reps, rng,
                                visit_prob=0.5):
    """Monte-Carlo mean of the visited-coordinate error recursion.

    The watched state is visited independently with ``visit_prob`` each step
    (a symmetric two-state chain seen from one state); on a visit the error
    maps to ``alpha * e + m_const``.  Returns the mean curve E[e^n] for
    n = 1..horizon.
    """
    e = np.full(int(reps), float(e1))
    curve = np.empty(int(horizon))
    curve[0] = e1
    for n in range(1, int(horizon)):
        visited = rng.random(e.size) < visit_prob
        e[visited] = alpha * e[visited] + m_const
        curve[n] = e.mean()
    return curve


def return_time_tails_two_state(horizon):
    """P[first return >= j] for the symmetric two-state chain: 2**(1-j)."""
    return 0.5 ** np.arange(int(horizon))


# -- one-step contraction check ------------------------------------------------


def _norm_cdf(x):
    return 0.5 * (1.0 + math.erf(x / math.sqrt(2.0)))


def _norm_pdf(x):
    return math.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)


@dataclass
class ContractionReport:
    algorithm: str
    gamma: float
    e_start: float
    mc_mean: float
    mc_se: float
    alpha_k: float
    m_k: float
    bound: float
    violated: bool


def prop0_contraction_check(algorithm, gamma, replications, rng, d0=1.0,
                            sigma=1.0, L=1.0, B=1.0, saga_m=5, saga_c=1.0,
                            saga_slots=None, gamma_hat=None, last_sign=1,
                            hl_scheme="additive"):
    """One-step error of one update rule versus its contraction bound.

    The synthetic problem draws targets x ~ N(q*, sigma^2) and uses the
    residual q - x, for which the curvature constant is L = 1 and the
    quadratic-growth constant B = 1; the noise proxy is E[(X - X')^2] =
    2 sigma^2.  The report flags a violation when the Monte-Carlo mean
    exceeds alpha_k * e_k + M_k by more than three standard errors.

    Unless given explicitly, the memory slots of the memory-corrected rule
    default to the equilibrium-energy pattern d0 +/- sigma, whose mean
    square equals the residual second moment; far-from-equilibrium slots
    (for instance all zero) receive a noise injection that the stated
    constants do not cover.
    """
    check_choice("algorithm", algorithm, ("rl", "saga", "pass"))
    gamma = check_non_negative("gamma", gamma)
    sigma = check_positive("sigma", sigma)
    reps = int(replications)
    v = 2.0 * sigma * sigma
    w = rng.normal(0.0, sigma, reps)
    residuals = d0 - w

    if algorithm == "rl":
        e_start = d0 * d0
        e_next = (d0 - gamma * residuals) ** 2
        alpha_k = 1.0 - (2.0 * L * gamma - B * gamma * gamma)
        m_k = B * gamma * gamma * (4.0 + 3.0 * v)
    elif algorithm == "saga":
        slots = (d0 - rng.normal(0.0, sigma, saga_m) if saga_slots is None
                 else np.asarray(saga_slots, dtype=float))
        saga_m = slots.size
        e_start = saga_c * d0 * d0 + float(np.mean(slots**2))
        picks = rng.integers(0, saga_m, reps)
        direction = residuals - slots[picks] + slots.mean()
        q_gap = d0 - gamma * direction
        memory_term = (np.sum(slots**2) - slots[picks] ** 2 + residuals**2) / saga_m
        e_next = saga_c * q_gap**2 + memory_term
        alpha_k = max(
            1.0 - (2.0 * L * gamma - 3.0 * B * gamma * gamma) + B / (saga_m * saga_c),
            1.0 - (1.0 / saga_m - 6.0 * gamma * gamma * saga_c),
        )
        m_k = 3.0 * saga_c * B * gamma * gamma * (4.0 + 3.0 * v)
    else:
        base = gamma
        ghat = base if gamma_hat is None else float(gamma_hat)
        rate_up = h_increase(ghat, base, hl_scheme)
        rate_down = l_decrease(ghat, base, hl_scheme)
        same_sign = residuals * last_sign >= 0.0
        rates = np.where(same_sign, rate_up, rate_down)
        e_start = d0 * d0
        e_next = (d0 - rates * residuals) ** 2
        # analytic moments of the sign-dependent rate for the bound constants
        mu_over_sigma = d0 / sigma
        e_pos = d0 * _norm_cdf(mu_over_sigma) + sigma * _norm_pdf(mu_over_sigma)
        e_neg = d0 - e_pos
        if last_sign >= 0:
            effective = rate_up * e_pos + rate_down * e_neg
        else:
            effective = rate_down * e_pos + rate_up * e_neg
        l_k = 1.0
        b_k = (d0 * d0 + v) / (1.0 + d0 * d0 + v)
        gamma_bar = l_k / b_k
        c_k = effective / (gamma_bar * d0)
        gamma_under = min(c_k * gamma_bar, gamma_bar)
        alpha_k = 1.0 - (2.0 * l_k * gamma_under - b_k * gamma_under**2)
        if c_k >= 1.0:
            alpha_k += (3.0 - 1.0) ** 2 * b_k * base * base
        m_k = B * (c_k * gamma_bar) ** 2 * (4.0 + 3.0 * v)

    mc_mean = float(np.mean(e_next))
    mc_se = float(np.std(e_next, ddof=1) / np.sqrt(reps))
    bound = alpha_k * e_start + m_k
    return ContractionReport(
        algorithm=algorithm, gamma=gamma, e_start=e_start, mc_mean=mc_mean,
        mc_se=mc_se, alpha_k=alpha_k, m_k=m_k, bound=bound,
        violated=mc_mean > bound + 3.0 * mc_se,
    )
