import numpy as np
import pytest

from adastep.analysis import (
    BoundSequences,
    ErrorCurve,
    convolution_powers,
    fit_rate,
    lemma5_recursion,
    prepare_bound_sequences,
    prop0_contraction_check,
    renewal_mass,
    return_time_tails_two_state,
    simulate_return_chain_error,
    theorem1_bound,
)


# -- rate fitting -----------------------------------------------------------------

def test_exact_inverse_law_fits_slope_minus_one():
    steps = np.arange(1, 200)
    curve = ErrorCurve(steps=steps, values=1.0 / steps)
    assert fit_rate(curve) == pytest.approx(-1.0, abs=1e-10)


def test_exact_inverse_sqrt_law_fits_slope_minus_half():
    steps = np.arange(1, 200)
    curve = ErrorCurve(steps=steps, values=1.0 / np.sqrt(steps))
    assert fit_rate(curve) == pytest.approx(-0.5, abs=1e-10)


def test_log_refinement_regressor():
    steps = np.arange(2, 400)
    values = np.log(steps) / steps
    slope = fit_rate(ErrorCurve(steps=steps, values=values), with_log_log=True)
    assert slope == pytest.approx(-1.0, abs=1e-8)


def test_fit_rate_input_validation():
    with pytest.raises(ValueError):
        fit_rate(ErrorCurve(steps=np.arange(1, 6), values=np.ones(5)))
    steps = np.arange(1, 30)
    with pytest.raises(ValueError):
        fit_rate(ErrorCurve(steps=steps, values=np.zeros(29)))


def test_curve_validation():
    with pytest.raises(ValueError):
        ErrorCurve(steps=np.array([1, 1, 2]), values=np.ones(3))
    with pytest.raises(ValueError):
        ErrorCurve(steps=np.array([1, 2]), values=np.array([1.0, -1.0]))


# -- delayed recursion identity ------------------------------------------------------

def test_recursion_identity_first_term():
    v, gap = lemma5_recursion(mu=[0.5], a=[0.7], b=[0.9], epsilon=[1.3], n=1)
    assert v[0] == pytest.approx(1.3)
    assert gap == 0.0


def test_recursion_identity_second_term_hand_expansion():
    mu, a, b, eps = [0.5, 0.6], [0.7, 0.2], [0.9, 0.8], [1.0, 2.0]
    v, gap = lemma5_recursion(mu, a, b, eps, n=2)
    assert v[1] == pytest.approx(eps[1] + mu[1] * a[0] * b[0] * eps[0])
    assert gap < 1e-15


def test_recursion_identity_random_instances():
    rng = np.random.default_rng(31)
    for _ in range(10):
        n = int(rng.integers(5, 60))
        mu = rng.uniform(0, 1, n)
        a = rng.dirichlet(np.ones(n))  # sub-probability tails
        b = rng.uniform(0, 1, n)
        eps = rng.uniform(0, 1, n)
        _, gap = lemma5_recursion(mu, a, b, eps, n)
        assert gap <= 1e-12


# -- convolution powers ---------------------------------------------------------------

def test_point_mass_at_one_is_identity_under_the_recursion():
    delta1 = np.zeros(12)
    delta1[0] = 1.0
    powers, _ = convolution_powers(delta1, m_max=5, k_max=12)
    for m in range(5):
        assert np.allclose(powers[m], delta1)


def test_first_power_returns_the_sequence():
    a_bar = np.array([0.5, 0.25, 0.125, 0.0625])
    powers, _ = convolution_powers(a_bar, m_max=1, k_max=4)
    assert np.allclose(powers[0], a_bar)


def test_powers_match_naive_convolution_oracle():
    rng = np.random.default_rng(33)
    raw = rng.uniform(0, 1, 8)
    a_bar = raw / raw.sum()
    k_max = 8
    powers, _ = convolution_powers(a_bar, m_max=4, k_max=k_max)

    def naive(prev):
        out = np.zeros(k_max)
        for k in range(1, k_max + 1):          # 1-based target index
            total = 0.0
            for l in range(1, k + 1):
                total += a_bar[k - l] * prev[l - 1]
            out[k - 1] = total
        return out

    expected = a_bar.copy()
    for m in range(1, 4):
        expected = naive(expected)
        assert np.allclose(powers[m], expected, atol=1e-15)


def test_geometric_tails_have_decreasing_sup_change():
    a_bar = 0.5 ** np.arange(1, 40)
    _, sup_changes = convolution_powers(a_bar, m_max=30, k_max=60)
    assert np.all(np.diff(sup_changes[1:]) <= 1e-12)


def test_renewal_mass_of_geometric_tails_is_flat():
    # normalized two-state tails 2^-k: under the origin-at-one convolution
    # the shifted mean is sum (k-1) 2^-k = 1, so the renewal intensity is
    # exactly 1 at every lag
    a_bar = 0.5 ** np.arange(1, 60)
    mass = renewal_mass(a_bar, k_max=40)
    assert np.allclose(mass, 1.0, atol=1e-12)


# -- error bound -----------------------------------------------------------------------

def test_bound_is_zero_for_zero_noise():
    seqs = prepare_bound_sequences(
        a=return_time_tails_two_state(50), b=np.full(50, 0.5),
        m_means=np.zeros(50), e1=0.0, horizon=50)
    assert theorem1_bound(seqs, b_const=3.0, n=40) == 0.0


def test_bound_single_composition_matches_manual_evaluation():
    a = np.array([1.0, 0.5, 0.25, 0.125])
    b = np.array([0.9, 0.8, 0.7, 0.6])
    seqs = prepare_bound_sequences(a=a, b=b, m_means=np.array([0.2, 0.1, 0.1, 0.1]),
                                   e1=2.0, horizon=4)
    # eps_1 = e1 * a_1, eps_bar_1 = b_1 * eps_1
    eps_bar_1 = b[0] * 2.0 * a[0]
    # only (l, j, i) = (1, 1, 1): decay exp(-r_2) with r = 1 - b, renewal a*_1
    manual = eps_bar_1 * np.exp(-(1 - b[1])) * seqs.a_star[0]
    assert theorem1_bound(seqs, b_const=1.0, n=3) == pytest.approx(manual)


def test_chain_error_simulation_matches_closed_form():
    alpha, m_const, e1, p = 0.25, 0.01, 1.0, 0.5
    rng = np.random.default_rng(35)
    curve = simulate_return_chain_error(alpha, m_const, e1, horizon=80,
                                        reps=20000, rng=rng, visit_prob=p)
    lam = 1 - p * (1 - alpha)
    fixed_point = m_const / (1 - alpha)
    n = np.arange(80)
    analytic = (e1 - fixed_point) * lam**n + fixed_point
    assert np.allclose(curve, analytic, atol=0.02)


def test_calibrated_bound_dominates_simulated_error():
    alpha, m_const, e1, horizon = 0.25, 0.01, 1.0, 120
    rng = np.random.default_rng(36)
    curve = simulate_return_chain_error(alpha, m_const, e1, horizon, reps=4000,
                                        rng=rng)
    a = return_time_tails_two_state(horizon)
    seqs = prepare_bound_sequences(a=a, b=np.full(horizon, alpha),
                                   m_means=np.full(horizon, m_const),
                                   e1=e1, horizon=horizon)
    calibration_n = 10
    raw = theorem1_bound(seqs, 1.0, calibration_n)
    b_const = curve[calibration_n - 1] / raw
    for n in range(calibration_n, horizon + 1):
        assert theorem1_bound(seqs, b_const, n) >= curve[n - 1] * (1 - 1e-9)


# -- one-step contraction check ----------------------------------------------------------

def test_zero_rate_never_violates():
    rng = np.random.default_rng(37)
    for algo in ("rl", "saga", "pass"):
        report = prop0_contraction_check(algo, gamma=0.0, replications=2000, rng=rng)
        assert not report.violated
        if algo != "saga":
            assert report.bound == pytest.approx(report.e_start)


def test_plain_rule_constants_match_arithmetic():
    rng = np.random.default_rng(38)
    report = prop0_contraction_check("rl", gamma=0.5, replications=1000, rng=rng,
                                     d0=1.0, sigma=1.0)
    v = 2.0  # E[(X - X')^2] for two unit-variance copies
    assert report.alpha_k == pytest.approx(0.25)
    assert report.m_k == pytest.approx(0.25 * (4 + 3 * v))


def test_sign_search_bound_reduces_to_plain_bound_when_ratio_is_one():
    # with c = 1 and no overshoot penalty the constants collapse to the plain
    # ones evaluated at the local optimum L_k / B_k
    l_k, b_k, v = 0.8, 1.6, 2.0
    gamma_bar = l_k / b_k
    alpha_pass = 1.0 - (2 * l_k * gamma_bar - b_k * gamma_bar**2)
    alpha_rl = 1.0 - (2 * l_k * gamma_bar - b_k * gamma_bar**2)
    m_pass = b_k * (1.0 * gamma_bar) ** 2 * (4 + 3 * v)
    m_rl = b_k * gamma_bar**2 * (4 + 3 * v)
    assert alpha_pass == pytest.approx(alpha_rl)
    assert m_pass == pytest.approx(m_rl)


def test_contraction_holds_for_all_three_rules():
    rng = np.random.default_rng(39)
    for algo in ("rl", "saga", "pass"):
        for gamma in (0.05, 0.2, 0.5):
            report = prop0_contraction_check(algo, gamma=gamma, replications=5000,
                                             rng=rng)
            assert not report.violated, (algo, gamma, report)
