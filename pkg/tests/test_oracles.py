import math
from fractions import Fraction

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from pdmplab import models, oracles
from pdmplab.engine import terminal_state
from pdmplab.models import build_model
from pdmplab.quadrature import adaptive_quad, bisect_root
from pdmplab.rng import RandomSource


# ---------------------------------------------------------------------------
# storage model


def test_storage_mean_examples():
    assert oracles.storage_mean(2.0, 7.3, 2.0, 1.0) == pytest.approx(2.0)  # fixed point
    assert oracles.storage_mean(0.0, 1.0, 1.0, 1.0) == pytest.approx(1.0 - math.exp(-1.0))


def test_storage_mean_solves_its_ode():
    # m' = alpha - beta m, checked by central differences of the formula
    alpha, beta, x = 1.3, 0.7, 2.0
    h = 1e-5
    for t in (0.1, 0.9, 3.0):
        deriv = (oracles.storage_mean(x, t + h, alpha, beta)
                 - oracles.storage_mean(x, t - h, alpha, beta)) / (2 * h)
        rhs = alpha - beta * oracles.storage_mean(x, t, alpha, beta)
        assert abs(deriv - rhs) < 1e-8


def test_storage_laplace_identity_and_limit():
    L0 = lambda s: 1.0 / (1.0 - 0.3 * s)  # some initial transform
    assert oracles.storage_laplace(0.0, 0.5, L0, 1.0, 1.0) == pytest.approx(L0(0.5))
    # long-time limit is the Gamma(alpha/beta) transform (1 - s)^(-alpha/beta)
    val = oracles.storage_laplace(100.0, 0.5, lambda s: 1.0, 1.0, 1.0)
    assert abs(val - 2.0) < 1e-6
    with pytest.raises(ValueError):
        oracles.storage_laplace(1.0, 1.0, L0, 1.0, 1.0)


def test_storage_laplace_against_monte_carlo():
    alpha = beta = 1.0
    s, t = 0.5, 1.0
    oracle = oracles.storage_laplace(t, s, lambda _: 1.0, alpha, beta)
    model = build_model(models.StorageSpec(alpha, beta))
    init = model.initial_state(0.0)
    rng = RandomSource(1001, 0)
    n = 1_000_000
    total = 0.0
    total_sq = 0.0
    for _ in range(n):
        v = math.exp(s * terminal_state(model, init, t, rng).x[0])
        total += v
        total_sq += v * v
    mean = total / n
    se = math.sqrt((total_sq / n - mean * mean) / n)
    assert abs(mean - oracle) <= 3 * se


# ---------------------------------------------------------------------------
# TCP moments and eigenpolynomials


def test_tcp_moment_trivial_and_first_order():
    assert oracles.tcp_moment(0, 3.0, 5.0, 1.0) == 1.0
    for t in (0.5, 1.0, 4.0):
        assert oracles.tcp_moment(1, 0.0, t, 1.0) == pytest.approx(
            2.0 * (1.0 - math.exp(-t / 2.0)), rel=1e-12)


def test_tcp_moment_matches_ode_integration():
    # independent oracle: integrate m_n' = n m_{n-1} - theta_n m_n
    lam = 1.0
    for x in (0.0, 3.0):
        def rhs(t, m):
            out = np.zeros(4)
            for n in range(1, 4):
                out[n] = n * m[n - 1] - lam * (1 - 0.5 ** n) * m[n]
            return out

        m0 = np.array([1.0, x, x ** 2, x ** 3])
        sol = solve_ivp(rhs, (0.0, 5.0), m0, rtol=1e-11, atol=1e-12,
                        t_eval=(1.0, 2.5, 5.0))
        for j, t in enumerate(sol.t):
            for n in (1, 2, 3):
                assert oracles.tcp_moment(n, x, t, lam) == pytest.approx(
                    sol.y[n, j], rel=1e-8)


def test_tcp_moment_stationary_limit():
    assert oracles.tcp_moment(2, 5.0, 1e3, 1.0) == pytest.approx(16.0 / 3.0, abs=1e-9)
    table = oracles.tcp_moment_table(2, 1.0)
    theta1 = 0.5
    assert table.transient(0.0, 50.0 / theta1) == pytest.approx(table.stationary,
                                                                rel=1e-9)


def test_tcp_invariant_moments():
    assert oracles.tcp_invariant_moment(0, 1.0) == 1.0
    assert oracles.tcp_invariant_moment(1, 1.0) == pytest.approx(2.0)
    assert oracles.tcp_invariant_moment(2, 1.0) == pytest.approx(16.0 / 3.0)
    assert oracles.tcp_invariant_moment(3, 1.0) == pytest.approx(128.0 / 7.0)


def test_tcp_eigenpoly_exact():
    assert oracles.tcp_eigenpoly(0) == (Fraction(1),)
    assert oracles.tcp_eigenpoly(1) == (Fraction(-2), Fraction(1))
    assert oracles.tcp_eigenpoly(2) == (Fraction(32, 3), Fraction(-8), Fraction(1))


def test_tcp_eigen_relation_exact_to_n8():
    for n in range(9):
        coeffs = oracles.tcp_eigenpoly(n)
        theta_n = Fraction(1) - Fraction(1, 2 ** n)
        assert oracles.tcp_poly_generator(coeffs) == tuple(-theta_n * c for c in coeffs)


def test_tcp_eigenpoly_pointwise_relation():
    # L P2 = -(3/4) P2 evaluated at integer points, per the n = 2 example
    coeffs = oracles.tcp_eigenpoly(2)
    lp = oracles.tcp_poly_generator(coeffs)
    for x in (0, 1, 2, 3):
        p2 = sum(c * Fraction(x) ** k for k, c in enumerate(coeffs))
        lp2 = sum(c * Fraction(x) ** k for k, c in enumerate(lp))
        assert lp2 == -Fraction(3, 4) * p2


def test_tcp_pairing_integrals():
    assert oracles.tcp_pairing_integral(0, 1) == 0
    assert oracles.tcp_pairing_integral(0, 2) == 0
    assert oracles.tcp_pairing_integral(1, 1) == Fraction(4, 3)
    assert oracles.tcp_pairing_integral(1, 2) == Fraction(-64, 21)
    assert oracles.tcp_pairing_integral(2, 1) == Fraction(-64, 21)  # symmetric
    # the flagged disagreement with the reported value stays visible
    assert oracles.TCP_PAIRING_P1P2 == Fraction(-64, 21)
    assert oracles.TCP_PAIRING_P1P2_REPORTED == Fraction(-64, 27)
    assert oracles.TCP_PAIRING_P1P2 != oracles.TCP_PAIRING_P1P2_REPORTED


def test_tcp_pairing_against_float_expansion():
    # brute-force float cross-check of the exact rational expansion
    for m, n in ((1, 1), (1, 2), (2, 2), (0, 3)):
        pm = [float(c) for c in oracles.tcp_eigenpoly(m)]
        pn = [float(c) for c in oracles.tcp_eigenpoly(n)]
        prod = np.polynomial.polynomial.polymul(pm, pn)
        val = sum(c * oracles.tcp_invariant_moment(k, 1.0)
                  for k, c in enumerate(prod))
        assert val == pytest.approx(float(oracles.tcp_pairing_integral(m, n)),
                                    rel=1e-10, abs=1e-10)


# ---------------------------------------------------------------------------
# Lyapunov exponent quadrature


def test_angular_mass_is_one():
    for r in (0.5, 1.0, 5.0, 20.0):
        bd = oracles.lyapunov_quadrature(1.0, r)
        assert abs(oracles.angular_mass(bd) - 1.0) <= 1e-6


def test_G_positive():
    for r in (0.5, 1.0, 4.6, 20.0):
        assert oracles.lyapunov_quadrature(1.0, r).G_value > 0.0


def test_L_is_G_minus_alpha():
    bd = oracles.lyapunov_quadrature(0.3, 2.0)
    assert bd.L_value == bd.G_value - 0.3


def test_stationary_ode_residual_small():
    for r in (0.5, 4.6):
        bd = oracles.lyapunov_quadrature(1.0, r)
        assert oracles.stationary_ode_residual(bd) < 1e-5


def test_quadrature_self_consistency_under_depth_doubling():
    for r in (0.1, 1.0, 7.0, 50.0):
        a = oracles.lyapunov_quadrature(1.0, r, min_depth=2).G_value
        b = oracles.lyapunov_quadrature(1.0, r, min_depth=4).G_value
        assert abs(a - b) < 1e-7


def test_density_symmetry_extension():
    bd = oracles.lyapunov_quadrature(1.0, 2.0)
    theta = -0.8
    for i in (0, 1):
        base = bd.density(theta, i)
        assert bd.density(theta + math.pi / 2, 1 - i) == pytest.approx(base, rel=1e-9)
        assert bd.density(theta + math.pi, i) == pytest.approx(base, rel=1e-9)


def test_lyapunov_quadrature_validates_inputs():
    with pytest.raises(ValueError):
        oracles.lyapunov_quadrature(0.0, 1.0)
    with pytest.raises(ValueError):
        oracles.lyapunov_quadrature(1.0, -2.0)


def test_interpolation_matrix_eigenvalues():
    # every convex combination p A1 + (1-p) A0 has eigenvalues -alpha +- i sqrt(p(1-p))
    alpha = 0.37
    A0, A1 = models.SwitchedLinearSpec(alpha=alpha, r=1.0).matrices()
    for p in np.linspace(0.0, 1.0, 21):
        eig = np.linalg.eigvals(p * A1 + (1 - p) * A0)
        assert np.allclose(eig.real, -alpha, atol=1e-12)
        assert np.allclose(np.sort(eig.imag),
                           np.sort([math.sqrt(p * (1 - p)), -math.sqrt(p * (1 - p))]),
                           atol=1e-12)


# ---------------------------------------------------------------------------
# deterministic stability function


def test_stability_R_at_half():
    r_val, cls = oracles.stability_R(0.5)
    root = math.sqrt(2.0)
    expect = (1.5 + root) * 2.0 * math.exp(-2.0 * root)
    assert r_val == pytest.approx(expect, rel=1e-14)
    assert r_val == pytest.approx(0.3445, abs=2e-4)
    assert cls == "stable"


def test_stability_classifications():
    assert oracles.stability_R(0.01)[1] == "unstable"  # R ~ e^{-2}/alpha^2
    assert oracles.stability_R(0.01)[0] > 1.0
    assert oracles.stability_R(0.6)[1] == "common-lyapunov"
    root = bisect_root(lambda a: oracles.stability_R(a)[0] - 1.0, 0.05, 0.5,
                       tol=1e-15)
    assert oracles.stability_R(root)[1] == "marginal"


def test_stability_threshold_location():
    root = oracles.stability_threshold()
    assert abs(root - 0.3314) <= 1e-3


# ---------------------------------------------------------------------------
# invariant densities


def test_dim1_density_flat_case():
    # lambda/alpha = 1 on both modes: p0(x) = 2 (1 - x)
    for x in (0.1, 0.5, 0.9):
        assert oracles.dim1_invariant_density(x, 0, 1, 1, 1, 1) == pytest.approx(
            2.0 * (1.0 - x), rel=1e-12)


def test_dim1_density_swap_symmetry():
    a0, a1, l0, l1 = 1.3, 0.6, 0.9, 2.0
    for x in (0.2, 0.7):
        swapped = oracles.dim1_invariant_density(x, 1, a1, a0, l1, l0)
        original = oracles.dim1_invariant_density(1.0 - x, 0, a0, a1, l0, l1)
        assert swapped == pytest.approx(original, rel=1e-12)


def test_dim1_density_blow_up_near_zero():
    # lambda0/alpha0 = 1/2 < 1: density diverges at the left endpoint
    assert oracles.dim1_invariant_density(1e-6, 0, 2.0, 1.0, 1.0, 1.0) > 1e2


def test_dim1_density_domain_and_normalization():
    with pytest.raises(ValueError):
        oracles.dim1_invariant_density(1.5, 0, 1, 1, 1, 1)
    with pytest.raises(ValueError):
        oracles.dim1_invariant_density(0.0, 0, 1, 1, 1, 1)
    val, _ = adaptive_quad(
        lambda xs: np.array([oracles.dim1_invariant_density(x, 1, 1.3, 0.6, 0.9, 2.0)
                             for x in xs]), 1e-9, 1.0 - 1e-9, rel_tol=1e-8)
    assert abs(val - 1.0) < 1e-6
    w0, w1 = oracles.dim1_mode_weights(0.9, 2.0)
    assert w0 == pytest.approx(2.0 / 2.9)
    assert w0 + w1 == pytest.approx(1.0)


def test_telegraph_density():
    assert oracles.telegraph_invariant_density(0.0, 1.0, 2.0) == pytest.approx(1.0)
    mean, _ = adaptive_quad(
        lambda xs: xs * np.array([oracles.telegraph_invariant_density(x, 1.0, 2.0)
                                  for x in xs]), 0.0, 60.0, rel_tol=1e-9)
    assert mean == pytest.approx(1.0, abs=1e-6)
    with pytest.raises(ValueError):
        oracles.telegraph_invariant_density(1.0, 2.0, 1.0)
    with pytest.raises(ValueError):
        oracles.telegraph_invariant_density(-0.5, 1.0, 2.0)


# ---------------------------------------------------------------------------
# dissipativity certificates


def test_dissipativity_estimates(zoo):
    rng = RandomSource(606, 0)
    dim1 = build_model(models.Dim1Spec(2.0, 2.0, 1.0, 1.0))
    assert oracles.dissipativity_estimate(dim1, 500, rng) == pytest.approx(2.0, abs=1e-9)
    planar = zoo["planar-rotation"]
    assert oracles.dissipativity_estimate(planar, 500, rng) == pytest.approx(1.0, abs=1e-9)
    switched = zoo["switched-linear"]  # alpha = 0.5: symmetric part peaks at 0
    est = oracles.dissipativity_estimate(switched, 4000, rng)
    assert abs(est) < 0.05
