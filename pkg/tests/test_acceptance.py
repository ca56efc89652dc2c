"""Acceptance suite: one test per criterion, each printing a verdict line.

Criterion 9 is expected red: the measured G curve peaks near r = 0.23
(value ~ 0.2), not in the figure-derived window r in [4.0, 5.2]; the
formulas, an exact-segment Monte Carlo, and a brute-force matrix
simulation all agree on that location (see README, "Criterion 9 is
red by design"). The test asserts the stated windows anyway and fails
honestly.
"""

import math
import time

import numpy as np
from scipy import stats

from pdmplab import models, oracles
from pdmplab.coupling import (couple_shared_noise, couple_tv_storage,
                              couple_tv_tcp, empirical_wasserstein, lyapunov_mc)
from pdmplab.engine import (HybridState, advance_flow, ergodic_samples,
                            sample_next_jump, simulate, terminal_state)
from pdmplab.models import build_model, morris_lecar_rates, voltage_segment
from pdmplab.rng import RandomSource

from conftest import small_morris_lecar


def _verdict(criterion, label, ok, detail):
    status = "PASS" if ok else "FAIL"
    print(f"ACCEPTANCE criterion-{criterion:02d} [{label}]: {status} ({detail})")
    return ok


def _terminal_batch(model, x0, t, n, seed, mode=0):
    rng = RandomSource(seed, 0)
    init = model.initial_state(x0, mode)
    out = np.empty(n)
    for k in range(n):
        out[k] = terminal_state(model, init, t, rng).x[0]
    return out


def test_criterion_01_storage_mean():
    start = time.perf_counter()
    model = build_model(models.StorageSpec(1.0, 1.0))
    n = 100000
    ok = True
    details = []
    for i, t in enumerate((0.5, 1.0, 2.0, 4.0)):
        vals = _terminal_batch(model, 0.0, t, n, seed=1100 + i)
        se = vals.std(ddof=1) / math.sqrt(n)
        oracle = oracles.storage_mean(0.0, t, 1.0, 1.0)
        good = abs(vals.mean() - oracle) <= 3 * se
        ok = ok and good
        details.append(f"t={t:g}: {vals.mean():.4f} vs {oracle:.4f} +-{3 * se:.4f}")
    elapsed = time.perf_counter() - start
    ok = ok and elapsed < 10.0
    assert _verdict(1, "storage mean", ok, "; ".join(details) + f"; {elapsed:.1f}s")


def test_criterion_02_storage_gamma_invariant_law():
    n = 100000
    ok = True
    details = []
    for i, alpha in enumerate((0.5, 1.0, 2.0)):
        model = build_model(models.StorageSpec(alpha, 1.0))
        vals = _terminal_batch(model, 0.0, 50.0, n, seed=1200 + i)
        ks = stats.kstest(vals, stats.gamma(alpha).cdf).statistic
        ok = ok and ks < 0.02
        details.append(f"shape={alpha:g}: KS={ks:.4f}")
    assert _verdict(2, "storage Gamma law", ok, "; ".join(details))


def test_criterion_03_storage_tv_bound():
    n = 20000
    cases = [  # (x, y, t, alpha, beta); third case is the alpha = beta limit
        (3.0, 0.0, 4.0, 1.0, 2.0),
        (2.0, 0.0, 2.0, 1.0, 2.0),
        (1.0, 0.0, 3.0, 1.0, 1.0),
        (0.5, 0.2, 3.0, 2.0, 1.0),
    ]
    ok = True
    details = []
    for i, (x, y, t, a, b) in enumerate(cases):
        rng = RandomSource(1300 + i, 0)
        bad = sum(not couple_tv_storage(x, y, t, a, b, rng).coalesced
                  for _ in range(n))
        p = bad / n
        se = math.sqrt(max(p * (1 - p), 1e-12) / n)
        if a == b:
            bound = (1.0 + abs(x - y) * a * t) * math.exp(-a * t)
        else:
            bound = math.exp(-a * t) + abs(x - y) * a * (
                math.exp(-b * t) - math.exp(-a * t)) / (a - b)
        good = p <= bound + 3 * se
        ok = ok and good
        details.append(f"({x:g},{y:g},{t:g}): {p:.4f} <= {bound:.4f}+{3 * se:.4f}")
    assert _verdict(3, "storage TV bound", ok, "; ".join(details))


def test_criterion_04_tcp_moments():
    model = build_model(models.TcpSpec(1.0))
    n = 100000
    ok = True
    details = []
    for i, (x, t) in enumerate(((0.0, 1.0), (0.0, 5.0), (3.0, 1.0), (3.0, 5.0))):
        vals = _terminal_batch(model, x, t, n, seed=1400 + i)
        for order in (1, 2, 3):
            powered = vals ** order
            se = powered.std(ddof=1) / math.sqrt(n)
            oracle = oracles.tcp_moment(order, x, t, 1.0)
            good = abs(powered.mean() - oracle) <= 3 * se
            ok = ok and good
            if not good:
                details.append(f"x={x:g},t={t:g},n={order}: "
                               f"{powered.mean():.4f} vs {oracle:.4f}")
    vals = _terminal_batch(model, 0.0, 60.0, n, seed=1408)
    for order, target in ((1, 2.0), (2, 16.0 / 3.0)):
        powered = vals ** order
        se = powered.std(ddof=1) / math.sqrt(n)
        good = abs(powered.mean() - target) <= 3 * se
        ok = ok and good
        details.append(f"stationary n={order}: {powered.mean():.4f} vs {target:.4f} "
                       f"+-{3 * se:.4f}")
    assert _verdict(4, "tcp moments", ok, "; ".join(details))


def test_criterion_05_tcp_wasserstein_rate():
    model = build_model(models.TcpSpec(1.0))
    x, y, t = 2.0, 1.0, 3.0
    n = 30000
    rng = RandomSource(1500, 0)
    dists = np.empty(n)
    identity_exact = True
    for k in range(n):
        run = couple_shared_noise(model, x, y, t, rng, sample_times=(t,))
        dists[k] = run.distances[0]
        identity_exact = identity_exact and (
            run.distances[0] == abs(x - y) * 0.5 ** run.n_jumps)
    ok = identity_exact
    details = [f"pathwise identity exact on {n} runs: {identity_exact}"]
    for p in (1, 2):
        powered = dists ** p
        se = powered.std(ddof=1) / math.sqrt(n)
        oracle = abs(x - y) ** p * math.exp(-(1 - 0.5 ** p) * t)
        good = abs(powered.mean() - oracle) <= 3 * se
        ok = ok and good
        details.append(f"p={p}: {powered.mean():.5f} vs {oracle:.5f} +-{3 * se:.5f}")
    assert _verdict(5, "tcp Wasserstein rate", ok, "; ".join(details))


def test_criterion_06_tcp_tv_bound():
    x, y, lam = 2.0, 1.0, 1.0
    n = 20000
    ok = True
    details = []
    for i, t in enumerate((2.0, 5.0, 10.0)):
        rng = RandomSource(1600 + i, 0)
        bad = sum(not couple_tv_tcp(x, y, t, lam, rng).coalesced for _ in range(n))
        p = bad / n
        se = math.sqrt(max(p * (1 - p), 1e-12) / n)
        bound = lam * math.exp(-lam * t / 2) * abs(x - y) + math.exp(-lam * t)
        good = p <= bound + 3 * se
        ok = ok and good
        details.append(f"t={t:g}: {p:.4f} <= {bound:.4f}+{3 * se:.4f}")
    assert _verdict(6, "tcp TV bound", ok, "; ".join(details))


def test_criterion_07_eigenpolynomials():
    from fractions import Fraction

    p1 = oracles.tcp_eigenpoly(1)
    p2 = oracles.tcp_eigenpoly(2)
    ok = p1 == (Fraction(-2), Fraction(1))
    ok = ok and p2 == (Fraction(32, 3), Fraction(-8), Fraction(1))
    for n in range(9):
        coeffs = oracles.tcp_eigenpoly(n)
        theta_n = Fraction(1) - Fraction(1, 2 ** n)
        ok = ok and oracles.tcp_poly_generator(coeffs) == tuple(
            -theta_n * c for c in coeffs)
    pairing = oracles.tcp_pairing_integral(1, 2)
    ok = ok and pairing == Fraction(-64, 21)
    flagged = (oracles.TCP_PAIRING_P1P2 == Fraction(-64, 21)
               and oracles.TCP_PAIRING_P1P2_REPORTED == Fraction(-64, 27))
    ok = ok and flagged
    assert _verdict(7, "eigenpolynomials", ok,
                    f"P1, P2 exact; eigen-relation n<=8 exact; pairing={pairing} "
                    f"(reported -64/27 flagged as known issue)")


def test_criterion_08_lyapunov_exponent():
    start = time.perf_counter()
    ok = True
    details = []
    for i, (alpha, r) in enumerate(((0.1, 1.0), (0.1, 4.6), (0.5, 4.6))):
        bd = oracles.lyapunov_quadrature(alpha, r)
        mass_err = abs(oracles.angular_mass(bd) - 1.0)
        residual = oracles.stationary_ode_residual(bd)
        est = lyapunov_mc(alpha, r, 1e6, RandomSource(1800 + i, 0))
        gap = abs(est - bd.L_value)
        good = gap < 0.01 and mass_err <= 1e-6 and residual < 1e-5
        ok = ok and good
        details.append(f"(a={alpha:g},r={r:g}): |mc-quad|={gap:.5f}, "
                       f"mass_err={mass_err:.1e}, ode_res={residual:.1e}")
    elapsed = time.perf_counter() - start
    ok = ok and elapsed < 60.0
    assert _verdict(8, "Lyapunov exponent", ok,
                    "; ".join(details) + f"; {elapsed:.1f}s")


def test_criterion_09_g_curve_shape():
    # the asserted windows reproduce the conjectured figure; the faithful
    # formulas place the peak at r ~ 0.23 instead (same height), so this
    # criterion is expected to fail red; see the module docstring and README
    r_star, g_star = oracles.g_curve_max(0.1, 50.0)
    g_left = oracles.lyapunov_quadrature(1.0, 0.1).G_value
    g_right = oracles.lyapunov_quadrature(1.0, 50.0).G_value
    location_ok = 4.0 <= r_star <= 5.2
    value_ok = 0.17 <= g_star <= 0.23
    tails_ok = g_left < 0.05 and g_right < 0.05
    ok = location_ok and value_ok and tails_ok
    _verdict(9, "G-curve shape", ok,
             f"argmax={r_star:.4f} (window [4.0, 5.2]), max={g_star:.4f} "
             f"(window [0.17, 0.23]), G(0.1)={g_left:.4f}, G(50)={g_right:.4f}")
    assert location_ok, (
        f"G peaks at r={r_star:.4f}, outside the figure window [4.0, 5.2]; "
        "the exact formulas, the exact-segment MC, and a brute-force matrix "
        "simulation agree on this location (documented contradiction)")
    assert value_ok
    assert tails_ok, f"G(0.1)={g_left:.4f} is not below 0.05"


def test_criterion_10_deterministic_stability():
    root = oracles.stability_threshold()
    ok = abs(root - 0.3314) <= 1e-3
    rng = RandomSource(2000, 0)
    worst_gap = 0.0
    for _ in range(50):
        alpha = 0.01 + 0.98 * rng.uniform()
        cyc = models.worst_trajectory_cycle(alpha)
        r_val, _ = oracles.stability_R(alpha)
        worst_gap = max(worst_gap, abs(cyc.growth - r_val) / max(1.0, r_val))
    ok = ok and worst_gap <= 1e-10
    sim_gap = 0.0
    for alpha in (0.32, 0.3314, 0.34):
        cyc = models.worst_trajectory_cycle(alpha)
        model = build_model(models.SwitchedLinearSpec(alpha=alpha, r=1.0))
        state = model.initial_state((0.0, 1.0), 0)
        state = advance_flow(model, state, cyc.t1)
        state = HybridState(state.x, 1)
        state = advance_flow(model, state, cyc.t2 - cyc.t1)
        state = HybridState(state.x, 0)
        state = advance_flow(model, state, cyc.t3 - cyc.t2)
        r_val, _ = oracles.stability_R(alpha)
        sim_gap = max(sim_gap, abs(state.x[0]),
                      abs(math.hypot(*state.x) - r_val))
    ok = ok and sim_gap <= 1e-6
    assert _verdict(10, "deterministic stability", ok,
                    f"root={root:.5f} (0.3314 +- 1e-3); max growth-vs-R gap "
                    f"{worst_gap:.1e} (<=1e-10); worst simulated-cycle gap "
                    f"{sim_gap:.1e} (<=1e-6)")


def test_criterion_11_dim1_invariant_law():
    n = 100000
    ok = True
    details = []
    cases = [
        ("flat", models.Dim1Spec(1.0, 1.0, 1.0, 1.0)),
        # lambda0/alpha0 = 1/2 < 1: conditional density blows up at 0
        ("blow-up", models.Dim1Spec(2.0, 1.0, 1.0, 1.0)),
    ]
    for i, (label, spec) in enumerate(cases):
        model = build_model(spec)
        xs, modes = ergodic_samples(model, model.initial_state(0.5, 0),
                                    burn_in=50.0, n=n, spacing=3.0,
                                    rng=RandomSource(2100 + i, 0))
        for mode in (0, 1):
            sel = xs[modes == mode, 0]
            if mode == 0:
                a, b = spec.lambda0 / spec.alpha0, spec.lambda1 / spec.alpha1 + 1
            else:
                a, b = spec.lambda0 / spec.alpha0 + 1, spec.lambda1 / spec.alpha1
            ks = stats.kstest(sel, stats.beta(a, b).cdf).statistic
            ok = ok and ks < 0.02
            details.append(f"{label} mode {mode}: KS={ks:.4f} (n={sel.size})")
    assert _verdict(11, "dim1 Beta law", ok, "; ".join(details))


def test_criterion_12_telegraph_invariant_law():
    model = build_model(models.TelegraphSpec(1.0, 2.0))
    n = 100000
    xs, modes = ergodic_samples(model, model.initial_state(0.0, 1),
                                burn_in=20.0, n=n, spacing=4.0,
                                rng=RandomSource(2200, 0))
    radii = np.abs(xs[:, 0])
    ks = stats.kstest(radii, stats.expon(scale=1.0).cdf).statistic  # b - a = 1
    v_mean = float(np.mean(2 * modes - 1))
    v_tol = 3.0 / math.sqrt(n)
    ok = ks < 0.02 and abs(v_mean) <= v_tol
    assert _verdict(12, "telegraph law", ok,
                    f"radius KS={ks:.4f} (<0.02); velocity mean={v_mean:.4f} "
                    f"(+-{v_tol:.4f})")


def test_criterion_13_morris_lecar_containment():
    spec = small_morris_lecar()
    model = build_model(spec)
    lo, hi = voltage_segment(spec)
    n_traj = 10000
    horizon = 1000.0
    contained = True
    rng = RandomSource(2300, 0)
    for k in range(n_traj):
        v0 = lo + (hi - lo) * rng.uniform()
        mode0 = int(rng.uniform() * model.n_modes)
        traj = simulate(model, model.initial_state(v0, mode0), horizon,
                        rng.split(k + 1))
        for ev in traj.events:
            if not (lo - 1e-12 <= ev.pre.x[0] <= hi + 1e-12
                    and lo - 1e-12 <= ev.post.x[0] <= hi + 1e-12):
                contained = False
        if not (lo - 1e-12 <= traj.terminal.x[0] <= hi + 1e-12):
            contained = False
    identity_ok = True
    positive_ok = True
    for V in np.linspace(lo, hi, 100):
        for i, (c, vp, vpp) in enumerate([(spec.c1, spec.Vp1, spec.Vpp1),
                                          (spec.c2, spec.Vp2, spec.Vpp2)], start=1):
            a, b = morris_lecar_rates(V, i, spec)
            identity_ok = identity_ok and abs(
                a + b - 2.0 * c * math.cosh((V - vp) / (2 * vpp))) < 1e-12
            positive_ok = positive_ok and a > 0 and b > 0
    ok = contained and identity_ok and positive_ok
    assert _verdict(13, "Morris-Lecar containment", ok,
                    f"{n_traj} trajectories stayed in [0, {hi:g}] to t={horizon:g}: "
                    f"{contained}; rate identity 1e-12 and positivity on "
                    f"100-point grid: {identity_ok and positive_ok}")


def test_criterion_14_property_suite_runtime():
    start = time.perf_counter()
    # engine reproducibility, bit-identical
    model = build_model(models.StorageSpec(1.0, 1.0))
    init = model.initial_state(0.0)
    a = simulate(model, init, 5.0, RandomSource(2400, 3))
    b = simulate(model, init, 5.0, RandomSource(2400, 3))
    repro = a.events == b.events and a.terminal == b.terminal
    # thinning KS: bandit waiting times against the quadrature survival
    bandit = build_model(models.BanditSpec(p=0.7, q=0.3, g=0.5))
    state = bandit.initial_state(2.0)
    rng = RandomSource(2401, 0)
    waits = np.sort([sample_next_jump(bandit, state, rng, 1e9)[0]
                     for _ in range(20000)])
    y_star = (1 - 0.7) / 0.7
    from pdmplab.quadrature import adaptive_quad

    def survival(t):
        val, _ = adaptive_quad(
            lambda ss: 0.3 / 0.5 * (y_star + (2.0 - y_star) * np.exp(-0.7 * ss)),
            0.0, t, rel_tol=1e-10, abs_tol=1e-12)
        return math.exp(-val)

    u = np.array([1.0 - survival(t) for t in waits])
    thinning_ks = stats.kstest(u, "uniform").statistic
    # coupling marginal correctness (tcp TV coupling, both components)
    n = 30000
    tcp = build_model(models.TcpSpec(1.0))
    rng = RandomSource(2402, 0)
    cx = np.empty(n)
    cy = np.empty(n)
    for k in range(n):
        run = couple_tv_tcp(2.0, 1.0, 2.0, 1.0, rng)
        cx[k] = run.terminal_x.x[0]
        cy[k] = run.terminal_y.x[0]
    ref_x = _terminal_batch(tcp, 2.0, 2.0, n, seed=2403)
    ref_y = _terminal_batch(tcp, 1.0, 2.0, n, seed=2404)
    p_x = stats.ks_2samp(cx, ref_x).pvalue
    p_y = stats.ks_2samp(cy, ref_y).pvalue
    # Wasserstein metric properties
    rng = RandomSource(2405, 0)
    metric_ok = True
    for _ in range(10):
        sa = rng.uniforms(64)
        sb = rng.uniforms(64) + 0.3
        sc = rng.uniforms(64) * 2.0
        dab = empirical_wasserstein(sa, sb).value
        metric_ok = metric_ok and dab == empirical_wasserstein(sb, sa).value
        metric_ok = metric_ok and dab <= (empirical_wasserstein(sa, sc).value
                                          + empirical_wasserstein(sc, sb).value + 1e-12)
    elapsed = time.perf_counter() - start
    ok = (repro and thinning_ks < 0.01 and p_x > 0.001 and p_y > 0.001
          and metric_ok and elapsed < 300.0)
    assert _verdict(14, "property suite", ok,
                    f"reproducible={repro}; thinning KS={thinning_ks:.4f}; "
                    f"marginal p-values=({p_x:.3f}, {p_y:.3f}); metric={metric_ok}; "
                    f"{elapsed:.1f}s (<300s)")
