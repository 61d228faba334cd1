"""End-to-end acceptance checks at desk scale.

Each test prints one PASS/FAIL line with the measured quantities so a
plain `pytest -v` run doubles as the acceptance record. The simulation
cells use one fixed seed chosen before the final run; rates at 300-500
replications carry binomial noise of roughly +-0.02, which the bands
account for.
"""

import math
import time
from dataclasses import replace

import numpy as np
import pytest
import scipy.stats

from alphasign.basis import SplineConfig, bspline_basis, build_design, fit_panel, make_knots
from alphasign.dgp import AlphaSpec, ErrorScenario, simulate_panel
from alphasign.harness import (
    ExperimentConfig,
    resolve_knots,
    rolling_windows,
    run_experiment,
    run_replication_results,
)
from alphasign.spatial import spatial_median_scale
from alphasign.stat_tests import cauchy_combine, gumbel_critical_value, gumbel_p_value

ACCEPT_SEED = 20260816
GAMMA = 0.05


def _record(criterion: str, ok: bool, detail: str) -> bool:
    print(f"acceptance {criterion}: {'PASS' if ok else 'FAIL'} ({detail})")
    return ok


@pytest.fixture(scope="module")
def null_cell_normal():
    """Example 1, normal errors, N=200, T=350, 500 replications.

    Returns the full per-replication result lists (statistics and
    p-values) plus the wall time, shared by the size and the
    sum/max-dependence criteria.
    """
    config = ExperimentConfig(
        example=1,
        scenario=ErrorScenario("normal"),
        N=200,
        T=350,
        reps=500,
        seed=ACCEPT_SEED,
    )
    config = replace(config, knots=resolve_knots(config))
    start = time.perf_counter()
    results = [run_replication_results(config, i) for i in range(config.reps)]
    wall = time.perf_counter() - start
    return results, wall


@pytest.fixture(scope="module")
def null_cell_t3():
    config = ExperimentConfig(
        example=1,
        scenario=ErrorScenario("t"),
        N=200,
        T=350,
        reps=500,
        seed=ACCEPT_SEED,
        keep_pvalues=False,
    )
    return run_experiment(config, workers=1)


@pytest.fixture(scope="module")
def power_curve_t3():
    """CC/CSS/CSM/MNT rejection rates along the signal-strength grid."""
    rates = {}
    for c in range(2, 21, 2):
        config = ExperimentConfig(
            example=1,
            scenario=ErrorScenario("t"),
            N=400,
            T=350,
            reps=300,
            seed=ACCEPT_SEED,
            alpha_spec=AlphaSpec(sparsity=2, strength=float(c)),
            keep_pvalues=False,
        )
        rates[c] = run_experiment(config, workers=1).rejection_rates
    return rates


def _rates(results, names):
    out = {}
    for name in names:
        ps = np.array([
            next(r.p_value for r in rep if r.name == name) for rep in results
        ])
        out[name] = float(np.mean(ps < GAMMA))
    return out


def test_criterion_1_size_with_light_tails(null_cell_normal):
    results, wall = null_cell_normal
    r = _rates(results, ("CSS", "CSM", "CC"))
    ok = (
        0.030 <= r["CSS"] <= 0.070
        and 0.035 <= r["CSM"] <= 0.090
        and 0.035 <= r["CC"] <= 0.090
        and wall <= 20 * 60
    )
    assert _record(
        "criterion 1 (size, normal errors)",
        ok,
        f"CSS={r['CSS']:.3f} in [.030,.070], CSM={r['CSM']:.3f} in [.035,.090], "
        f"CC={r['CC']:.3f} in [.035,.090], wall={wall:.0f}s <= 1200s",
    )


def test_criterion_2_size_with_heavy_tails(null_cell_t3):
    r = null_cell_t3.rejection_rates
    ok = (
        0.030 <= r["CSS"] <= 0.070
        and 0.035 <= r["CSM"] <= 0.090
        and 0.035 <= r["CC"] <= 0.090
        and r["HDA"] <= 0.035
        and r["MNT"] <= 0.035
    )
    assert _record(
        "criterion 2 (size, t(3) errors)",
        ok,
        f"CSS={r['CSS']:.3f}, CSM={r['CSM']:.3f}, CC={r['CC']:.3f} in sign bands; "
        f"HDA={r['HDA']:.3f} <= .035, MNT={r['MNT']:.3f} <= .035",
    )


def test_criterion_3_sparse_power_ordering(power_curve_t3):
    r = power_curve_t3[20]
    margin_max = r["CSM"] - r["MNT"]
    margin_cc = r["CC"] - max(r["CSS"], r["CSM"])
    ok = margin_max >= 0.05 and margin_cc >= -0.05
    assert _record(
        "criterion 3 (power ordering at c=20)",
        ok,
        f"CSM={r['CSM']:.3f} vs MNT={r['MNT']:.3f} (margin {margin_max:+.3f}, need >= +0.05); "
        f"CC={r['CC']:.3f} vs max(CSS,CSM)={max(r['CSS'], r['CSM']):.3f} "
        f"(margin {margin_cc:+.3f}, need >= -0.05)",
    )


def test_criterion_4_power_monotonicity(power_curve_t3):
    grid = sorted(power_curve_t3)
    cc = [power_curve_t3[c]["CC"] for c in grid]
    rho = float(scipy.stats.spearmanr(grid, cc).statistic)
    ok = rho > 0.9
    assert _record(
        "criterion 4 (CC power monotone in c)",
        ok,
        f"spearman rho={rho:.3f} > 0.9; CC curve="
        + ",".join(f"{v:.3f}" for v in cc),
    )


def test_criterion_5_sum_max_dependence(null_cell_normal):
    results, _ = null_cell_normal
    t_css = np.array([next(r.statistic for r in rep if r.name == "CSS") for rep in results])
    t_csm = np.array([next(r.statistic for r in rep if r.name == "CSM") for rep in results])
    p_css = np.array([next(r.p_value for r in rep if r.name == "CSS") for rep in results])
    p_csm = np.array([next(r.p_value for r in rep if r.name == "CSM") for rep in results])
    corr = float(np.corrcoef(t_css, t_csm)[0, 1])
    joint = float(np.mean((p_css < GAMMA) & (p_csm < GAMMA)))
    ok = abs(corr) < 0.1 and 0.0015 <= joint <= 0.006
    assert _record(
        "criterion 5 (sum/max dependence under the null)",
        ok,
        f"|corr(T_CSS,T_CSM)|={abs(corr):.3f} < 0.1; joint rejection={joint:.4f} in [.0015,.006]",
    )


def test_criterion_6_analytic_oracles():
    worst_gumbel = max(
        abs(gumbel_p_value(gumbel_critical_value(g)) - g) for g in (0.01, 0.05, 0.10)
    )
    worst_cauchy = max(
        abs(cauchy_combine([p, p], truncated=truncated) - p)
        for p in (0.001, 0.05, 0.3)
        for truncated in (False, True)
    )
    ok = worst_gumbel <= 1e-10 and worst_cauchy <= 1e-12
    assert _record(
        "criterion 6 (reference-law oracles)",
        ok,
        f"max |p(q_gamma)-gamma|={worst_gumbel:.2e} <= 1e-10; "
        f"max |combine(p,p)-p|={worst_cauchy:.2e} <= 1e-12",
    )


def test_criterion_7_estimator_oracles():
    rng = np.random.default_rng(ACCEPT_SEED)
    worst_fit = 0.0
    for _ in range(50):
        p = int(rng.integers(1, 3))
        n = int(rng.integers(0, 2))
        order = int(rng.integers(2, 4))
        K = (1 + p) * (n + order)
        if K + 1 > 20:
            n, order = 0, 2
            K = (1 + p) * 2
        T = int(rng.integers(K + 1, 21))
        N = int(rng.integers(1, 6))
        design = build_design(rng.standard_normal((T, p)), SplineConfig(n, order))
        Y = rng.standard_normal((T, N))
        fit = fit_panel(Y, design)
        for Z, resid in (
            (design.Z, fit.residuals),
            (design.Z_tilde, fit.residuals_tilde),
        ):
            coef = np.linalg.pinv(Z.T @ Z) @ (Z.T @ Y)
            worst_fit = max(worst_fit, float(np.max(np.abs(Y - Z @ coef - resid))))

    worst_median = 0.0
    for _ in range(50):
        T = int(rng.integers(2, 26)) * 2 + 1
        x = rng.standard_normal(T) * rng.uniform(0.5, 3.0) + rng.uniform(-5.0, 5.0)
        loc = spatial_median_scale(x[:, None])
        med = float(np.median(x))
        worst_median = max(
            worst_median, abs(float(loc.theta[0]) - med) / (1.0 + abs(med))
        )

    worst_eq = 0.0
    for seed in range(3):
        sim = simulate_panel(
            1, ErrorScenario("normal"), AlphaSpec(), 20, 120,
            np.random.default_rng(ACCEPT_SEED + seed),
        )
        design = build_design(sim.factors, SplineConfig(2, 3))
        fit = fit_panel(sim.panel, design)
        loc = spatial_median_scale(fit.residuals)
        assert loc.converged
        X = (fit.residuals - loc.theta) / np.sqrt(loc.scale_diag)
        norms = np.linalg.norm(X, axis=1)
        U = X / norms[:, None]
        N = fit.residuals.shape[1]
        worst_eq = max(
            worst_eq,
            float(np.linalg.norm(U.mean(axis=0))),
            float(N * np.max(np.abs((U * U).mean(axis=0) - 1.0 / N))),
        )

    ok = worst_fit <= 1e-8 and worst_median <= 1e-8 and worst_eq <= 1e-8
    assert _record(
        "criterion 7 (estimator oracles)",
        ok,
        f"fit vs normal equations max err={worst_fit:.2e} <= 1e-8 (50 cases); "
        f"univariate location vs sorted median rel err={worst_median:.2e} <= 1e-8 (50 cases); "
        f"estimating equations at convergence={worst_eq:.2e} <= 1e-8",
    )


def test_criterion_8_spline_oracles():
    rng = np.random.default_rng(ACCEPT_SEED)
    worst_unity = 0.0
    for n, order in ((0, 3), (2, 3), (5, 2), (8, 4), (3, 1)):
        config = SplineConfig(n, order)
        knots = make_knots(n, order)
        for u in rng.random(1000):
            worst_unity = max(
                worst_unity, abs(bspline_basis(config, knots, float(u)).sum() - 1.0)
            )
    config = SplineConfig(0, 3)
    knots = make_knots(0, 3)
    worst_bernstein = 0.0
    for u in np.linspace(0.0, 1.0, 101):
        values = bspline_basis(config, knots, float(u))
        bern = np.array([(1 - u) ** 2, 2 * u * (1 - u), u**2])
        worst_bernstein = max(worst_bernstein, float(np.max(np.abs(values - bern))))
    ok = worst_unity <= 1e-12 and worst_bernstein <= 1e-12
    assert _record(
        "criterion 8 (spline oracles)",
        ok,
        f"partition of unity max err={worst_unity:.2e} <= 1e-12 (5 configs x 1000 points); "
        f"quadratic Bernstein max err={worst_bernstein:.2e} <= 1e-12",
    )


def test_criterion_9_rolling_window_counts():
    sim = simulate_panel(
        1, ErrorScenario("normal"), AlphaSpec(), 8, 399,
        np.random.default_rng(ACCEPT_SEED),
    )
    counts = {}
    for window in (276, 288, 300):
        rolling = rolling_windows(sim.panel, sim.factors, window=window, knots=1)
        counts[window] = len(rolling.window_starts)
        assert rolling.p_values.shape[0] == counts[window]
    ok = counts == {276: 124, 288: 112, 300: 100}
    assert _record(
        "criterion 9 (rolling window counts)",
        ok,
        f"T=399 -> counts {counts[276]}/{counts[288]}/{counts[300]}, expected 124/112/100",
    )
