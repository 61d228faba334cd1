"""Monte Carlo harness: seeded replications, experiment aggregation, and
rolling-window analysis.

Every replication derives its generator from (seed, rep_index) through a
splittable seed sequence, so a replication's draw stream never depends on
how many replications run, in which order, or on how work is distributed
across processes. Two runs that share a seed and overlap in rep_index
produce identical results on the overlap.
"""

from __future__ import annotations

import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .dgp import AlphaSpec, ErrorScenario, simulate_panel
from .errors import AlphaSignError, ContractError
from .stat_tests import TEST_NAMES, TestResult, run_all_tests

THREADS_ENV = "ALPHASIGN_THREADS"

# A run with more than this share of failed replications is flagged invalid.
MAX_FAILURE_SHARE = 0.05


@dataclass(frozen=True)
class ExperimentConfig:
    """Complete description of one simulation cell.

    knots: a fixed interior-knot count, "auto" (information-criterion
    selection on replication 0, reused for the whole cell), or
    "auto-strict" (re-selected inside every replication).
    """

    example: int
    scenario: ErrorScenario
    N: int
    T: int
    reps: int
    seed: int
    alpha_spec: AlphaSpec = AlphaSpec()
    gamma: float = 0.05
    tests: tuple[str, ...] = TEST_NAMES
    knots: int | str = "auto"
    order: int = 3
    keep_pvalues: bool = True

    def __post_init__(self):
        if self.reps < 1:
            raise ContractError("reps must be >= 1")
        if not 0.0 < self.gamma < 1.0:
            raise ContractError("gamma must lie in (0, 1)")
        if isinstance(self.knots, str):
            if self.knots not in ("auto", "auto-strict"):
                raise ContractError(
                    "knots must be an integer, 'auto' or 'auto-strict'"
                )
        elif int(self.knots) < 0:
            raise ContractError("knots must be >= 0")
        unknown = set(self.tests) - set(TEST_NAMES)
        if unknown:
            raise ContractError(f"unknown test names: {sorted(unknown)}")


@dataclass
class ExperimentReport:
    """Aggregated cell output.

    rejection_rates are computed over successful replications at the
    configured level. p_values maps each requested test to a reps-long
    array with NaN rows for failed replications (present only when the
    config retains them). valid is False when more than 5% of the
    replications failed.
    """

    config: ExperimentConfig
    rejection_rates: dict[str, float]
    failures: int
    wall_time: float
    valid: bool
    chosen_knots: int | None
    p_values: dict[str, np.ndarray] | None = field(default=None, repr=False)


def replication_rng(seed: int, rep_index: int) -> np.random.Generator:
    """Independent generator for one replication of a seeded experiment."""
    if rep_index < 0:
        raise ContractError("rep_index must be >= 0")
    return np.random.default_rng(
        np.random.SeedSequence(entropy=seed, spawn_key=(rep_index,))
    )


def resolve_knots(config: ExperimentConfig) -> int | str:
    """Materialize the cell's knot choice.

    "auto" selects on replication 0's simulated panel and returns the
    fixed count used for every replication of the cell. Integers pass
    through; "auto-strict" stays symbolic (selection happens per
    replication).
    """
    if config.knots != "auto":
        return config.knots
    from .basis import select_knots_bic

    rng = replication_rng(config.seed, 0)
    sim = simulate_panel(
        config.example, config.scenario, config.alpha_spec, config.N, config.T, rng
    )
    return select_knots_bic(sim.panel, sim.factors, order=config.order)


def run_replication_results(
    config: ExperimentConfig, rep_index: int
) -> list[TestResult]:
    """Simulate replication rep_index and run the full battery on it."""
    knots = resolve_knots(config) if config.knots == "auto" else config.knots
    if knots == "auto-strict":
        knots = "auto"
    rng = replication_rng(config.seed, rep_index)
    sim = simulate_panel(
        config.example, config.scenario, config.alpha_spec, config.N, config.T, rng
    )
    return run_all_tests(sim.panel, sim.factors, knots=knots, order=config.order)


def run_replication(config: ExperimentConfig, rep_index: int) -> dict[str, float]:
    """P-values of the requested tests for one replication."""
    results = run_replication_results(config, rep_index)
    return {r.name: r.p_value for r in results if r.name in config.tests}


def resolve_workers(workers: int | None = None) -> int:
    """Worker count: explicit argument, else the env cap, else cpu_count."""
    if workers is not None:
        return max(1, int(workers))
    env = os.environ.get(THREADS_ENV)
    if env is not None:
        try:
            return max(1, int(env))
        except ValueError as exc:
            raise ContractError(
                f"{THREADS_ENV} must be an integer, got {env!r}"
            ) from exc
    return os.cpu_count() or 1


def _replication_worker(args: tuple[ExperimentConfig, int]):
    config, idx = args
    try:
        return idx, run_replication(config, idx)
    except (AlphaSignError, np.linalg.LinAlgError):
        return idx, None


def collect_replications(
    config: ExperimentConfig, workers: int | None = None
) -> list[dict[str, float] | None]:
    """All replications' p-value dicts in rep order; None marks a failure."""
    eff = config
    if config.knots == "auto":
        eff = replace(config, knots=resolve_knots(config))
    n_workers = resolve_workers(workers)
    jobs = [(eff, i) for i in range(config.reps)]
    out: list[dict[str, float] | None] = [None] * config.reps
    if n_workers == 1 or config.reps < 4:
        for job in jobs:
            idx, res = _replication_worker(job)
            out[idx] = res
    else:
        chunk = max(1, config.reps // (n_workers * 8))
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            for idx, res in pool.map(_replication_worker, jobs, chunksize=chunk):
                out[idx] = res
    return out


def run_experiment(
    config: ExperimentConfig, workers: int | None = None
) -> ExperimentReport:
    """Run all replications of a cell and aggregate rejection rates."""
    t0 = time.perf_counter()
    chosen = resolve_knots(config) if config.knots == "auto" else None
    eff = config if chosen is None else replace(config, knots=chosen)
    rows = collect_replications(eff, workers)
    failures = sum(1 for r in rows if r is None)
    p_values: dict[str, np.ndarray] = {}
    rates: dict[str, float] = {}
    for name in config.tests:
        vals = np.array(
            [r[name] if r is not None else np.nan for r in rows], dtype=float
        )
        p_values[name] = vals
        ok = vals[~np.isnan(vals)]
        rates[name] = float(np.mean(ok < config.gamma)) if ok.size else float("nan")
    wall = time.perf_counter() - t0
    return ExperimentReport(
        config=config,
        rejection_rates=rates,
        failures=failures,
        wall_time=wall,
        valid=failures <= MAX_FAILURE_SHARE * config.reps,
        chosen_knots=chosen if isinstance(chosen, int) else (
            eff.knots if isinstance(eff.knots, int) else None
        ),
        p_values=p_values if config.keep_pvalues else None,
    )


@dataclass
class RollingResult:
    """Rolling-window p-values and rejection ratios.

    p_values has one row per window in the order of window_starts
    (1-based start index) and one column per requested test.
    """

    window_starts: np.ndarray
    tests: tuple[str, ...]
    p_values: np.ndarray
    rejection_ratios: dict[float, dict[str, float]]


def rolling_windows(
    panel,
    factors,
    window: int,
    tests: tuple[str, ...] = TEST_NAMES,
    knots: int | str = "auto",
    order: int = 3,
    levels: tuple[float, ...] = (0.01, 0.05),
) -> RollingResult:
    """Run the battery on every length-`window` contiguous sub-panel.

    A panel with T rows yields T - window + 1 windows, each treated as a
    standalone sample (the sieve grid and any knot selection are local to
    the window). Rejection ratios report, per test and level, the share
    of windows whose p-value falls below the level.
    """
    Y = np.asarray(panel, dtype=float)
    F = np.asarray(factors, dtype=float)
    if F.ndim == 1:
        F = F[:, None]
    if Y.ndim != 2:
        raise ContractError("panel must be T x N")
    if Y.shape[0] != F.shape[0]:
        raise ContractError("panel and factors must have the same number of rows")
    T = Y.shape[0]
    if not 2 <= window <= T:
        raise ContractError(f"window must lie in [2, T={T}], got {window}")
    unknown = set(tests) - set(TEST_NAMES)
    if unknown:
        raise ContractError(f"unknown test names: {sorted(unknown)}")
    n_windows = T - window + 1
    starts = np.arange(1, n_windows + 1)
    pvals = np.empty((n_windows, len(tests)))
    for w in range(n_windows):
        results = run_all_tests(
            Y[w : w + window], F[w : w + window], knots=knots, order=order
        )
        by_name = {r.name: r.p_value for r in results}
        pvals[w] = [by_name[t] for t in tests]
    ratios = {
        float(level): {
            t: float(np.mean(pvals[:, j] < level)) for j, t in enumerate(tests)
        }
        for level in levels
    }
    return RollingResult(starts, tuple(tests), pvals, ratios)
