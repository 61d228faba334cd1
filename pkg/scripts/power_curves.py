"""Rejection-rate curves along the signal-strength grid.

Sparse alternatives: a handful of intercepts at magnitude governed by
the strength constant c, so the curves trace each test's power as the
signal grows. One CSV row per grid point.

Usage:
    python3 scripts/power_curves.py --strengths 2:20:2 --reps 300
"""

import argparse
import csv
import sys

from alphasign.dgp import AlphaSpec, ErrorScenario
from alphasign.harness import TEST_NAMES, ExperimentConfig, run_experiment


def parse_grid(text):
    # "2:20:2" inclusive range, or an explicit comma list "2,4,8".
    if ":" in text:
        start, stop, step = (float(x) for x in text.split(":"))
        out = []
        c = start
        while c <= stop + 1e-9:
            out.append(c)
            c += step
        return out
    return [float(x) for x in text.split(",")]


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--example", type=int, default=1)
    parser.add_argument("--scenario", default="t")
    parser.add_argument("--N", type=int, default=400)
    parser.add_argument("--T", type=int, default=350)
    parser.add_argument("--sparsity", type=int, default=2)
    parser.add_argument("--strengths", default="2:20:2")
    parser.add_argument("--reps", type=int, default=300)
    parser.add_argument("--seed", type=int, default=20260816)
    parser.add_argument("--gamma", type=float, default=0.05)
    parser.add_argument("--knots", default="auto")
    parser.add_argument("--out", default="-", help="output CSV path, - for stdout")
    args = parser.parse_args(argv)

    stream = sys.stdout if args.out == "-" else open(args.out, "w", newline="")
    writer = csv.writer(stream)
    writer.writerow(["strength", "sparsity", "reps", "failures"] + list(TEST_NAMES))
    try:
        for c in parse_grid(args.strengths):
            config = ExperimentConfig(
                example=args.example,
                scenario=ErrorScenario(args.scenario),
                N=args.N,
                T=args.T,
                reps=args.reps,
                seed=args.seed,
                gamma=args.gamma,
                alpha_spec=AlphaSpec(sparsity=args.sparsity, strength=c),
                knots=args.knots if args.knots == "auto" else int(args.knots),
                keep_pvalues=False,
            )
            report = run_experiment(config)
            writer.writerow(
                [f"{c:g}", args.sparsity, args.reps, report.failures]
                + [f"{report.rejection_rates[t]:.4f}" for t in TEST_NAMES]
            )
            stream.flush()
            print(f"done c={c:g} ({report.wall_time:.1f}s)", file=sys.stderr)
    finally:
        if stream is not sys.stdout:
            stream.close()
    return 0


if __name__ == "__main__":
    sys.exit(main())
