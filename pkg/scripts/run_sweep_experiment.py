#!/usr/bin/env python3
"""Sweep window lengths on a price CSV and summarize what conditioning buys.

Runs the three estimators over a grid of observation lengths, then prints a
table comparing forecast error and day-1 directional hit rate, plus the
condition-number improvement from projecting onto the leading subspace.

Example (synthetic end to end):
  python3 scripts/make_synthetic_prices.py --kind smooth --out /tmp/s.csv
  python3 scripts/run_sweep_experiment.py --csv /tmp/s.csv \
      --m 20 50 80 --caps 1e3 1e4 --n-test 200 --out /tmp/sweep_report
"""

import argparse

from subspace_forecast import SweepConfig, emit_report, load_csv, run_backtest


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--csv", required=True)
    ap.add_argument("--m", type=int, nargs="+", default=[20, 50, 80])
    ap.add_argument("--h", type=int, default=10)
    ap.add_argument("--caps", type=float, nargs="+", default=[1e3, 1e4])
    ap.add_argument("--n-test", type=int, default=200)
    ap.add_argument("--objective", default="theoretical_rd_mse",
                    choices=("theoretical_rd_mse", "validation_mse"))
    ap.add_argument("--out", default=None, help="directory for the CSV/JSON report")
    args = ap.parse_args()

    series = load_csv(args.csv)
    sweep = SweepConfig(
        m_values=tuple(args.m),
        horizon=args.h,
        condition_caps=tuple(args.caps),
        n_test=args.n_test,
        objective=args.objective,
    )
    report = run_backtest(series, sweep)

    header = (
        f"{'M':>4} {'cap':>8} {'L':>3} {'cond_yy':>10} {'cond_ww':>10} "
        f"{'mse_unc':>11} {'mse_gb':>11} {'mse_rd':>11} {'dir1_rd':>8}"
    )
    print(header)
    print("-" * len(header))
    for cell in report.cells:
        if cell.skipped:
            print(f"{cell.M:>4} {cell.cap:>8.0e}  skipped: {cell.reason}")
            continue
        unc = cell.results["unc"]
        gb = cell.results.get("gb")
        rd = cell.results["rd"]
        print(
            f"{cell.M:>4} {cell.cap:>8.0e} {cell.best_L:>3} "
            f"{cell.cond_yy:>10.3e} {cell.cond_ww:>10.3e} "
            f"{unc.empirical_mse:>11.4e} "
            f"{(gb.empirical_mse if gb else float('nan')):>11.4e} "
            f"{rd.empirical_mse:>11.4e} "
            f"{rd.directional.per_day[0]:>8.3f}"
        )

    if args.out:
        paths = emit_report(report, args.out)
        print(f"\nreport written to {args.out} ({len(paths)} files)")


if __name__ == "__main__":
    main()
