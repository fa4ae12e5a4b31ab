#!/usr/bin/env python3
"""Generate synthetic daily close CSVs for experiments.

Two flavors:
  gbm     geometric Brownian motion -- well conditioned, the default
  smooth  slow trends + AR(1)-filtered walk -- windows are nearly collinear,
          so the observation covariance is badly conditioned (good for
          exercising the subspace cap)

Example:
  python3 scripts/make_synthetic_prices.py --kind smooth --days 3000 \
      --seed 42 --out data/smooth_3000.csv
"""

import argparse
from datetime import date, timedelta
from pathlib import Path

import numpy as np


def gbm(n, seed, mu=2e-4, sigma=0.015, start=100.0):
    rng = np.random.default_rng(seed)
    steps = mu + sigma * rng.standard_normal(n - 1)
    return start * np.exp(np.concatenate([[0.0], np.cumsum(steps)]))


def smooth(n, seed, sigma=0.004, rho=0.9, start=100.0):
    rng = np.random.default_rng(seed)
    t = np.arange(n)
    log_trend = (
        0.00025 * t
        + 0.10 * np.sin(2 * np.pi * t / 750)
        + 0.04 * np.sin(2 * np.pi * t / 180)
    )
    eps = rng.standard_normal(n)
    ar = np.empty(n)
    ar[0] = eps[0]
    for i in range(1, n):
        ar[i] = rho * ar[i - 1] + eps[i]
    return start * np.exp(log_trend + np.cumsum(sigma * ar * np.sqrt(1 - rho**2)))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--kind", choices=("gbm", "smooth"), default="gbm")
    ap.add_argument("--days", type=int, default=3000)
    ap.add_argument("--seed", type=int, default=42)
    ap.add_argument("--sigma", type=float, default=None,
                    help="daily volatility (default 0.015 gbm / 0.004 smooth)")
    ap.add_argument("--start", type=float, default=100.0)
    ap.add_argument("--out", required=True)
    args = ap.parse_args()

    kwargs = {"start": args.start}
    if args.sigma is not None:
        kwargs["sigma"] = args.sigma
    prices = (gbm if args.kind == "gbm" else smooth)(args.days, args.seed, **kwargs)

    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    d0 = date(2000, 1, 3)
    with out.open("w") as fh:
        fh.write("date,close\n")
        for i, p in enumerate(prices):
            fh.write(f"{(d0 + timedelta(days=i)).isoformat()},{float(p)!r}\n")
    print(f"wrote {args.days} {args.kind} closes to {out}")


if __name__ == "__main__":
    main()
