"""Command-line frontend: forecast, backtest, sweep, verify.

Exit codes: 0 success, 1 usage error, 2 data error (unreadable or unusable
input), 3 numerical failure (no feasible subspace, singular solve, failed
verification).  The environment variable ``SUBSPACE_FORECAST_LOG`` selects
the log level (``quiet``, ``info``, ``debug``); logs go to stderr, results to
stdout.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import math
import os
import sys
from dataclasses import replace

import numpy as np

from .backtest import (
    DEFAULT_M_GRID,
    OBJECTIVE_THEORETICAL,
    OBJECTIVE_VALIDATION,
    SweepConfig,
    emit_report,
    run_backtest,
    select_L,
)
from .covariance_model import CovarianceModel, choose_subspace, empirical_covariance
from .data_pipeline import (
    WindowConfig,
    build_hankel,
    denormalize_forecast,
    load_csv,
    normalize_and_center,
)
from .errors import DataError, InsufficientDataError, NumericalError
from .estimators import (
    METHOD_GB,
    METHOD_RD,
    METHOD_UNC,
    METHODS,
    build_projection,
    fit_gauss_bayes,
    fit_reduced_dimension,
    fit_unconditional,
    predict,
)
from .metrics import bias_decomposition, theoretical_mse, volatility
from .synthetic_oracle import (
    GaussianSpec,
    geometric_spectrum,
    load_gaussian_spec,
    mc_bias,
    random_covariance,
    sample,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERICAL = 3

# below this sample count the verify suite reports values without enforcing
STRICT_N = 10_000

logger = logging.getLogger("subspace_forecast")

_LOG_LEVELS = {"quiet": logging.WARNING, "info": logging.INFO, "debug": logging.DEBUG}


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage problems exit 1, not argparse's 2
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _setup_logging() -> None:
    name = os.environ.get("SUBSPACE_FORECAST_LOG", "info").strip().lower()
    level = _LOG_LEVELS.get(name, logging.INFO)
    logging.basicConfig(
        level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s", force=True
    )


def _log_config(args: argparse.Namespace) -> None:
    resolved = {k: v for k, v in sorted(vars(args).items()) if k != "func"}
    logger.info("resolved config: %s", json.dumps(resolved, default=str, sort_keys=True))


def _parse_seed(token: str) -> int:
    try:
        return int(token)
    except ValueError:
        digest = hashlib.sha256(token.encode("utf-8")).digest()
        return int.from_bytes(digest[:8], "little")


def build_parser() -> _Parser:
    parser = _Parser(prog="subspace-forecast", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    forecast = sub.add_parser("forecast", help="forecast the next H days from the newest window")
    forecast.add_argument("--csv", required=True, help="price CSV (date,close)")
    forecast.add_argument("--m", type=int, required=True, help="observation window length in days")
    forecast.add_argument("--h", "--horizon", dest="horizon", type=int, default=10,
                          help="forecast horizon in days")
    forecast.add_argument("--method", choices=METHODS, default=METHOD_RD)
    forecast.add_argument("--cap", type=float, default=1e4,
                          help="condition-number cap for the subspace search")
    forecast.add_argument("--l", dest="l_override", type=int, default=None,
                          help="pin the subspace size instead of searching under --cap")
    forecast.add_argument("--q-rule", choices=["m"], default="m",
                          help="rule placing the scaling day (only 'm' is implemented)")
    forecast.set_defaults(func=cmd_forecast)

    def add_grid_flags(p, with_m_list):
        p.add_argument("--csv", required=True, help="price CSV (date,close)")
        if with_m_list:
            p.add_argument("--m-list", dest="m_list", type=int, nargs="+",
                           default=list(DEFAULT_M_GRID), help="observation lengths to sweep")
        else:
            p.add_argument("--m", type=int, required=True, help="observation window length")
        p.add_argument("--h", "--horizon", dest="horizon", type=int, default=10)
        p.add_argument("--caps", type=float, nargs="+", default=[1e3, 1e4],
                       help="condition-number caps")
        p.add_argument("--n-test", dest="n_test", type=int, default=2200,
                       help="number of most-recent windows held out for scoring")
        p.add_argument("--objective", choices=[OBJECTIVE_THEORETICAL, OBJECTIVE_VALIDATION],
                       default=OBJECTIVE_THEORETICAL, help="subspace-size selection objective")
        p.add_argument("--q-rule", choices=["m"], default="m")
        p.add_argument("--out", default=None, help="directory for CSV and JSON artifacts")

    backtest = sub.add_parser("backtest", help="score all estimators out-of-sample for one M")
    add_grid_flags(backtest, with_m_list=False)
    backtest.set_defaults(func=cmd_backtest)

    sweep = sub.add_parser("sweep", help="score all estimators over a grid of M values")
    add_grid_flags(sweep, with_m_list=True)
    sweep.set_defaults(func=cmd_sweep)

    verify = sub.add_parser("verify", help="check the closed forms against Monte-Carlo sampling")
    verify.add_argument("--seed", default="0", help="reproducibility token (int or any string)")
    verify.add_argument("--n", type=int, default=100_000, help="Monte-Carlo sample count")
    verify.add_argument("--cov-csv", default=None,
                        help="optional CSV covariance matrix replacing the built-in fixture")
    verify.add_argument("--split", type=int, default=None,
                        help="observation block size for --cov-csv (default: 2/3 of dim)")
    verify.add_argument("--corrupt-coeff", action="store_true",
                        help="zero the conditional-mean coefficients first "
                             "(harness self-test; verification must fail)")
    verify.set_defaults(func=cmd_verify)
    return parser


def cmd_forecast(args: argparse.Namespace) -> int:
    series = load_csv(args.csv)
    m, h = args.m, args.horizon
    config = WindowConfig(N=m + h, M=m)
    k_avail = len(series) - config.N + 1
    if k_avail < 2:
        raise InsufficientDataError(
            f"forecasting with M={m}, H={h} needs {config.N + 1} prices, have {len(series)}"
        )
    data = normalize_and_center(build_hankel(series, config.N, k_avail), config)
    model = empirical_covariance(data)

    if args.method == METHOD_UNC:
        est = fit_unconditional(model)
    elif args.method == METHOD_GB:
        est = fit_gauss_bayes(model)
    else:
        if args.l_override is not None:
            if not 1 <= args.l_override <= model.m:
                raise ValueError(
                    f"--l must be in [1, {model.m}] for M={m} "
                    f"(day {config.Q} is the normalization column)"
                )
            best_l = args.l_override
        else:
            best_l, _ = select_L(model, args.cap)
        est = fit_reduced_dimension(model, build_projection(model, choose_subspace(model, best_l)))

    tail = series.prices[-m:]
    scale = float(tail[config.Q - 1])
    y_centered = np.delete(tail / scale, config.Q - 1) - data.mean[: model.m]
    zhat = predict(est, y_centered)
    prices = denormalize_forecast(zhat, data.mean, scale)
    stds = volatility(est, scale=scale)

    print(f"ticker: {series.ticker}")
    print(f"method: {est.method}   M: {m}   H: {h}   training windows: {k_avail}")
    if est.method == METHOD_RD:
        print(f"L: {est.subspace_dim}")
        print(f"cond_ww: {est.cond:.6e}")
    print(f"{'day':>4}  {'price':>16}  {'std':>16}")
    for day in range(h):
        print(f"{day + 1:>4}  {prices[day]:>16.8f}  {stds[day]:>16.8f}")
    return EXIT_OK


def _sweep_from_args(args: argparse.Namespace, m_values) -> SweepConfig:
    return SweepConfig(
        m_values=tuple(m_values),
        horizon=args.horizon,
        condition_caps=tuple(args.caps),
        n_test=args.n_test,
        objective=args.objective,
        q_rule=args.q_rule,
    )


def _run_grid(args: argparse.Namespace, m_values) -> int:
    series = load_csv(args.csv)
    sweep = _sweep_from_args(args, m_values)
    report = run_backtest(series, sweep)
    for cell in report.cells:
        if cell.skipped:
            print(f"M={cell.M} cap={cell.cap:g}: skipped ({cell.reason})")
            continue
        rd = cell.results[METHOD_RD]
        gb = cell.results.get(METHOD_GB)
        unc = cell.results[METHOD_UNC]
        gb_text = f"{gb.empirical_mse:.6g}" if gb is not None else "n/a"
        print(
            f"M={cell.M} cap={cell.cap:g}: L={cell.best_L}"
            f" cond_yy={cell.cond_yy:.6g} cond_ww={cell.cond_ww:.6g}"
            f" mse[unc]={unc.empirical_mse:.6g} mse[gb]={gb_text}"
            f" mse[rd]={rd.empirical_mse:.6g} dir[rd]={rd.directional.mean_over_days:.4f}"
        )
    if args.out:
        paths = emit_report(report, args.out)
        for path in paths:
            print(f"wrote {path}")
    return EXIT_OK


def cmd_backtest(args: argparse.Namespace) -> int:
    return _run_grid(args, [args.m])


def cmd_sweep(args: argparse.Namespace) -> int:
    return _run_grid(args, args.m_list)


def _verify_checks(seed: int, n: int, corrupt: bool, cov_csv: str | None, split: int | None):
    """Yield (name, value, target, limit_desc, diff, limit) verification rows."""
    if cov_csv is not None:
        spec = load_gaussian_spec(cov_csv, seed)
        cov = spec.true_cov
        dim = spec.dim
        m = split if split is not None else max(1, (2 * dim) // 3)
        if not 1 <= m < dim:
            raise ValueError(f"--split must be in [1, {dim - 1}], got {m}")
    else:
        dim, m = 30, 20
        cov = random_covariance(dim, geometric_spectrum(dim, 1e2), seed)
        spec = GaussianSpec(dim=dim, true_cov=cov, seed=seed)
    h = dim - m
    model = CovarianceModel.from_matrix(cov, m)
    unc = fit_unconditional(model)
    gb = fit_gauss_bayes(model)
    if corrupt:
        gb = replace(gb, coeff=np.zeros_like(gb.coeff))
    l_grid = sorted({l for l in (1, 5, 10, 20) if l <= m} | {m})
    rd = {
        l: fit_reduced_dimension(model, build_projection(model, choose_subspace(model, l)))
        for l in l_grid
    }
    estimators = {"unc": unc, "gb": gb}
    estimators.update({f"rd[L={l}]": rd[l] for l in l_grid})

    rows = []

    def check(name, value, target, tol_desc, limit):
        rows.append((name, value, target, tol_desc, abs(value - target), limit))

    # closed-form MSE against fresh-draw Monte-Carlo, common draws per seed
    x = sample(spec, n)
    y_c = x[:, :m] - spec.true_mean[:m]
    z_c = x[:, m:] - spec.true_mean[m:]
    sq_errors = {}
    for name, est in estimators.items():
        err = z_c - y_c @ est.coeff.T
        sq_errors[name] = np.einsum("ij,ij->i", err, err)
        closed = theoretical_mse(model, est)
        check(f"mse/{name}", float(sq_errors[name].mean()), closed, "5% rel", 0.05 * closed)

    # squared-bias closed forms against the stratified conditional oracle
    b_unc = mc_bias(spec, unc, m, n)
    target = float(np.trace(model.sigma_zz))
    check("bias/unc", b_unc.value, target, "5% rel + 3 se",
          0.05 * target + 3 * b_unc.se)
    for l in l_grid:
        if l == m:
            continue
        b_rd = mc_bias(spec, rd[l], m, n)
        target = bias_decomposition(model, rd[l])[0]
        check(f"bias/rd[L={l}]", b_rd.value, target, "5% rel + 3 se",
              0.05 * target + 3 * b_rd.se)
    # the exactly-conditional forecaster carries the same conditional bias as
    # the full-subspace reduction; checked against that closed form
    b_gb = mc_bias(spec, gb, m, n)
    target = bias_decomposition(model, rd[m])[0]
    check("bias/gb-conditional", b_gb.value, target, "5% rel + 3 se",
          0.05 * target + 3 * b_gb.se)

    # optimality ordering on common draws, pairwise differences
    for l in l_grid:
        d = sq_errors[f"rd[L={l}]"] - sq_errors["gb"]
        se = float(d.std(ddof=1) / math.sqrt(n))
        check(f"order/gb<=rd[L={l}]", min(float(d.mean()), 0.0), 0.0, "3 se", 3 * se)
        d = sq_errors["unc"] - sq_errors[f"rd[L={l}]"]
        se = float(d.std(ddof=1) / math.sqrt(n))
        check(f"order/rd[L={l}]<=unc", min(float(d.mean()), 0.0), 0.0, "3 se", 3 * se)

    # full-subspace reduction must reproduce the conditional-mean estimator
    gb_clean = fit_gauss_bayes(model)
    coeff_scale = float(np.abs(gb_clean.coeff).max())
    post_scale = float(np.abs(gb_clean.posterior_cov).max())
    diff = max(
        float(np.abs(rd[m].coeff - gb_clean.coeff).max()) / coeff_scale,
        float(np.abs(rd[m].posterior_cov - gb_clean.posterior_cov).max()) / post_scale,
    )
    check("collapse/rd[L=m]==gb", diff, 0.0, "1e-6 rel", 1e-6)
    return rows


def cmd_verify(args: argparse.Namespace) -> int:
    seed = _parse_seed(args.seed)
    rows = _verify_checks(seed, args.n, args.corrupt_coeff, args.cov_csv, args.split)
    advisory = args.n < STRICT_N
    if advisory:
        print(
            f"ADVISORY: n={args.n} is below {STRICT_N}; insufficient samples, "
            "values reported but tolerances not enforced"
        )
    failures = 0
    for name, value, target, tol_desc, diff, limit in rows:
        ok = diff <= limit
        if advisory:
            status = "ADVISORY"
        else:
            status = "PASS" if ok else "FAIL"
            failures += 0 if ok else 1
        print(
            f"[{status}] {name}: value={value:.8g} target={target:.8g} "
            f"tol={tol_desc} |diff|={diff:.3g} limit={limit:.3g}"
        )
    print(f"verify: {len(rows)} checks, {failures} failures (seed={seed}, n={args.n})")
    return EXIT_OK if failures == 0 else EXIT_NUMERICAL


def main(argv: list[str] | None = None) -> int:
    _setup_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    _log_config(args)
    try:
        return args.func(args)
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
