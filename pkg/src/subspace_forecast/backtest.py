"""Grid experiments over observation length and condition cap.

For every requested observation length ``M`` the full price history is cut
into windows, split chronologically into train and test rows, and all three
estimators are fitted on the training covariance.  For every condition cap
the reduced-dimension subspace size is chosen by scanning ``L = 1..m``,
keeping the sizes whose filtered covariance stays below the cap, and taking
the one minimizing the selection objective (closed-form reduced-dimension
MSE by default, held-out validation MSE optionally).

Results are collected per (M, cap) cell and can be serialized as a fixed set
of CSV files plus a ``summary.json``; identical inputs produce byte-identical
output.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import metrics
from .covariance_model import (
    CovarianceModel,
    choose_subspace,
    condition_number,
    empirical_covariance,
)
from .data_pipeline import (
    DataMatrix,
    PriceSeries,
    WindowConfig,
    build_hankel,
    normalize_and_center,
    split_train_test,
)
from .errors import IllConditionedError, NoFeasibleSubspaceError
from .estimators import (
    METHOD_GB,
    METHOD_RD,
    METHOD_UNC,
    Estimator,
    build_projection,
    fit_gauss_bayes,
    fit_reduced_dimension,
    fit_unconditional,
)
from .metrics import DirectionalReport

__all__ = [
    "OBJECTIVE_THEORETICAL",
    "OBJECTIVE_VALIDATION",
    "DEFAULT_M_GRID",
    "SweepConfig",
    "LCurvePoint",
    "SubspaceSelection",
    "MethodResult",
    "CellReport",
    "BacktestReport",
    "build_l_curve",
    "select_L",
    "run_backtest",
    "emit_report",
]

OBJECTIVE_THEORETICAL = "theoretical_rd_mse"
OBJECTIVE_VALIDATION = "validation_mse"

# Default observation-length grid: 20 through 440 in steps of 30.
DEFAULT_M_GRID = tuple(range(20, 441, 30))

CSV_FILES = (
    "mse_vs_L.csv",
    "best_mse.csv",
    "condition.csv",
    "directional.csv",
    "volatility.csv",
)


@dataclass(frozen=True)
class SweepConfig:
    """Grid specification for a backtest run."""

    m_values: tuple[int, ...]
    horizon: int = 10
    condition_caps: tuple[float, ...] = (1e3, 1e4)
    n_test: int = 2200
    objective: str = OBJECTIVE_THEORETICAL
    q_rule: str = "m"

    def __post_init__(self):
        object.__setattr__(self, "m_values", tuple(int(m) for m in self.m_values))
        object.__setattr__(
            self, "condition_caps", tuple(float(c) for c in self.condition_caps)
        )
        if not self.m_values:
            raise ValueError("m_values must not be empty")
        if any(m < 2 for m in self.m_values):
            raise ValueError("every observation length must be >= 2")
        if self.horizon < 1:
            raise ValueError(f"horizon must be >= 1, got {self.horizon}")
        if not self.condition_caps or any(c < 1 for c in self.condition_caps):
            raise ValueError("condition caps must be >= 1")
        if self.n_test < 1:
            raise ValueError(f"n_test must be >= 1, got {self.n_test}")
        if self.objective not in (OBJECTIVE_THEORETICAL, OBJECTIVE_VALIDATION):
            raise ValueError(f"unknown objective {self.objective!r}")
        if self.q_rule != "m":
            raise ValueError(f"unknown q_rule {self.q_rule!r}")

    def to_dict(self) -> dict:
        return {
            "m_values": list(self.m_values),
            "horizon": self.horizon,
            "condition_caps": list(self.condition_caps),
            "n_test": self.n_test,
            "objective": self.objective,
            "q_rule": self.q_rule,
        }


@dataclass(frozen=True)
class LCurvePoint:
    """One point of the subspace-size scan for a fixed M."""

    L: int
    cond_ww: float
    mse_rd: float


@dataclass(frozen=True)
class SubspaceSelection:
    """Outcome of one constrained subspace-size selection."""

    L: int
    cond_ww: float
    objective_value: float
    min_cond: float


@dataclass
class MethodResult:
    """Everything measured for one estimator in one grid cell."""

    method: str
    theoretical_mse: float
    bias_sq: float
    variance: float
    empirical_mse: float
    empirical_mse_per_day: np.ndarray
    empirical_mse_price: float
    directional: DirectionalReport
    volatility: np.ndarray
    cond: float | None = None
    subspace_dim: int | None = None

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "theoretical_mse": self.theoretical_mse,
            "bias_sq": self.bias_sq,
            "variance": self.variance,
            "empirical_mse": self.empirical_mse,
            "empirical_mse_per_day": [float(v) for v in self.empirical_mse_per_day],
            "empirical_mse_price": self.empirical_mse_price,
            "directional_per_day": [float(v) for v in self.directional.per_day],
            "directional_mean": self.directional.mean_over_days,
            "volatility": [float(v) for v in self.volatility],
            "cond": self.cond,
            "subspace_dim": self.subspace_dim,
        }


@dataclass
class CellReport:
    """One (M, cap) cell of the grid; ``skipped`` cells carry only a reason."""

    M: int
    cap: float
    skipped: bool = False
    reason: str | None = None
    best_L: int | None = None
    cond_yy: float | None = None
    cond_ww: float | None = None
    gb_error: str | None = None
    results: dict[str, MethodResult] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "M": self.M,
            "cap": self.cap,
            "skipped": self.skipped,
            "reason": self.reason,
            "best_L": self.best_L,
            "cond_yy": self.cond_yy,
            "cond_ww": self.cond_ww,
            "gb_error": self.gb_error,
            "results": {k: v.to_dict() for k, v in self.results.items()},
        }


@dataclass
class BacktestReport:
    """All cells of one run plus the subspace-size scan for each M."""

    sweep: SweepConfig
    cells: list[CellReport]
    l_curves: dict[int, list[LCurvePoint]]

    def to_dict(self) -> dict:
        return {
            "config": self.sweep.to_dict(),
            "cells": [c.to_dict() for c in self.cells],
            "l_curves": {
                str(m): [[p.L, p.cond_ww, p.mse_rd] for p in curve]
                for m, curve in sorted(self.l_curves.items())
            },
        }


def build_l_curve(model: CovarianceModel) -> list[LCurvePoint]:
    """Condition number and closed-form MSE of the reduced-dimension
    estimator for every subspace size ``L = 1..m``."""
    points = []
    for l_size in range(1, model.m + 1):
        try:
            proj = build_projection(model, choose_subspace(model, l_size))
            est = fit_reduced_dimension(model, proj)
            points.append(
                LCurvePoint(
                    L=l_size, cond_ww=est.cond, mse_rd=metrics.theoretical_mse(model, est)
                )
            )
        except IllConditionedError:
            points.append(LCurvePoint(L=l_size, cond_ww=float("inf"), mse_rd=float("inf")))
    return points


def select_L(
    model: CovarianceModel,
    cap: float,
    objective: str = OBJECTIVE_THEORETICAL,
    curve: list[LCurvePoint] | None = None,
    val_y: np.ndarray | None = None,
    val_z: np.ndarray | None = None,
) -> tuple[int, SubspaceSelection]:
    """Smallest-L minimizer of the objective among sizes obeying the cap.

    The scan runs over ``L = 1..m`` in order, so exact objective ties resolve
    toward the smaller subspace.  Raises :class:`NoFeasibleSubspaceError`
    (carrying the minimum achievable condition number) when no size
    satisfies the cap.
    """
    if objective not in (OBJECTIVE_THEORETICAL, OBJECTIVE_VALIDATION):
        raise ValueError(f"unknown objective {objective!r}")
    if objective == OBJECTIVE_VALIDATION and (val_y is None or val_z is None):
        raise ValueError("validation objective needs val_y and val_z")
    if curve is None:
        curve = build_l_curve(model)
    min_cond = min(p.cond_ww for p in curve)
    feasible = [p for p in curve if p.cond_ww <= cap]
    if not feasible:
        raise NoFeasibleSubspaceError(
            f"no subspace size in [1, {model.m}] keeps cond(sigma_ww) <= {cap:g}; "
            f"minimum achievable is {min_cond:g}",
            min_condition_number=min_cond,
        )
    best = None
    best_value = float("inf")
    for point in feasible:
        if objective == OBJECTIVE_THEORETICAL:
            value = point.mse_rd
        else:
            est = fit_reduced_dimension(
                model, build_projection(model, choose_subspace(model, point.L))
            )
            value = metrics.empirical_mse(val_y @ est.coeff.T, val_z).total
        if value < best_value:
            best, best_value = point, value
    return best.L, SubspaceSelection(
        L=best.L, cond_ww=best.cond_ww, objective_value=best_value, min_cond=min_cond
    )


def _evaluate_method(
    model: CovarianceModel, est: Estimator, test: DataMatrix
) -> MethodResult:
    """Score one fitted estimator on the test rows of one grid cell."""
    y_test = test.y_block
    z_test = test.z_block
    mean_tail = test.mean[test.split_m :]
    scales = test.scales[:, None]
    preds = y_test @ est.coeff.T
    emp = metrics.empirical_mse(preds, z_test)
    pred_prices = (preds + mean_tail) * scales
    actual_prices = (z_test + mean_tail) * scales
    emp_price = metrics.empirical_mse(pred_prices, actual_prices)
    directional = metrics.directional_statistic(pred_prices, actual_prices, test.scales)
    try:
        bias_sq, variance = metrics.bias_decomposition(model, est)
    except IllConditionedError:
        bias_sq, variance = float("nan"), float("nan")
    return MethodResult(
        method=est.method,
        theoretical_mse=metrics.theoretical_mse(model, est),
        bias_sq=bias_sq,
        variance=variance,
        empirical_mse=emp.total,
        empirical_mse_per_day=emp.per_day,
        empirical_mse_price=emp_price.total,
        directional=directional,
        volatility=metrics.volatility(est),
        cond=est.cond,
        subspace_dim=est.subspace_dim,
    )


def run_backtest(series: PriceSeries, sweep: SweepConfig) -> BacktestReport:
    """Fit and score all three estimators over the (M, cap) grid.

    Cells that cannot run (series too short for the window count, or no
    feasible subspace under the cap) are recorded as skipped with a reason;
    the run continues.  The computation is deterministic in (series, sweep).
    """
    cells: list[CellReport] = []
    curves: dict[int, list[LCurvePoint]] = {}
    for m_days in sweep.m_values:
        n = m_days + sweep.horizon
        k_avail = len(series) - n + 1
        if k_avail < sweep.n_test + 2:
            reason = (
                f"needs at least {sweep.n_test + 2} windows of {n} days, "
                f"series provides {max(k_avail, 0)}"
            )
            for cap in sweep.condition_caps:
                cells.append(CellReport(M=m_days, cap=cap, skipped=True, reason=reason))
            continue
        config = WindowConfig(N=n, M=m_days)
        data = normalize_and_center(build_hankel(series, n, k_avail), config)
        train, test = split_train_test(data, sweep.n_test)
        model = empirical_covariance(train)
        cond_yy = condition_number(model.sigma_yy)
        curve = build_l_curve(model)
        curves[m_days] = curve

        sel_model, sel_curve, val_y, val_z = model, curve, None, None
        if sweep.objective == OBJECTIVE_VALIDATION:
            n_val = max(1, train.n_samples // 5)
            sub_train, val = split_train_test(train, n_val)
            sel_model = empirical_covariance(sub_train)
            sel_curve = build_l_curve(sel_model)
            val_y, val_z = val.y_block, val.z_block

        unc_result = _evaluate_method(model, fit_unconditional(model), test)
        gb_result, gb_error = None, None
        try:
            gb_result = _evaluate_method(model, fit_gauss_bayes(model), test)
        except IllConditionedError as exc:
            gb_error = str(exc)

        for cap in sweep.condition_caps:
            cell = CellReport(M=m_days, cap=cap, cond_yy=cond_yy, gb_error=gb_error)
            try:
                best_l, _ = select_L(
                    sel_model,
                    cap,
                    sweep.objective,
                    curve=sel_curve,
                    val_y=val_y,
                    val_z=val_z,
                )
                if curve[best_l - 1].cond_ww > cap:
                    # validation pick infeasible on the full-train model
                    best_l, _ = select_L(model, cap, curve=curve)
                rd = fit_reduced_dimension(
                    model, build_projection(model, choose_subspace(model, best_l))
                )
            except NoFeasibleSubspaceError as exc:
                cell.skipped = True
                cell.reason = str(exc)
                cells.append(cell)
                continue
            cell.best_L = best_l
            cell.cond_ww = rd.cond
            cell.results[METHOD_UNC] = unc_result
            if gb_result is not None:
                cell.results[METHOD_GB] = gb_result
            cell.results[METHOD_RD] = _evaluate_method(model, rd, test)
            cells.append(cell)
    return BacktestReport(sweep=sweep, cells=cells, l_curves=curves)


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_csv(path: Path, header: tuple[str, ...], rows) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def emit_report(report: BacktestReport, out_dir: str) -> list[Path]:
    """Serialize a report: five CSV families plus ``summary.json``.

    Column names are stable for downstream plotting; floats are written at
    full round-trip precision.  Skipped cells appear only in the JSON.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    active = [c for c in report.cells if not c.skipped]

    rows = [
        (m, p.L, p.cond_ww, p.mse_rd)
        for m, curve in sorted(report.l_curves.items())
        for p in curve
    ]
    _write_csv(out / "mse_vs_L.csv", ("M", "L", "cond_ww", "mse_rd"), rows)

    def _total(cell: CellReport, method: str) -> float:
        result = cell.results.get(method)
        return result.empirical_mse if result is not None else float("nan")

    _write_csv(
        out / "best_mse.csv",
        ("M", "cap", "best_L", "mse_unc", "mse_gb", "mse_rd"),
        (
            (c.M, c.cap, c.best_L, _total(c, METHOD_UNC), _total(c, METHOD_GB), _total(c, METHOD_RD))
            for c in active
        ),
    )

    _write_csv(
        out / "condition.csv",
        ("M", "cond_yy", "cond_ww"),
        ((c.M, c.cond_yy, c.cond_ww) for c in active),
    )

    directional_rows = []
    volatility_rows = []
    for cell in active:
        for method in (METHOD_UNC, METHOD_GB, METHOD_RD):
            result = cell.results.get(method)
            if result is None:
                continue
            for day in range(result.directional.per_day.shape[0]):
                directional_rows.append(
                    (cell.M, cell.cap, method, day + 1, float(result.directional.per_day[day]))
                )
                volatility_rows.append(
                    (cell.M, cell.cap, method, day + 1, float(result.volatility[day]))
                )
    _write_csv(out / "directional.csv", ("M", "cap", "method", "day", "D_j"), directional_rows)
    _write_csv(out / "volatility.csv", ("M", "cap", "method", "day", "std"), volatility_rows)

    summary = out / "summary.json"
    with open(summary, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(report.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return [out / name for name in CSV_FILES] + [summary]
