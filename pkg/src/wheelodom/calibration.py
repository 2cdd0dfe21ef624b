"""Grid-search calibration of wheel baseline ``L`` and radius ``R``.

Every ``(L, R)`` pair of a uniform grid (endpoints inclusive) is scored by
the mean relative error between predicted and tape-measured travel over a
set of experiments.  Straight runs are scored by path length, circle runs
by the diameter of a least-squares circle fit.  Path length does not
depend on ``L``, so at least one circle run is needed to pin ``L`` down.
"""
from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from pathlib import Path

import numpy as np

from .errors import EmptyInputError, ValidationError
from .odometry import (
    DEFAULT_COUNTS_PER_REV,
    WheelParams,
    fit_circle,
    integrate_deltas,
    relative_error,
    ticks_to_travel,
)
from .protocol import read_ticks_file
from .ticklog import EXPERIMENT_KINDS, TickLog, read_manifest, read_ticklog_csv

STRAIGHT_KINDS = ("forward", "backward")


class IdentifiabilityWarning(UserWarning):
    """The experiment set cannot constrain one of the calibrated parameters."""


@dataclass(frozen=True, eq=False)
class ExperimentRecord:
    kind: str
    gt_value_m: float
    log: TickLog
    name: str = ""

    def __post_init__(self):
        if self.kind not in EXPERIMENT_KINDS:
            raise ValidationError(f"unknown experiment kind {self.kind!r}")
        if not (math.isfinite(self.gt_value_m) and self.gt_value_m > 0):
            raise ValidationError(f"ground truth must be > 0, got {self.gt_value_m!r}")
        if len(self.log) == 0:
            raise EmptyInputError(f"experiment {self.name or self.kind!r} has an empty log")


@dataclass(frozen=True)
class GridSpec:
    l_range: tuple = (0.6, 0.8)
    r_range: tuple = (0.15, 0.17)
    n_per_axis: int = 50

    def __post_init__(self):
        for name in ("l_range", "r_range"):
            lo, hi = (float(v) for v in getattr(self, name))
            if not (0 < lo < hi and math.isfinite(hi)):
                raise ValidationError(f"{name} must satisfy 0 < min < max, got ({lo}, {hi})")
            object.__setattr__(self, name, (lo, hi))
        n = self.n_per_axis
        if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or n < 2:
            raise ValidationError(f"n_per_axis must be an integer >= 2, got {n!r}")
        object.__setattr__(self, "n_per_axis", int(n))

    @property
    def l_values(self):
        return np.linspace(*self.l_range, self.n_per_axis)

    @property
    def r_values(self):
        return np.linspace(*self.r_range, self.n_per_axis)

    @property
    def l_step(self):
        return (self.l_range[1] - self.l_range[0]) / (self.n_per_axis - 1)

    @property
    def r_step(self):
        return (self.r_range[1] - self.r_range[0]) / (self.n_per_axis - 1)


@dataclass(frozen=True)
class ExperimentError:
    kind: str
    gt_value_m: float
    predicted_m: float
    relative_error: float
    name: str = ""


@dataclass(frozen=True, eq=False)
class CalibrationResult:
    best_params: WheelParams
    objective_value: float
    per_experiment: tuple
    grid: GridSpec
    full_grid: np.ndarray | None = None

    def __eq__(self, other):
        if not isinstance(other, CalibrationResult):
            return NotImplemented
        grids_equal = (
            (self.full_grid is None and other.full_grid is None)
            or (self.full_grid is not None and other.full_grid is not None
                and np.array_equal(self.full_grid, other.full_grid))
        )
        return (
            self.best_params == other.best_params
            and self.objective_value == other.objective_value
            and self.per_experiment == other.per_experiment
            and self.grid == other.grid
            and grids_equal
        )


def _wheel_deltas(log: TickLog):
    return np.diff(log.left), np.diff(log.right)


def _predict(kind, dticks_left, dticks_right, params: WheelParams):
    d_l = ticks_to_travel(dticks_left, params)
    d_r = ticks_to_travel(dticks_right, params)
    if kind in STRAIGHT_KINDS:
        # path length of the integrated trajectory; no pose needed
        return math.fsum(np.abs((d_l + d_r) / 2.0))
    poses, _ = integrate_deltas(d_l, d_r, params)
    return 2.0 * fit_circle(poses[:, :2])[1]


def predict_experiment(params: WheelParams, exp: ExperimentRecord) -> float:
    """Odometry estimate comparable to the experiment's ground truth, in metres."""
    return _predict(exp.kind, *_wheel_deltas(exp.log), params)


def _objective(errors):
    # fsum is correctly rounded, so the mean does not depend on experiment order
    return math.fsum(errors) / len(errors)


def _score_row(prepared, l_value, r_values, counts_per_rev):
    row = np.empty(len(r_values))
    for j, r in enumerate(r_values):
        p = WheelParams(float(l_value), float(r), counts_per_rev)
        row[j] = _objective([
            relative_error(_predict(kind, dl, dr, p), gt) for kind, gt, dl, dr in prepared
        ])
    return row


def evaluate_grid(experiments, grid: GridSpec, counts_per_rev=DEFAULT_COUNTS_PER_REV, workers=1):
    """Objective surface of shape ``(n_L, n_R)``; rows are independent work units."""
    prepared = [(e.kind, e.gt_value_m, *_wheel_deltas(e.log)) for e in experiments]
    l_values, r_values = grid.l_values, grid.r_values
    if workers is None or workers <= 1:
        rows = [_score_row(prepared, l, r_values, counts_per_rev) for l in l_values]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(lambda l: _score_row(prepared, l, r_values, counts_per_rev), l_values))
    return np.vstack(rows)


def _argmin_lexicographic(surface):
    """Index of the minimum; ties go to the smallest L, then the smallest R."""
    if np.all(np.isnan(surface)):
        raise ValidationError("objective is undefined everywhere on the grid")
    flat = np.where(np.isnan(surface), np.inf, surface).ravel()
    return np.unravel_index(int(np.argmin(flat)), surface.shape)


def error_rows(params: WheelParams, experiments):
    rows = []
    for e in experiments:
        predicted = predict_experiment(params, e)
        rows.append(ExperimentError(e.kind, e.gt_value_m, predicted,
                                    relative_error(predicted, e.gt_value_m), e.name))
    return tuple(rows)


def grid_search(experiments, grid: GridSpec = GridSpec(), counts_per_rev=DEFAULT_COUNTS_PER_REV,
                workers=1, keep_grid=False, refine=False) -> CalibrationResult:
    """Exhaustive search for the ``(L, R)`` grid point with least mean relative error.

    Parameters
    ----------
    experiments : sequence of ExperimentRecord
    grid : GridSpec
        Defaults to L in [0.6, 0.8], R in [0.15, 0.17], 50 values each.
    workers : int
        Threads used to score grid rows. The result does not depend on it.
    keep_grid : bool
        Attach the full objective surface to the result.
    refine : bool
        Run a second pass of the same size spanning one grid step either
        side of the first optimum.
    """
    experiments = list(experiments)
    if not experiments:
        raise EmptyInputError("grid search needs at least one experiment")
    if not any(e.kind == "circle" for e in experiments):
        warnings.warn(
            "no circle experiment: straight runs do not depend on the wheel base, "
            "so L is not identifiable and falls back to the smallest grid value",
            IdentifiabilityWarning,
            stacklevel=2,
        )
    surface = evaluate_grid(experiments, grid, counts_per_rev, workers)
    i, j = _argmin_lexicographic(surface)
    best_l, best_r = grid.l_values[i], grid.r_values[j]

    if refine:
        lo_l = max(best_l - grid.l_step, np.finfo(float).tiny)
        lo_r = max(best_r - grid.r_step, np.finfo(float).tiny)
        grid = GridSpec((lo_l, best_l + grid.l_step), (lo_r, best_r + grid.r_step), grid.n_per_axis)
        surface = evaluate_grid(experiments, grid, counts_per_rev, workers)
        i, j = _argmin_lexicographic(surface)
        best_l, best_r = grid.l_values[i], grid.r_values[j]

    best = WheelParams(float(best_l), float(best_r), counts_per_rev)
    per_exp = error_rows(best, experiments)
    return CalibrationResult(
        best_params=best,
        objective_value=_objective([row.relative_error for row in per_exp]),
        per_experiment=per_exp,
        grid=grid,
        full_grid=surface if keep_grid else None,
    )


def format_percent(fraction) -> str:
    """Render a fraction as a percentage with two decimals, rounding half up."""
    pct = Decimal(repr(float(fraction))) * 100
    return f"{pct.quantize(Decimal('0.01'), rounding=ROUND_HALF_UP)}%"


@dataclass(frozen=True)
class ErrorReport:
    params: WheelParams
    rows: tuple
    mean_error: float = field(default=0.0)


def error_report(params: WheelParams, experiments) -> ErrorReport:
    rows = error_rows(params, list(experiments))
    return ErrorReport(params, rows, _objective([r.relative_error for r in rows]))


def _column_label(params):
    return f"L={params.wheel_base_m:.4f} R={params.wheel_radius_m:.4f}"


def render_text(reports, title_rows=()) -> str:
    """Aligned table: one row per experiment, one ``value (err)`` column per report.

    All reports must cover the same experiments in the same order.
    """
    reports = list(reports)
    if not reports:
        return ""
    base = reports[0].rows
    header = ["", "GT"] + [_column_label(r.params) for r in reports]
    body = []
    for k, row in enumerate(base):
        cells = [row.name or row.kind, f"{row.gt_value_m:.2f} m"]
        for r in reports:
            rr = r.rows[k]
            cells.append(f"{rr.predicted_m:.2f} m ({format_percent(rr.relative_error)})")
        body.append(cells)
    body.append(["mean", ""] + [f"({format_percent(r.mean_error)})" for r in reports])
    widths = [max(len(line[c]) for line in [header] + body) for c in range(len(header))]
    lines = list(title_rows)
    fmt_row = lambda cells: "  ".join(
        c.ljust(w) if i == 0 else c.rjust(w) for i, (c, w) in enumerate(zip(cells, widths))
    ).rstrip()
    lines.append(fmt_row(header))
    lines.append("  ".join("-" * w for w in widths))
    lines.extend(fmt_row(b) for b in body)
    return "\n".join(lines) + "\n"


REPORT_CSV_HEADER = ("column", "wheel_base_m", "wheel_radius_m", "experiment", "kind",
                     "gt_value_m", "predicted_m", "relative_error", "error_pct")


def render_csv(reports, labels) -> str:
    lines = [",".join(REPORT_CSV_HEADER)]
    for label, rep in zip(labels, reports):
        p = rep.params
        for k, row in enumerate(rep.rows):
            lines.append(",".join([
                label, repr(p.wheel_base_m), repr(p.wheel_radius_m), row.name or str(k), row.kind,
                repr(row.gt_value_m), repr(row.predicted_m), repr(row.relative_error),
                format_percent(row.relative_error).rstrip("%"),
            ]))
        lines.append(",".join([
            label, repr(p.wheel_base_m), repr(p.wheel_radius_m), "mean", "", "", "",
            repr(rep.mean_error), format_percent(rep.mean_error).rstrip("%"),
        ]))
    return "\n".join(lines) + "\n"


def write_grid_csv(result: CalibrationResult, path) -> None:
    """Objective surface as ``L,R,objective`` rows, L-major."""
    if result.full_grid is None:
        raise ValidationError("result carries no objective surface (run with keep_grid=True)")
    with open(path, "w", newline="") as fh:
        fh.write("L,R,objective\n")
        for i, l in enumerate(result.grid.l_values):
            for j, r in enumerate(result.grid.r_values):
                fh.write(f"{float(l)!r},{float(r)!r},{float(result.full_grid[i, j])!r}\n")


def load_log(path) -> TickLog:
    """Read a tick log from CSV, or from binary frames when the suffix is ``.ticks``."""
    path = Path(path)
    if path.suffix == ".ticks":
        return read_ticks_file(path)[0]
    return read_ticklog_csv(path)


def load_experiments(manifest_path) -> list[ExperimentRecord]:
    return [
        ExperimentRecord(e.kind, e.gt_value_m, load_log(e.log_path), name=e.log_path.stem)
        for e in read_manifest(manifest_path)
    ]
