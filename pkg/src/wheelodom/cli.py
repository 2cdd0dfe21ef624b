"""``wheelodom`` command line.

Subcommands: ``simulate``, ``integrate``, ``calibrate``, ``decode``, ``parse``.
Exit codes: 0 success, 1 usage, 2 input parse or unreadable file,
3 validation or numeric failure.  Flag values override ``--config`` file
values, which override built-in defaults.
"""
from __future__ import annotations

import argparse
import hashlib
import sys
import warnings
from pathlib import Path

from . import __version__
from .calibration import (
    GridSpec,
    error_report,
    grid_search,
    load_experiments,
    load_log,
    render_csv,
    render_text,
    write_grid_csv,
)
from .config import read_keyvalue
from .errors import ParseError, WheelOdomError
from .odometry import (
    DEFAULT_COUNTS_PER_REV,
    MEASURED_PARAMS,
    OPTIMIZED_PARAMS,
    WheelParams,
    circle_diameter,
    integrate_log,
    path_length,
    write_trajectory_csv,
)
from .protocol import frames_to_ticklog, parse_stream, write_ticks_file
from .quadrature import decode_stream, decoded_to_ticklog, read_quadrature_csv, write_quadrature_csv
from .simulator import emit_quadrature, read_profile_csv, simulate
from .ticklog import TickLog, read_manifest, write_ticklog_csv
from .transform import VEHICLE_TO_UGV, load_transform_config, transform_trajectory, write_trajectory3d_csv

EXIT_OK, EXIT_USAGE, EXIT_PARSE, EXIT_INVALID = 0, 1, 2, 3

DEFAULTS = {
    "wheel_base": OPTIMIZED_PARAMS.wheel_base_m,
    "wheel_radius": OPTIMIZED_PARAMS.wheel_radius_m,
    "counts_per_rev": DEFAULT_COUNTS_PER_REV,
    "rate_hz": 100.0,
    "oversample": 4,
    "l_min": 0.6,
    "l_max": 0.8,
    "r_min": 0.15,
    "r_max": 0.17,
    "n": 50,
    "measured_wheel_base": MEASURED_PARAMS.wheel_base_m,
    "measured_wheel_radius": MEASURED_PARAMS.wheel_radius_m,
    "workers": 1,
    "z_plane": 0.0,
    "policy": "fail",
    "format": "text",
}
_TYPES = {"counts_per_rev": int, "oversample": int, "n": int, "workers": int, "policy": str, "format": str}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _sha256(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _resolve(args, keys):
    """Fill ``None`` flag values from the config file, then DEFAULTS."""
    config = read_keyvalue(args.config) if args.config else {}
    for key in keys:
        if getattr(args, key, None) is not None:
            continue
        if key in config:
            try:
                value = _TYPES.get(key, float)(config[key])
            except ValueError:
                raise ParseError(f"bad value for {key}: {config[key]!r}", args.config) from None
        else:
            value = DEFAULTS[key]
        setattr(args, key, value)
    return args


def _check_inputs(*paths):
    for p in paths:
        if not Path(p).is_file():
            raise FileNotFoundError(f"no such file: {p}")


def _check_outputs(*paths):
    for p in paths:
        if p is not None and not Path(p).resolve().parent.is_dir():
            raise UsageError(f"output directory does not exist: {Path(p).parent}")


def _params(args):
    return WheelParams(args.wheel_base, args.wheel_radius, args.counts_per_rev)


def _write_log(log: TickLog, path):
    if Path(path).suffix == ".ticks":
        write_ticks_file(log, path)
    else:
        write_ticklog_csv(log, path)


def cmd_simulate(args):
    _resolve(args, ["wheel_base", "wheel_radius", "counts_per_rev", "rate_hz", "oversample"])
    _check_inputs(args.profile)
    _check_outputs(args.out, args.groundtruth)
    profile = read_profile_csv(args.profile, args.rate_hz)
    params = _params(args)
    gt, log = simulate(profile, params)
    _write_log(log, args.out)
    write_trajectory_csv(gt.trajectory, args.groundtruth)
    if args.emit_quadrature:
        left, right = emit_quadrature(log, params, args.oversample)
        prefix = args.emit_quadrature
        write_quadrature_csv(left, f"{prefix}_left.csv")
        write_quadrature_csv(right, f"{prefix}_right.csv")
    final = gt.trajectory.final
    print(f"samples {len(log)}")
    print(f"final_pose {final.x!r} {final.y!r} {final.theta!r}")
    return EXIT_OK


def cmd_integrate(args):
    _resolve(args, ["wheel_base", "wheel_radius", "counts_per_rev", "z_plane", "format"])
    _check_inputs(args.ticklog)
    _check_outputs(args.out)
    log = load_log(args.ticklog)
    traj = integrate_log(log, _params(args))
    summary = [("path_length_m", path_length(traj))]
    if args.circle:
        summary.append(("circle_diameter_m", circle_diameter(traj)))
    if args.to_ugv:
        t = load_transform_config(args.transform_config) if args.transform_config else VEHICLE_TO_UGV
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            traj3 = transform_trajectory(traj, t, args.z_plane)
        for w in caught:
            print(f"warning: {w.message}", file=sys.stderr)
        write_trajectory3d_csv(traj3, args.out)
    else:
        write_trajectory_csv(traj, args.out)
    if args.format == "csv":
        print("metric,value")
        for k, v in summary:
            print(f"{k},{v!r}")
    else:
        for k, v in summary:
            print(f"{k} {v:.4f}")
    return EXIT_OK


def cmd_calibrate(args):
    keys = ["counts_per_rev", "l_min", "l_max", "r_min", "r_max", "n",
            "measured_wheel_base", "measured_wheel_radius", "workers", "format"]
    _resolve(args, keys)
    _check_inputs(args.manifest)
    _check_outputs(args.out, args.dump_grid)
    grid = GridSpec((args.l_min, args.l_max), (args.r_min, args.r_max), args.n)
    experiments = load_experiments(args.manifest)
    if not experiments:
        raise WheelOdomError(f"manifest {args.manifest} lists no experiments")
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        result = grid_search(experiments, grid, args.counts_per_rev, workers=args.workers,
                             keep_grid=bool(args.dump_grid), refine=args.refine)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)

    measured = WheelParams(args.measured_wheel_base, args.measured_wheel_radius, args.counts_per_rev)
    reports = [error_report(measured, experiments), error_report(result.best_params, experiments)]
    labels = ["measured", "optimized"]
    csv_text = render_csv(reports, labels)
    Path(args.out).write_text(csv_text)
    if args.dump_grid:
        write_grid_csv(result, args.dump_grid)

    if args.format == "csv":
        sys.stdout.write(csv_text)
    else:
        best = result.best_params
        title = [f"manifest {args.manifest} sha256 {_sha256(args.manifest)}"]
        for entry in read_manifest(args.manifest):
            title.append(f"log {entry.log_path.name} sha256 {_sha256(entry.log_path)}")
        title.append(
            f"grid L=[{grid.l_range[0]}, {grid.l_range[1]}] R=[{grid.r_range[0]}, {grid.r_range[1]}] "
            f"n={grid.n_per_axis}{' refined' if args.refine else ''}"
        )
        title.append(f"optimum L={best.wheel_base_m:.6f} m R={best.wheel_radius_m:.6f} m "
                     f"objective {result.objective_value:.6g}")
        title.append("")
        sys.stdout.write(render_text(reports, title))
    return EXIT_OK


def cmd_decode(args):
    _resolve(args, ["policy"])
    _check_inputs(args.left, args.right)
    _check_outputs(args.out)
    left = decode_stream(read_quadrature_csv(args.left), args.policy)
    right = decode_stream(read_quadrature_csv(args.right), args.policy)
    log = decoded_to_ticklog(left, right)
    _write_log(log, args.out)
    print(f"illegal_transitions left={left.illegal_transitions} right={right.illegal_transitions}",
          file=sys.stderr)
    print(f"samples {len(log)} final_ticks {left.final} {right.final}")
    return EXIT_OK


def cmd_parse(args):
    _check_inputs(args.ticks)
    _check_outputs(args.out)
    frames, diag = parse_stream(Path(args.ticks).read_bytes())
    log = frames_to_ticklog(frames, diag) if frames else TickLog.empty()
    write_ticklog_csv(log, args.out)
    counts = " ".join(f"{k}={v}" for k, v in diag.as_dict().items())
    print(f"diagnostics {counts}", file=sys.stderr)
    print(f"frames {len(frames)} rows {len(log)}")
    return EXIT_OK


def build_parser():
    parser = _Parser(prog="wheelodom", description="Wheel-encoder odometry toolkit.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--config", help="key = value file supplying defaults for flags")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def wheel_flags(p):
        p.add_argument("--wheel-base", type=float, help="L in metres (default 0.64)")
        p.add_argument("--wheel-radius", type=float, help="R in metres (default 0.164)")
        p.add_argument("--counts-per-rev", type=int, help="decoded counts per revolution (default 4096)")

    p = sub.add_parser("simulate", help="synthesize a tick log and ground truth from a command profile")
    p.add_argument("profile", help="CSV with header v,omega,duration_s")
    p.add_argument("--rate-hz", type=float)
    wheel_flags(p)
    p.add_argument("-o", "--out", required=True, help="tick log (.csv, or .ticks for binary frames)")
    p.add_argument("--groundtruth", required=True, help="ground-truth trajectory CSV")
    p.add_argument("--emit-quadrature", metavar="PREFIX",
                   help="also write PREFIX_left.csv and PREFIX_right.csv A/B level streams")
    p.add_argument("--oversample", type=int, help="quadrature samples per count (>= 4)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("integrate", help="dead-reckon a tick log into a trajectory")
    p.add_argument("ticklog")
    wheel_flags(p)
    p.add_argument("-o", "--out", required=True)
    p.add_argument("--to-ugv", action="store_true", help="express positions in the UGV frame")
    p.add_argument("--transform-config", help="key = value file with l0/h0 or rotation/translation")
    p.add_argument("--z-plane", type=float)
    p.add_argument("--circle", action="store_true", help="also report the circle-fit diameter")
    p.add_argument("--format", choices=("text", "csv"))
    p.set_defaults(func=cmd_integrate)

    p = sub.add_parser("calibrate", help="grid-search L and R against an experiment manifest")
    p.add_argument("manifest", help="CSV with header kind,gt_value_m,log_path")
    for flag in ("--l-min", "--l-max", "--r-min", "--r-max"):
        p.add_argument(flag, type=float)
    p.add_argument("--n", type=int, help="grid values per axis, endpoints included (default 50)")
    p.add_argument("--counts-per-rev", type=int)
    p.add_argument("--measured-wheel-base", type=float, help="baseline column L (default 0.7)")
    p.add_argument("--measured-wheel-radius", type=float, help="baseline column R (default 0.1575)")
    p.add_argument("--workers", type=int)
    p.add_argument("--refine", action="store_true", help="second pass around the first optimum")
    p.add_argument("-o", "--out", required=True, help="CSV report")
    p.add_argument("--dump-grid", metavar="CSV", help="write the L,R,objective surface")
    p.add_argument("--format", choices=("text", "csv"))
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("decode", help="decode left/right quadrature level CSVs into a tick log")
    p.add_argument("left")
    p.add_argument("right")
    p.add_argument("--policy", choices=("fail", "skip"))
    p.add_argument("-o", "--out", required=True)
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("parse", help="recover a tick log CSV from a binary .ticks stream")
    p.add_argument("ticks")
    p.add_argument("-o", "--out", required=True)
    p.set_defaults(func=cmd_parse)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"wheelodom: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ParseError, OSError) as exc:
        print(f"wheelodom: error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (WheelOdomError, ValueError) as exc:
        print(f"wheelodom: error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
