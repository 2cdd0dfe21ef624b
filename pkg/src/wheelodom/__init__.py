"""Wheel-encoder odometry for a differential-drive rear axle.

Decode quadrature signals, parse framed encoder logs, dead-reckon poses,
move them into the mapping-robot frame, and grid-search wheel geometry
against measured travel.
"""
from .calibration import (
    CalibrationResult,
    ExperimentRecord,
    GridSpec,
    error_report,
    grid_search,
    predict_experiment,
)
from .errors import (
    AliasingError,
    EmptyInputError,
    FitDegenerateError,
    IllegalTransitionError,
    ParseError,
    StepTooLargeError,
    ValidationError,
    WheelOdomError,
)
from .odometry import (
    MEASURED_PARAMS,
    OPTIMIZED_PARAMS,
    Pose2D,
    Trajectory,
    WheelDelta,
    WheelParams,
    circle_diameter,
    integrate_log,
    integrate_step,
    normalize_angle,
    path_length,
    relative_error,
    ticks_to_travel,
)
from .protocol import EncoderFrame, encode_frame, frames_to_ticklog, parse_stream
from .quadrature import QuadState, decode_stream, decode_transition
from .simulator import CommandProfile, GroundTruth, emit_quadrature, simulate
from .ticklog import TickLog, read_ticklog_csv, write_ticklog_csv
from .transform import VEHICLE_TO_UGV, RigidTransform3D, apply, compose, invert, transform_trajectory

__version__ = "0.1.0"
