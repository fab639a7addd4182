"""Kalman filtering of elliptical extended objects with a multiplicative error model."""
from .errors import DimensionMismatch, MemEkfError, ScenarioError, SingularInnovation
from .filter import (
    FilterConfig,
    FilterState,
    UpdateDiagnostics,
    likelihood,
    predict,
    predict_turn_coupled,
    time_update,
    update_scan,
    update_single,
    update_single_diagnostics,
)
from .metrics import ErrorSeries, gw_distance, rms_series
from .state import (
    DynamicsModel,
    EllipseSummary,
    KinematicState,
    MeasurementBatch,
    SensorModel,
    ShapeState,
    to_ellipse_summary,
    validate,
)

__version__ = "0.1.0"
