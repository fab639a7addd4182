"""Value types shared by the filter, simulator, baseline and harness.

All types are frozen dataclasses holding read-only float arrays, so a state
can be handed to another thread or stored in a history list without copying.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Any, NamedTuple

import numpy as np

from .moments import shape_matrix

PSD_TOL = 1e-9


def _frozen(a, shape=None) -> np.ndarray:
    arr = np.array(a, dtype=float)
    if shape is not None and arr.shape != shape:
        raise ValueError(f"expected shape {shape}, got {arr.shape}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class KinematicState:
    """Center (first two entries), velocity and optional turn rate."""

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = _frozen(self.mean)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", _frozen(self.cov, (mean.size, mean.size)))

    @property
    def dim(self) -> int:
        return self.mean.size

    @property
    def center(self) -> np.ndarray:
        return self.mean[:2]


@dataclass(frozen=True)
class ShapeState:
    """Orientation (radians, unwrapped) and the two semi-axis lengths."""

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "mean", _frozen(self.mean, (3,)))
        object.__setattr__(self, "cov", _frozen(self.cov, (3, 3)))

    @property
    def alpha(self) -> float:
        return float(self.mean[0])

    @property
    def l1(self) -> float:
        return float(self.mean[1])

    @property
    def l2(self) -> float:
        return float(self.mean[2])


@dataclass(frozen=True)
class SensorModel:
    meas_noise_cov: np.ndarray
    mult_noise_cov: np.ndarray = field(default_factory=lambda: np.eye(2) / 4)
    poisson_mean: float = 20.0

    def __post_init__(self):
        object.__setattr__(self, "meas_noise_cov", _frozen(self.meas_noise_cov, (2, 2)))
        object.__setattr__(self, "mult_noise_cov", _frozen(self.mult_noise_cov, (2, 2)))
        object.__setattr__(self, "poisson_mean", float(self.poisson_mean))


@dataclass(frozen=True)
class MeasurementBatch:
    time_index: int
    detections: np.ndarray

    def __post_init__(self):
        det = np.array(self.detections, dtype=float).reshape(-1, 2)
        det.setflags(write=False)
        object.__setattr__(self, "detections", det)
        object.__setattr__(self, "time_index", int(self.time_index))

    def __len__(self):
        return self.detections.shape[0]


@dataclass(frozen=True)
class DynamicsModel:
    """Linear process model for kinematics and shape.

    With ``turn_coupling`` set, the kinematics follow a coordinated-turn
    transition (``A_r`` is then unused) and the orientation is advanced by
    ``sampling_period`` times the estimated turn rate.
    """

    A_r: np.ndarray
    A_p: np.ndarray
    Q_r: np.ndarray
    Q_p: np.ndarray
    sampling_period: float = 1.0
    turn_coupling: bool = False

    def __post_init__(self):
        A_r = _frozen(self.A_r)
        n = A_r.shape[0]
        object.__setattr__(self, "A_r", _frozen(A_r, (n, n)))
        object.__setattr__(self, "A_p", _frozen(self.A_p, (3, 3)))
        object.__setattr__(self, "Q_r", _frozen(self.Q_r, (n, n)))
        object.__setattr__(self, "Q_p", _frozen(self.Q_p, (3, 3)))
        object.__setattr__(self, "sampling_period", float(self.sampling_period))
        object.__setattr__(self, "turn_coupling", bool(self.turn_coupling))

    @property
    def dim(self) -> int:
        return self.A_r.shape[0]


@dataclass(frozen=True)
class EllipseSummary:
    center: np.ndarray
    extent: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "center", _frozen(self.center, (2,)))
        object.__setattr__(self, "extent", _frozen(self.extent, (2, 2)))


def cv_transition(T: float) -> np.ndarray:
    """Constant-velocity transition for ``[x, y, vx, vy]``."""
    A = np.eye(4)
    A[0, 2] = A[1, 3] = T
    return A


def to_ellipse_summary(kin: KinematicState, shape: ShapeState) -> EllipseSummary:
    S = shape_matrix(shape.mean)
    return EllipseSummary(kin.mean[:2], S @ S.T)


# ---------------------------------------------------------------------------
# validation


class Violation(NamedTuple):
    field: str
    reason: str

    def __str__(self):
        return f"{self.field}: {self.reason}"


def _check_psd(name: str, m: np.ndarray, strict: bool = False) -> Violation | None:
    if not np.all(np.isfinite(m)):
        return Violation(name, "not finite")
    if not np.allclose(m, m.T, rtol=1e-9, atol=1e-12):
        return Violation(name, "not symmetric")
    eig = np.linalg.eigvalsh((m + m.T) / 2)
    scale = max(1.0, float(np.max(np.abs(eig))))
    if strict and eig.min() <= 0:
        return Violation(name, "not SPD")
    if eig.min() < -PSD_TOL * scale:
        return Violation(name, "not PSD")
    return None


def validate(obj) -> Violation | None:
    """Return the first violated invariant of ``obj``, or None if it is well formed."""
    checks: list[Violation | None] = []
    if isinstance(obj, KinematicState):
        if obj.dim not in (4, 5):
            return Violation("mean", f"kinematic dimension {obj.dim} not in (4, 5)")
        checks.append(_check_psd("cov", obj.cov))
    elif isinstance(obj, ShapeState):
        checks.append(_check_psd("cov", obj.cov))
        if not obj.l1 > 0:
            checks.append(Violation("mean.l1", "semi-axis not positive"))
        if not obj.l2 > 0:
            checks.append(Violation("mean.l2", "semi-axis not positive"))
    elif isinstance(obj, SensorModel):
        checks.append(_check_psd("meas_noise_cov", obj.meas_noise_cov, strict=True))
        checks.append(_check_psd("mult_noise_cov", obj.mult_noise_cov, strict=True))
        if not obj.poisson_mean > 0:
            checks.append(Violation("poisson_mean", "not positive"))
    elif isinstance(obj, DynamicsModel):
        checks.append(_check_psd("Q_r", obj.Q_r))
        checks.append(_check_psd("Q_p", obj.Q_p))
        if not obj.sampling_period > 0:
            checks.append(Violation("sampling_period", "not positive"))
        if obj.turn_coupling and obj.dim != 5:
            checks.append(Violation("A_r", "turn coupling needs a turn-rate state"))
    elif isinstance(obj, EllipseSummary):
        checks.append(_check_psd("extent", obj.extent))
    elif isinstance(obj, MeasurementBatch):
        if not np.all(np.isfinite(obj.detections)):
            checks.append(Violation("detections", "not finite"))
    else:
        raise TypeError(f"cannot validate {type(obj).__name__}")
    return next((c for c in checks if c is not None), None)


# ---------------------------------------------------------------------------
# serialization

_TYPES = {
    cls.__name__: cls
    for cls in (KinematicState, ShapeState, SensorModel, MeasurementBatch, DynamicsModel, EllipseSummary)
}


def to_dict(obj) -> dict[str, Any]:
    """JSON-compatible dict; arrays become (nested) lists."""
    out: dict[str, Any] = {}
    for f in dataclasses.fields(obj):
        value = getattr(obj, f.name)
        if isinstance(value, np.ndarray):
            value = value.tolist()
        elif dataclasses.is_dataclass(value):
            value = to_dict(value)
        out[f.name] = value
    return out


def from_dict(cls, data: dict[str, Any]):
    if isinstance(cls, str):
        cls = _TYPES[cls]
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = set(data) - names
    if unknown:
        raise ValueError(f"unknown fields for {cls.__name__}: {sorted(unknown)}")
    return cls(**data)
