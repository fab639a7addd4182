"""Ground-truth trajectories and detection synthesis for the evaluation scenarios."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import rng
from .errors import ScenarioError
from .moments import shape_matrix
from .motion import ct_transition
from .state import EllipseSummary, MeasurementBatch, SensorModel

KINDS = ("stationary", "cv_waypoints", "variable_turn")


@dataclass(frozen=True)
class TurnSchedule:
    """Constant velocity, turn-rate ramp up, ramp down, constant velocity."""

    cv_steps: int = 25
    ramp_up_steps: int = 20
    ramp_down_steps: int = 20
    cv_tail_steps: int = 5
    max_turn_rate_deg: float = 20.0
    lead_in_steps: int = 0

    @property
    def total(self) -> int:
        return self.lead_in_steps + self.cv_steps + self.ramp_up_steps + self.ramp_down_steps + self.cv_tail_steps

    def turn_rates(self) -> np.ndarray:
        """Turn rate (rad/s) applied when moving from step k to k+1."""
        w = math.radians(self.max_turn_rate_deg)
        up = w * np.arange(1, self.ramp_up_steps + 1) / self.ramp_up_steps
        down = w * np.arange(self.ramp_down_steps - 1, -1, -1) / self.ramp_down_steps
        return np.concatenate([
            np.zeros(self.lead_in_steps + self.cv_steps), up, down, np.zeros(self.cv_tail_steps)
        ])


@dataclass(frozen=True)
class ScenarioSpec:
    kind: str
    seed: int
    steps: int | None = None
    T: float = 1.0
    speed_mps: float = 0.0
    waypoints: tuple = ()
    axes: tuple[float, float] = (1.0, 1.0)
    alpha0: float = 0.0
    center0: tuple[float, float] = (0.0, 0.0)
    poisson_mean: float = 20.0
    meas_noise_var: tuple[float, float] = (1.0, 1.0)
    fixed_count: int | None = None
    turn: TurnSchedule = field(default_factory=TurnSchedule)
    name: str = ""

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ScenarioError(f"unknown scenario kind {self.kind!r}; expected one of {KINDS}")
        if self.seed is None:
            raise ScenarioError("scenario seed is mandatory")
        if self.T <= 0:
            raise ScenarioError("T must be positive")
        if min(self.axes) <= 0:
            raise ScenarioError("semi-axes must be positive")
        if min(self.meas_noise_var) <= 0:
            raise ScenarioError("measurement noise variances must be positive")
        if self.steps is not None and self.steps <= 0:
            raise ScenarioError("steps must be positive")
        if self.fixed_count is None and self.poisson_mean <= 0:
            raise ScenarioError("poisson_mean must be positive")

    @property
    def sensor(self) -> SensorModel:
        return SensorModel(np.diag(self.meas_noise_var), np.eye(2) / 4, self.poisson_mean)


@dataclass(frozen=True)
class GroundTruth:
    center: np.ndarray       # (K, 2)
    velocity: np.ndarray     # (K, 2)
    orientation: np.ndarray  # (K,)
    axes: np.ndarray         # (K, 2)
    turn_rate: np.ndarray    # (K,)

    def __len__(self):
        return self.center.shape[0]

    def shape_params(self, k: int) -> np.ndarray:
        return np.array([self.orientation[k], *self.axes[k]])

    def summary(self, k: int) -> EllipseSummary:
        S = shape_matrix(self.shape_params(k))
        return EllipseSummary(self.center[k], S @ S.T)


def _stationary(spec: ScenarioSpec) -> GroundTruth:
    K = spec.steps or 1
    return GroundTruth(
        np.tile(np.asarray(spec.center0, dtype=float), (K, 1)),
        np.zeros((K, 2)),
        np.full(K, float(spec.alpha0)),
        np.tile(np.asarray(spec.axes, dtype=float), (K, 1)),
        np.zeros(K),
    )


def _cv_waypoints(spec: ScenarioSpec) -> GroundTruth:
    wp = np.asarray(spec.waypoints, dtype=float)
    if wp.ndim != 2 or wp.shape[0] < 2 or wp.shape[1] != 2:
        raise ScenarioError("cv_waypoints needs at least two [x, y] waypoints")
    if spec.speed_mps <= 0:
        raise ScenarioError("speed_mps must be positive")
    legs = np.diff(wp, axis=0)
    lengths = np.linalg.norm(legs, axis=1)
    if np.any(lengths <= 0):
        raise ScenarioError("zero-length leg between consecutive waypoints")
    headings = np.unwrap(np.arctan2(legs[:, 1], legs[:, 0]))
    cum = np.concatenate([[0.0], np.cumsum(lengths)])
    step = spec.speed_mps * spec.T
    K = spec.steps or int(math.floor(cum[-1] / step)) + 1
    s = np.arange(K) * step
    if s[-1] > cum[-1] + 1e-9:
        raise ScenarioError(f"{K} steps at {step:.3f} m/step overrun the {cum[-1]:.3f} m path")
    leg = np.clip(np.searchsorted(cum, s, side="right") - 1, 0, len(lengths) - 1)
    frac = (s - cum[leg])[:, None] / lengths[leg][:, None]
    center = wp[leg] + frac * legs[leg]
    direction = legs[leg] / lengths[leg][:, None]
    return GroundTruth(
        center,
        spec.speed_mps * direction,
        headings[leg] + spec.alpha0,
        np.tile(np.asarray(spec.axes, dtype=float), (K, 1)),
        np.zeros(K),
    )


def _variable_turn(spec: ScenarioSpec) -> GroundTruth:
    sched = spec.turn
    K = sched.total
    if spec.steps is not None and spec.steps != K:
        raise ScenarioError(f"variable_turn schedule has {K} steps, spec says {spec.steps}")
    if spec.speed_mps <= 0:
        raise ScenarioError("speed_mps must be positive")
    rates = sched.turn_rates()
    r = np.array([*spec.center0, spec.speed_mps * math.cos(spec.alpha0),
                  spec.speed_mps * math.sin(spec.alpha0), 0.0])
    states = np.empty((K, 5))
    for k in range(K):
        r[4] = rates[k]
        states[k] = r
        r = ct_transition(r, spec.T)
    heading = np.unwrap(np.arctan2(states[:, 3], states[:, 2]))
    return GroundTruth(
        states[:, :2].copy(),
        states[:, 2:4].copy(),
        heading,
        np.tile(np.asarray(spec.axes, dtype=float), (K, 1)),
        rates.copy(),
    )


def gen_truth(spec: ScenarioSpec) -> GroundTruth:
    if spec.kind == "stationary":
        return _stationary(spec)
    if spec.kind == "cv_waypoints":
        return _cv_waypoints(spec)
    return _variable_turn(spec)


def sample_unit_disk(gen: np.random.Generator, n: int) -> np.ndarray:
    """Uniform points on the unit disk (radius sqrt(U), uniform angle)."""
    radius = np.sqrt(gen.random(n))
    angle = gen.uniform(0.0, 2 * np.pi, n)
    return np.column_stack([radius * np.cos(angle), radius * np.sin(angle)])


def gen_measurements(truth: GroundTruth, sensor: SensorModel, seed: int, run: int = 0,
                     fixed_count: int | None = None) -> list[MeasurementBatch]:
    """Detections per step: sources uniform on the true ellipse plus Gaussian noise.

    Step ``k`` of run ``run`` draws from its own stream ``(seed, run, k)``.
    """
    chol = np.linalg.cholesky(sensor.meas_noise_cov)
    batches = []
    for k in range(len(truth)):
        gen = rng.stream(seed, rng.MEASUREMENTS, run, k)
        n = int(fixed_count) if fixed_count is not None else int(gen.poisson(sensor.poisson_mean))
        S = shape_matrix(truth.shape_params(k))
        sources = truth.center[k] + sample_unit_disk(gen, n) @ S.T
        noise = gen.standard_normal((n, 2)) @ chol.T
        batches.append(MeasurementBatch(k, sources + noise))
    return batches
