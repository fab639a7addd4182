"""MEM-EKF* recursion: sequential per-detection measurement update and time update.

Kinematics and shape are kept as two independent Gaussians. Each detection
updates the kinematics with the detection itself and the shape with its
pseudo-measurement, using moments evaluated at the current shape estimate.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import moments
from .errors import DimensionMismatch, SingularInnovation
from .linalg import COND_LIMIT, condition_number, inv_small, symmetrize
from .motion import ct_jacobian, ct_transition
from .state import DynamicsModel, KinematicState, MeasurementBatch, SensorModel, ShapeState

DEFAULT_AXIS_FLOOR = 1e-4


@dataclass(frozen=True)
class FilterConfig:
    sensor: SensorModel
    dynamics: DynamicsModel
    axis_floor: float = DEFAULT_AXIS_FLOOR

    @property
    def H(self) -> np.ndarray:
        n = self.dynamics.dim
        H = np.zeros((2, n))
        H[0, 0] = H[1, 1] = 1.0
        return H


@dataclass(frozen=True)
class FilterState:
    kin: KinematicState
    shape: ShapeState
    time_index: int = 0
    clamp_events: int = 0


class UpdateDiagnostics(NamedTuple):
    """Every intermediate of one detection update, evaluated at the prior."""

    S: np.ndarray
    J1: np.ndarray
    J2: np.ndarray
    C_I: np.ndarray
    C_II: np.ndarray
    M: np.ndarray
    y_bar: np.ndarray
    C_ry: np.ndarray
    C_y: np.ndarray
    Y: np.ndarray
    Y_bar: np.ndarray
    C_Y: np.ndarray
    C_pY: np.ndarray
    clamped: bool

    def to_dict(self) -> dict:
        return {k: (v.tolist() if isinstance(v, np.ndarray) else v) for k, v in self._asdict().items()}


def _guarded_inverse(A: np.ndarray, which: str) -> np.ndarray:
    cond = condition_number(A)
    if cond > COND_LIMIT:
        raise SingularInnovation(which, cond)
    return inv_small(A)


def _check_dim(state: FilterState, cfg: FilterConfig):
    if state.kin.dim != cfg.dynamics.dim:
        raise DimensionMismatch(
            f"kinematic state has {state.kin.dim} entries, dynamics model expects {cfg.dynamics.dim}"
        )


def update_single_diagnostics(state: FilterState, y, cfg: FilterConfig) -> tuple[FilterState, UpdateDiagnostics]:
    """One detection update; also returns all intermediate moments."""
    _check_dim(state, cfg)
    y = np.asarray(y, dtype=float)
    r, C_r = state.kin.mean, state.kin.cov
    p, C_p = state.shape.mean, state.shape.cov
    C_h, C_v = cfg.sensor.mult_noise_cov, cfg.sensor.meas_noise_cov
    H = cfg.H

    d = moments.shape_jacobians(p)
    C_I, C_II = moments.spread_covariance(p, C_p, C_h, d)
    M = moments.shape_sensitivity(p, C_h, d)

    # kinematics, with the actual detection
    y_bar = H @ r
    C_ry = C_r @ H.T
    C_y = symmetrize(H @ C_r @ H.T + C_I + C_II + C_v)
    C_y_inv = _guarded_inverse(C_y, "C_y")
    K_r = C_ry @ C_y_inv
    r_post = r + K_r @ (y - y_bar)
    C_r_post = symmetrize(C_r - K_r @ C_ry.T)

    # shape, with the pseudo-measurement
    Y = moments.pseudo_meas(y, y_bar)
    Y_bar = moments.pseudo_meas_mean(C_y)
    C_Y = moments.pseudo_meas_cov_kron(C_y)
    C_pY = C_p @ M.T
    C_Y_inv = _guarded_inverse(C_Y, "C_Y")
    K_p = C_pY @ C_Y_inv
    p_post = p + K_p @ (Y - Y_bar)
    C_p_post = symmetrize(C_p - K_p @ C_pY.T)

    floor = cfg.axis_floor
    clamped = bool(p_post[1] < floor or p_post[2] < floor)
    if clamped:
        p_post = p_post.copy()
        p_post[1:] = np.maximum(p_post[1:], floor)

    new = FilterState(
        KinematicState(r_post, C_r_post),
        ShapeState(p_post, C_p_post),
        state.time_index,
        state.clamp_events + int(clamped),
    )
    diag = UpdateDiagnostics(d.S, d.J1, d.J2, C_I, C_II, M, y_bar, C_ry, C_y, Y, Y_bar, C_Y, C_pY, clamped)
    return new, diag


def update_single(state: FilterState, y, cfg: FilterConfig) -> FilterState:
    return update_single_diagnostics(state, y, cfg)[0]


def update_scan(state: FilterState, batch: MeasurementBatch, cfg: FilterConfig) -> FilterState:
    """Fold :func:`update_single` over the detections in stored order."""
    for i, y in enumerate(batch.detections):
        try:
            state = update_single(state, y, cfg)
        except SingularInnovation as exc:
            raise SingularInnovation(exc.which, exc.cond, detection_index=i) from exc
    return state


def predict(state: FilterState, cfg: FilterConfig) -> FilterState:
    """Linear Kalman time update of kinematics and shape."""
    _check_dim(state, cfg)
    dyn = cfg.dynamics
    A_r, A_p = dyn.A_r, dyn.A_p
    kin = KinematicState(A_r @ state.kin.mean, symmetrize(A_r @ state.kin.cov @ A_r.T + dyn.Q_r))
    shape = ShapeState(A_p @ state.shape.mean, symmetrize(A_p @ state.shape.cov @ A_p.T + dyn.Q_p))
    return dataclasses.replace(state, kin=kin, shape=shape, time_index=state.time_index + 1)


def predict_turn_coupled(state: FilterState, cfg: FilterConfig) -> FilterState:
    """Coordinated-turn kinematics; orientation advanced by ``T * omega``.

    The kinematic covariance is propagated with the transition Jacobian at
    the current mean. The shape prediction uses the posterior kinematics.
    """
    _check_dim(state, cfg)
    if state.kin.dim != 5:
        raise DimensionMismatch(f"turn-coupled prediction needs a turn-rate state, got dimension {state.kin.dim}")
    dyn = cfg.dynamics
    T = dyn.sampling_period
    r, C_r = state.kin.mean, state.kin.cov

    B = np.zeros((3, 5))
    B[0, 4] = T
    A_p = dyn.A_p
    p_pred = B @ r + A_p @ state.shape.mean
    C_p_pred = B @ C_r @ B.T + A_p @ state.shape.cov @ A_p.T + dyn.Q_p

    G = ct_jacobian(r, T)
    kin = KinematicState(ct_transition(r, T), symmetrize(G @ C_r @ G.T + dyn.Q_r))
    shape = ShapeState(p_pred, symmetrize(C_p_pred))
    return dataclasses.replace(state, kin=kin, shape=shape, time_index=state.time_index + 1)


def time_update(state: FilterState, cfg: FilterConfig) -> FilterState:
    if cfg.dynamics.turn_coupling:
        return predict_turn_coupled(state, cfg)
    return predict(state, cfg)


def gaussian_pdf2(y, mean, cov) -> float:
    e = np.asarray(y, dtype=float) - mean
    cond = condition_number(cov)
    if cond > COND_LIMIT:
        raise SingularInnovation("likelihood covariance", cond)
    det = cov[0, 0] * cov[1, 1] - cov[0, 1] * cov[1, 0]
    return float(np.exp(-0.5 * e @ inv_small(cov) @ e) / (2 * np.pi * np.sqrt(det)))


def likelihood(state: FilterState, y, cfg: FilterConfig) -> float:
    """Detection density given the current point estimates of kinematics and shape."""
    S = moments.shape_matrix(state.shape.mean)
    cov = S @ cfg.sensor.mult_noise_cov @ S.T + cfg.sensor.meas_noise_cov
    return gaussian_pdf2(y, cfg.H @ state.kin.mean, symmetrize(cov))
