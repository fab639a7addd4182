"""Random-matrix extended object tracker in the Feldmann/Koch form, used as a baseline.

Extent convention: the inverse-Wishart pair ``(V, v)`` with expected extent
``X_hat = V / (v - 2d - 2)`` (``d = 2``). The extent enters the detection
spread as ``X_hat / z + C_v``; ``z = 4`` matches a uniform disk.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from .errors import SingularInnovation
from .filter import gaussian_pdf2
from .linalg import COND_LIMIT, condition_number, inv2, inv_sqrtm_spd, sqrtm_psd, symmetrize
from .state import DynamicsModel, EllipseSummary, KinematicState, MeasurementBatch

D = 2
DOF_OFFSET = 2 * D + 2


@dataclass(frozen=True)
class RMState:
    kin: KinematicState
    V: np.ndarray
    v: float
    tau: float | None = 50.0
    z: float = 4.0

    def __post_init__(self):
        V = np.array(self.V, dtype=float).reshape(2, 2)
        V.setflags(write=False)
        object.__setattr__(self, "V", V)
        if not self.v > DOF_OFFSET:
            raise ValueError(f"degrees of freedom must exceed {DOF_OFFSET}, got {self.v}")

    @classmethod
    def from_extent(cls, kin: KinematicState, extent, v: float, tau: float | None = 50.0, z: float = 4.0) -> "RMState":
        return cls(kin, np.asarray(extent, dtype=float) * (v - DOF_OFFSET), v, tau, z)

    @property
    def extent(self) -> np.ndarray:
        return self.V / (self.v - DOF_OFFSET)


def _H(n: int) -> np.ndarray:
    H = np.zeros((2, n))
    H[0, 0] = H[1, 1] = 1.0
    return H


def rm_update(state: RMState, batch: MeasurementBatch, C_v) -> RMState:
    """Batch update from the detection mean and scatter; empty batches are a no-op."""
    W = batch.detections
    n = W.shape[0]
    if n == 0:
        return state
    C_v = np.asarray(C_v, dtype=float)
    r, P = state.kin.mean, state.kin.cov
    H = _H(r.size)
    X = state.extent

    z_bar = W.mean(axis=0)
    e = z_bar - H @ r
    dev = W - z_bar
    Z = dev.T @ dev

    Y = symmetrize(X / state.z + C_v)
    S = symmetrize(H @ P @ H.T + Y / n)
    cond = condition_number(S)
    if cond > COND_LIMIT:
        raise SingularInnovation("rm_S", cond)
    K = P @ H.T @ inv2(S)

    X_half, _ = sqrtm_psd(X)
    N_hat = X_half @ inv_sqrtm_spd(S) @ np.outer(e, e) @ inv_sqrtm_spd(S) @ X_half
    Y_isqrt = inv_sqrtm_spd(Y)
    Z_hat = X_half @ Y_isqrt @ Z @ Y_isqrt @ X_half

    kin = KinematicState(r + K @ e, symmetrize(P - K @ S @ K.T))
    return dataclasses.replace(state, kin=kin, V=symmetrize(state.V + N_hat + Z_hat), v=state.v + n)


def rm_predict(state: RMState, dynamics: DynamicsModel) -> RMState:
    """Kalman prediction of the kinematics; the dof relaxes toward its lower bound
    with time constant ``tau`` while the expected extent is kept."""
    A = dynamics.A_r
    kin = KinematicState(A @ state.kin.mean, symmetrize(A @ state.kin.cov @ A.T + dynamics.Q_r))
    # tau=None: no forgetting
    decay = 1.0 if state.tau is None else np.exp(-dynamics.sampling_period / state.tau)
    v = DOF_OFFSET + decay * (state.v - DOF_OFFSET)
    V = state.extent * (v - DOF_OFFSET)
    return dataclasses.replace(state, kin=kin, V=V, v=v)


def rm_to_summary(state: RMState) -> EllipseSummary:
    return EllipseSummary(state.kin.mean[:2], symmetrize(state.extent))


def rm_likelihood(state: RMState, y, C_v) -> float:
    H = _H(state.kin.dim)
    return gaussian_pdf2(y, H @ state.kin.mean, symmetrize(state.extent / state.z + np.asarray(C_v, dtype=float)))


def extent_to_params(X) -> np.ndarray:
    """``(alpha, l1, l2)`` of an SPD extent, major axis first, alpha in (-pi/2, pi/2]."""
    w, V = np.linalg.eigh(symmetrize(np.asarray(X, dtype=float)))
    major = V[:, 1]
    alpha = np.arctan2(major[1], major[0])
    if alpha <= -np.pi / 2:
        alpha += np.pi
    elif alpha > np.pi / 2:
        alpha -= np.pi
    return np.array([alpha, np.sqrt(max(w[1], 0.0)), np.sqrt(max(w[0], 0.0))])
