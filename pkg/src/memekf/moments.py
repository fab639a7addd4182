"""Analytic moments of the multiplicative-error measurement model.

Everything here is a pure function of the current shape estimate and the
noise covariances. The filter evaluates these once per detection.
"""
from __future__ import annotations

from typing import NamedTuple

import numpy as np

# Row selectors for the 2-fold Kronecker square y (x) y = (y1y1, y1y2, y2y1, y2y2).
# F keeps (y1y1, y2y2, y1y2); F_TILDE keeps (y1y1, y2y2, y2y1).
F = np.array([[1.0, 0.0, 0.0, 0.0],
              [0.0, 0.0, 0.0, 1.0],
              [0.0, 1.0, 0.0, 0.0]])
F_TILDE = np.array([[1.0, 0.0, 0.0, 0.0],
                    [0.0, 0.0, 0.0, 1.0],
                    [0.0, 0.0, 1.0, 0.0]])
F.setflags(write=False)
F_TILDE.setflags(write=False)


class ShapeDerivatives(NamedTuple):
    S: np.ndarray
    S1: np.ndarray
    S2: np.ndarray
    J1: np.ndarray
    J2: np.ndarray


def shape_matrix(p) -> np.ndarray:
    """Rotation by ``alpha`` times ``diag(l1, l2)``."""
    alpha, l1, l2 = p
    c, s = np.cos(alpha), np.sin(alpha)
    return np.array([[c * l1, -s * l2],
                     [s * l1, c * l2]])


def shape_jacobians(p) -> ShapeDerivatives:
    """Shape matrix rows and their Jacobians w.r.t. ``(alpha, l1, l2)``."""
    alpha, l1, l2 = p
    c, s = np.cos(alpha), np.sin(alpha)
    S = np.array([[c * l1, -s * l2],
                  [s * l1, c * l2]])
    J1 = np.array([[-l1 * s, c, 0.0],
                   [-l2 * c, 0.0, -s]])
    J2 = np.array([[l1 * c, s, 0.0],
                   [-l2 * s, 0.0, c]])
    return ShapeDerivatives(S, S[0].copy(), S[1].copy(), J1, J2)


def spread_covariance(p_hat, C_p, C_h, derivs: ShapeDerivatives | None = None):
    """Covariance of ``S(p) h`` split into the point-estimate part and the
    part due to shape uncertainty.

    Returns
    -------
    (C_I, C_II)
        ``C_I = S C_h S^T``; ``C_II[m, n] = tr(C_p J_n^T C_h J_m)``, symmetrized.
    """
    d = derivs if derivs is not None else shape_jacobians(p_hat)
    C_h = np.asarray(C_h, dtype=float)
    C_p = np.asarray(C_p, dtype=float)
    C_I = d.S @ C_h @ d.S.T
    J = (d.J1, d.J2)
    C_II = np.empty((2, 2))
    for m in range(2):
        for n in range(2):
            C_II[m, n] = np.trace(C_p @ J[n].T @ C_h @ J[m])
    C_II = 0.5 * (C_II + C_II.T)
    return 0.5 * (C_I + C_I.T), C_II


def pseudo_meas(y, y_bar) -> np.ndarray:
    """Duplicate-free Kronecker square of the centred detection."""
    e = np.asarray(y, dtype=float) - np.asarray(y_bar, dtype=float)
    return F @ np.kron(e, e)


def vect(C) -> np.ndarray:
    """Stack the columns of ``C``."""
    return np.asarray(C, dtype=float).reshape(-1, order="F")


def pseudo_meas_mean(C_y) -> np.ndarray:
    return F @ vect(C_y)


def pseudo_meas_cov(C_y) -> np.ndarray:
    """Covariance of the pseudo-measurement of a zero-mean Gaussian detection.

    Written out entrywise from the Gaussian fourth moments
    ``E[e_i e_j e_k e_l] = c_ij c_kl + c_ik c_jl + c_il c_jk``.
    """
    C_y = np.asarray(C_y, dtype=float)
    c11, c22 = C_y[0, 0], C_y[1, 1]
    c12 = 0.5 * (C_y[0, 1] + C_y[1, 0])
    return np.array([
        [2 * c11**2, 2 * c12**2, 2 * c11 * c12],
        [2 * c12**2, 2 * c22**2, 2 * c22 * c12],
        [2 * c11 * c12, 2 * c22 * c12, c11 * c22 + c12**2],
    ])


def pseudo_meas_cov_kron(C_y) -> np.ndarray:
    """Compact Kronecker form ``F (C_y (x) C_y) (F + F~)^T``; equals :func:`pseudo_meas_cov`."""
    C_y = np.asarray(C_y, dtype=float)
    return F @ np.kron(C_y, C_y) @ (F + F_TILDE).T


def shape_sensitivity(p_hat, C_h, derivs: ShapeDerivatives | None = None) -> np.ndarray:
    """Expected Jacobian of the pseudo-measurement w.r.t. the shape parameters (3x3)."""
    d = derivs if derivs is not None else shape_jacobians(p_hat)
    C_h = np.asarray(C_h, dtype=float)
    return np.vstack([
        2 * d.S1 @ C_h @ d.J1,
        2 * d.S2 @ C_h @ d.J2,
        d.S1 @ C_h @ d.J2 + d.S2 @ C_h @ d.J1,
    ])


def pseudo_cross_cov(p_hat, C_p, C_h, derivs: ShapeDerivatives | None = None) -> np.ndarray:
    """Linearized cross-covariance between shape parameters and pseudo-measurement."""
    M = shape_sensitivity(p_hat, C_h, derivs)
    return np.asarray(C_p, dtype=float) @ M.T
