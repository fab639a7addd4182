"""Closed-form helpers for the fixed 2x2 and 3x3 matrices used throughout."""
from __future__ import annotations

import numpy as np

COND_LIMIT = 1e12


def symmetrize(A: np.ndarray) -> np.ndarray:
    return 0.5 * (A + A.T)


def inv2(A: np.ndarray) -> np.ndarray:
    a, b, c, d = A[0, 0], A[0, 1], A[1, 0], A[1, 1]
    det = a * d - b * c
    return np.array([[d, -b], [-c, a]]) / det


def inv3(A: np.ndarray) -> np.ndarray:
    (a, b, c), (d, e, f), (g, h, i) = A.tolist()
    co = [e * i - f * h, f * g - d * i, d * h - e * g]
    det = a * co[0] + b * co[1] + c * co[2]
    return np.array([
        [co[0], c * h - b * i, b * f - c * e],
        [co[1], a * i - c * g, c * d - a * f],
        [co[2], b * g - a * h, a * e - b * d],
    ]) / det


def inv_small(A: np.ndarray) -> np.ndarray:
    n = A.shape[0]
    if n == 2:
        return inv2(A)
    if n == 3:
        return inv3(A)
    return np.linalg.inv(A)


def condition_number(A: np.ndarray) -> float:
    """Condition number of a symmetric matrix; inf if singular, indefinite or non-finite."""
    if not np.all(np.isfinite(A)):
        return float("inf")
    w = np.linalg.eigvalsh(A)
    if w[0] <= 0:
        return float("inf")
    return float(w[-1] / w[0])


def sqrtm_psd(A: np.ndarray) -> tuple[np.ndarray, bool]:
    """Symmetric square root of a PSD matrix.

    Negative eigenvalues (round-off) are floored at zero; the flag reports
    whether that happened beyond a relative 1e-12.
    """
    w, V = np.linalg.eigh(symmetrize(A))
    floored = bool(w.min() < -1e-12 * max(1.0, abs(w).max()))
    w = np.clip(w, 0.0, None)
    return (V * np.sqrt(w)) @ V.T, floored


def inv_sqrtm_spd(A: np.ndarray) -> np.ndarray:
    w, V = np.linalg.eigh(symmetrize(A))
    return (V / np.sqrt(w)) @ V.T
