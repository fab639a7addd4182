"""Coordinated-turn transition for the state ``[x, y, vx, vy, omega]``."""
from __future__ import annotations

import numpy as np

_SMALL = 1e-4


def _turn_coefficients(omega: float, T: float):
    """``sin(wT)/w``, ``(1-cos(wT))/w`` and their derivatives in ``w``."""
    x = omega * T
    if abs(x) < _SMALL:
        a = T * (1 - x**2 / 6)
        b = T * (x / 2 - x**3 / 24)
        da = -T**2 * x / 3
        db = T**2 * (0.5 - x**2 / 8)
        return a, b, da, db
    s, c = np.sin(x), np.cos(x)
    a = s / omega
    b = (1 - c) / omega
    da = (T * c * omega - s) / omega**2
    db = (T * s * omega - (1 - c)) / omega**2
    return a, b, da, db


def ct_transition(r: np.ndarray, T: float) -> np.ndarray:
    x, y, vx, vy, w = r
    a, b, _, _ = _turn_coefficients(w, T)
    c, s = np.cos(w * T), np.sin(w * T)
    return np.array([
        x + a * vx - b * vy,
        y + b * vx + a * vy,
        c * vx - s * vy,
        s * vx + c * vy,
        w,
    ])


def ct_jacobian(r: np.ndarray, T: float) -> np.ndarray:
    _, _, vx, vy, w = r
    a, b, da, db = _turn_coefficients(w, T)
    c, s = np.cos(w * T), np.sin(w * T)
    return np.array([
        [1.0, 0.0, a, -b, da * vx - db * vy],
        [0.0, 1.0, b, a, db * vx + da * vy],
        [0.0, 0.0, c, -s, -T * (s * vx + c * vy)],
        [0.0, 0.0, s, c, T * (c * vx - s * vy)],
        [0.0, 0.0, 0.0, 0.0, 1.0],
    ])
