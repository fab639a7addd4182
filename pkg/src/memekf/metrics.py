"""Gaussian Wasserstein distance between ellipses and its RMS over runs."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import symmetrize
from .state import EllipseSummary


@dataclass(frozen=True)
class ErrorSeries:
    time_index: tuple[int, ...]
    gw: tuple[float, ...]
    aggregation: str = "single-run"

    def __post_init__(self):
        if len(self.time_index) != len(self.gw):
            raise ValueError("time_index and gw lengths differ")
        if any(d < 0 for d in self.gw):
            raise ValueError("negative distance in error series")

    def __len__(self):
        return len(self.gw)


def _det2(A: np.ndarray) -> float:
    return float(A[0, 0] * A[1, 1] - A[0, 1] * A[1, 0])


def gw_distance_flagged(a: EllipseSummary, b: EllipseSummary) -> tuple[float, bool]:
    """Distance plus a flag telling whether a negative determinant was floored.

    For 2x2 PSD matrices ``tr sqrt(C) = sqrt(tr C + 2 sqrt(det C))``; with
    ``C = sqrt(A) B sqrt(A)`` the extent term is rationalized so that its
    numerator is built from ``A - B`` only and does not cancel.
    """
    A, B = symmetrize(a.extent), symmetrize(b.extent)
    tA, tB = np.trace(A), np.trace(B)
    dA, dB = _det2(A), _det2(B)
    tol = 1e-12 * max(1.0, tA, tB) ** 2
    floored = dA < -tol or dB < -tol
    rA, rB = np.sqrt(max(dA, 0.0)), np.sqrt(max(dB, 0.0))

    D = A - B
    num = 2 * np.sum(D * D) - np.trace(D) ** 2 + 4 * (rA - rB) ** 2
    s = np.sqrt(max(np.sum(A * B) + 2 * rA * rB, 0.0))
    den = tA + tB + 2 * s
    extent_term = max(num, 0.0) / den if den > 0 else 0.0

    dc = a.center - b.center
    return float(np.sqrt(dc @ dc + extent_term)), bool(floored)


def gw_distance(a: EllipseSummary, b: EllipseSummary) -> float:
    return gw_distance_flagged(a, b)[0]


def rms_series(runs: list[ErrorSeries]) -> ErrorSeries:
    """Per-step root of the mean squared distance over runs."""
    if not runs:
        raise ValueError("no runs to aggregate")
    n = len(runs[0])
    if any(len(r) != n for r in runs):
        raise ValueError("error series lengths differ")
    if any(r.time_index != runs[0].time_index for r in runs):
        raise ValueError("error series time indices differ")
    d = np.array([r.gw for r in runs], dtype=float)
    rms = np.sqrt(np.mean(d**2, axis=0))
    return ErrorSeries(runs[0].time_index, tuple(float(x) for x in rms), "rms-over-runs")
