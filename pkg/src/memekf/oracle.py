"""Monte-Carlo estimates of the moments the filter computes analytically.

Test-facing only; the filter never calls this module. To keep the check
independent, nothing from :mod:`memekf.moments` is used here: the shape
matrix and pseudo-measurement are rebuilt from scratch on sample arrays.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import NamedTuple

import numpy as np

from . import rng

MIN_SAMPLES = 10_000
BLOCK = 200_000


class MCEstimate(NamedTuple):
    value: np.ndarray
    se: np.ndarray
    samples: int


@dataclass(frozen=True)
class OracleReport:
    target: str
    analytic: list
    mc: list
    samples: int
    rel_error: float
    mc_se: list

    def to_dict(self) -> dict:
        return asdict(self)


def make_report(target: str, analytic, est: MCEstimate) -> OracleReport:
    analytic = np.asarray(analytic, dtype=float)
    denom = np.linalg.norm(est.value)
    diff = np.linalg.norm(analytic - est.value)
    rel = float(diff / denom) if denom > 0 else float(diff)
    return OracleReport(target, analytic.tolist(), est.value.tolist(), est.samples, rel, est.se.tolist())


def _check_n(N: int):
    if N < MIN_SAMPLES:
        raise ValueError(f"need at least {MIN_SAMPLES} samples, got {N}")


def _blocks(N: int, seed: int, tag: int):
    done, b = 0, 0
    while done < N:
        n = min(BLOCK, N - done)
        yield rng.stream(seed, rng.ORACLE, tag, b), n
        done += n
        b += 1


def _gauss(gen, mean, cov, n):
    mean = np.asarray(mean, dtype=float)
    w, V = np.linalg.eigh(np.asarray(cov, dtype=float))
    root = V * np.sqrt(np.clip(w, 0, None))
    return mean + gen.standard_normal((n, mean.size)) @ root.T


def _rotate_scale(p: np.ndarray, h: np.ndarray) -> np.ndarray:
    """Row-wise R(alpha) diag(l1, l2) h."""
    a, l1, l2 = p[:, 0], p[:, 1], p[:, 2]
    u, w = l1 * h[:, 0], l2 * h[:, 1]
    return np.column_stack([np.cos(a) * u - np.sin(a) * w, np.sin(a) * u + np.cos(a) * w])


def _squares(e: np.ndarray) -> np.ndarray:
    return np.column_stack([e[:, 0] ** 2, e[:, 1] ** 2, e[:, 0] * e[:, 1]])


def _cross_cov(a: np.ndarray, b: np.ndarray) -> MCEstimate:
    """Sample cross-covariance of the columns of ``a`` and ``b`` with entrywise SE."""
    n = a.shape[0]
    da = a - a.mean(axis=0)
    db = b - b.mean(axis=0)
    prod = da[:, :, None] * db[:, None, :]
    value = prod.sum(axis=0) / (n - 1)
    se = prod.std(axis=0, ddof=1) / np.sqrt(n)
    return MCEstimate(value, se, n)


def mc_spread_cov(p_hat, C_p, C_h, N: int, seed: int) -> MCEstimate:
    """Covariance of ``S(p) h`` with ``p ~ N(p_hat, C_p)``, ``h ~ N(0, C_h)``."""
    _check_n(N)
    z = []
    for gen, n in _blocks(N, seed, 0):
        p = _gauss(gen, p_hat, C_p, n)
        h = _gauss(gen, np.zeros(2), C_h, n)
        z.append(_rotate_scale(p, h))
    z = np.concatenate(z)
    return _cross_cov(z, z)


def mc_pseudo_moments(C_y, N: int, seed: int) -> tuple[MCEstimate, MCEstimate]:
    """Mean and covariance of the squared-centred-detection vector for ``y ~ N(0, C_y)``."""
    _check_n(N)
    Y = []
    for gen, n in _blocks(N, seed, 1):
        Y.append(_squares(_gauss(gen, np.zeros(2), C_y, n)))
    Y = np.concatenate(Y)
    mean = MCEstimate(Y.mean(axis=0), Y.std(axis=0, ddof=1) / np.sqrt(len(Y)), len(Y))
    return mean, _cross_cov(Y, Y)


def _generative_samples(gen, n, r_hat, C_r, C_h, C_v):
    """Location offset, multiplicative noise and sensor noise samples."""
    r = _gauss(gen, r_hat[:2], np.asarray(C_r)[:2, :2], n)
    h = _gauss(gen, np.zeros(2), C_h, n)
    v = _gauss(gen, np.zeros(2), C_v, n)
    return r - r_hat[:2], h, v


def mc_cross_cov(p_hat, C_p, C_h, C_v, r_hat, C_r, N: int, seed: int) -> MCEstimate:
    """Cross-covariance between shape parameters and pseudo-measurement under
    ``y = H r + S(p) h + v`` with the pseudo-measurement centred on ``H r_hat``."""
    _check_n(N)
    r_hat = np.asarray(r_hat, dtype=float)
    ps, Ys = [], []
    for gen, n in _blocks(N, seed, 2):
        p = _gauss(gen, p_hat, C_p, n)
        dr, h, v = _generative_samples(gen, n, r_hat, C_r, C_h, C_v)
        e = dr + _rotate_scale(p, h) + v
        ps.append(p)
        Ys.append(_squares(e))
    return _cross_cov(np.concatenate(ps), np.concatenate(Ys))


def mc_pseudo_jacobian(p_hat, C_h, C_v, r_hat, C_r, N: int, seed: int, step: float = 1e-5) -> MCEstimate:
    """Expectation over ``(r, h, v)`` of the pseudo-measurement's derivative w.r.t.
    the shape parameters at ``p_hat``, by central differences per sample."""
    _check_n(N)
    p_hat = np.asarray(p_hat, dtype=float)
    r_hat = np.asarray(r_hat, dtype=float)
    rows = []
    for gen, n in _blocks(N, seed, 3):
        dr, h, v = _generative_samples(gen, n, r_hat, C_r, C_h, C_v)
        D = np.empty((n, 3, 3))
        for j in range(3):
            dp = np.zeros(3)
            dp[j] = step
            plus = _squares(dr + _rotate_scale(np.tile(p_hat + dp, (n, 1)), h) + v)
            minus = _squares(dr + _rotate_scale(np.tile(p_hat - dp, (n, 1)), h) + v)
            D[:, :, j] = (plus - minus) / (2 * step)
        rows.append(D)
    D = np.concatenate(rows)
    return MCEstimate(D.mean(axis=0), D.std(axis=0, ddof=1) / np.sqrt(len(D)), len(D))


def fd_expected_pseudo_jacobian(p_hat, C_h, step: float = 1e-6) -> np.ndarray:
    """Deterministic counterpart of :func:`mc_pseudo_jacobian`.

    The expected pseudo-measurement depends on the shape only through the
    spread ``S(p) C_h S(p)^T``, so its derivative equals the expected
    derivative; this differentiates that spread numerically.
    """
    p_hat = np.asarray(p_hat, dtype=float)
    C_h = np.asarray(C_h, dtype=float)

    def spread(p):
        a, l1, l2 = p
        R = np.array([[np.cos(a), -np.sin(a)], [np.sin(a), np.cos(a)]])
        S = R * np.array([l1, l2])
        C = S @ C_h @ S.T
        return np.array([C[0, 0], C[1, 1], C[0, 1]])

    out = np.empty((3, 3))
    for j in range(3):
        dp = np.zeros(3)
        dp[j] = step * max(1.0, abs(p_hat[j]))
        out[:, j] = (spread(p_hat + dp) - spread(p_hat - dp)) / (2 * dp[j])
    return out


def fd_shape_row_jacobians(p, step: float = 1e-6) -> tuple[np.ndarray, np.ndarray]:
    """Central-difference Jacobians of the two rows of the shape matrix."""
    p = np.asarray(p, dtype=float)

    def rows(q):
        a, l1, l2 = q
        return np.array([[np.cos(a) * l1, -np.sin(a) * l2], [np.sin(a) * l1, np.cos(a) * l2]])

    J = np.empty((2, 2, 3))
    for j in range(3):
        dp = np.zeros(3)
        dp[j] = step * max(1.0, abs(p[j]))
        J[:, :, j] = (rows(p + dp) - rows(p - dp)) / (2 * dp[j])
    return J[0], J[1]
