"""How far the linearized spread and cross-covariances drift from Monte Carlo
as the shape uncertainty grows.

The prior covariance diag(1, 4, 9) around (0, 2, 12) is scaled by s; for each
s the relative Frobenius error of C_I + C_II and of C_p M^T against 10^6
samples is printed. The error shrinks roughly linearly in s.
"""
import argparse

import numpy as np

from memekf import oracle
from memekf.moments import pseudo_cross_cov, spread_covariance

P_HAT = np.array([0.0, 2.0, 12.0])
C_P = np.diag([1.0, 4.0, 9.0])
C_H = np.eye(2) / 4
C_V = np.diag([2.0, 2.0])
R_HAT, C_R = np.array([1.0, 1.0]), np.eye(2)


def rel(a, b):
    return np.linalg.norm(a - b) / np.linalg.norm(b)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--samples", type=int, default=1_000_000)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    print(f"{'scale':>8} {'spread rel':>11} {'cross rel':>10}")
    for s in (1.0, 0.3, 0.1, 0.03, 0.01):
        C_p = C_P * s
        C_I, C_II = spread_covariance(P_HAT, C_p, C_H)
        spread = oracle.mc_spread_cov(P_HAT, C_p, C_H, args.samples, args.seed)
        cross = oracle.mc_cross_cov(P_HAT, C_p, C_H, C_V, R_HAT, C_R, args.samples, args.seed)
        print(f"{s:8.2f} {rel(C_I + C_II, spread.value):11.4f} "
              f"{rel(pseudo_cross_cov(P_HAT, C_p, C_H), cross.value):10.4f}")


if __name__ == "__main__":
    main()
