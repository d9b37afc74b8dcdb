"""Exact occupation probability at K = (N/S) ln(N/S) as N grows with N/S fixed.

The limit is e^{-1}; the table shows how fast the finite-N value gets there,
next to e^{-c} evaluated at the same finite N.

    python scripts/convergence.py --ratio 100 --N 1e3 1e4 1e5
"""

import argparse
import math
import time
from dataclasses import dataclass

from occupancy import SubsetModelParams, c_subset, subset_prob_exact


@dataclass
class Config:
    ratio: int = 100  # N/S, the number of blocks
    sizes: tuple = (10**3, 10**4, 10**5)
    R: int = 1


def run(cfg: Config):
    rows = []
    for N in cfg.sizes:
        S = N // cfg.ratio
        K = math.ceil(cfg.ratio * math.log(cfg.ratio))
        p = SubsetModelParams(N, S, K, cfg.R)
        t0 = time.perf_counter()
        exact = subset_prob_exact(p).value
        rows.append((N, S, K, exact, c_subset(p).prob, time.perf_counter() - t0))
    return rows


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--ratio", type=int, default=Config.ratio)
    ap.add_argument("--N", type=float, nargs="+", default=list(Config.sizes))
    ap.add_argument("--R", type=int, default=Config.R)
    a = ap.parse_args()
    cfg = Config(a.ratio, tuple(int(n) for n in a.N), a.R)

    print(f"{'N':>10} {'S':>8} {'K':>6} {'exact':>10} {'e^-c':>10} {'|exact-1/e|':>12} {'sec':>6}")
    for N, S, K, exact, asym, sec in run(cfg):
        print(f"{N:>10} {S:>8} {K:>6} {exact:>10.6f} {asym:>10.6f} {abs(exact - math.exp(-1)):>12.6f} {sec:>6.2f}")


if __name__ == "__main__":
    main()
