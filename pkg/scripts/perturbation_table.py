"""c_1(a) against e^{-a} when K is shifted by a(N/S) past the c = 1 threshold.

c_1(a)/e^{-a} = (1 + a/x0)^r with x0 = S K0 / N, so the ratio drifts back to
one only as fast as x0 grows, i.e. like log N.

    python scripts/perturbation_table.py --S 1000 --R 2
"""

import argparse
import math
from dataclasses import dataclass

from occupancy.asymptotics import perturbation_c, solve_K0


@dataclass
class Config:
    S: int = 1000
    R: int = 2
    sizes: tuple = (10**4, 10**6, 10**8, 10**12)
    shifts: tuple = (-3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0)


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--S", type=int, default=Config.S)
    ap.add_argument("--R", type=int, default=Config.R)
    ap.add_argument("--N", type=float, nargs="+", default=list(Config.sizes))
    a = ap.parse_args()
    cfg = Config(a.S, a.R, tuple(int(n) for n in a.N))

    print("ratio c_1(a) / e^{-a}")
    print(f"{'N':>14} {'x0':>8} " + " ".join(f"{f'a={s:g}':>8}" for s in cfg.shifts))
    for N in cfg.sizes:
        x0 = solve_K0(N, cfg.S, cfg.R) * cfg.S / N
        cells = []
        for s in cfg.shifts:
            try:
                cells.append(f"{perturbation_c(N, cfg.S, cfg.R, s) / math.exp(-s):>8.4f}")
            except ValueError:
                cells.append(f"{'-':>8}")
        print(f"{N:>14} {x0:>8.3f} " + " ".join(cells))


if __name__ == "__main__":
    main()
