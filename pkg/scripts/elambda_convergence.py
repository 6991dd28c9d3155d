"""Cube partial sums S(M) of cos|n|/|n|^2 and the smoothed constant e = 2 - lim S."""

import argparse
from dataclasses import dataclass

import numpy as np

from gpbose.bogoliubov import cube_partial_sums, e_lambda


@dataclass
class Config:
    M_max: int = 256
    levels: int = 6


def main(cfg: Config):
    r = e_lambda(cfg.M_max, cfg.levels)
    raw = cube_partial_sums(cfg.M_max)
    print(f"{'M':>5} {'S(M)':>18} {'2 - smoothed S':>18} {'change':>10}")
    prev = None
    for M, acc in zip(r.cutoffs, r.accelerated):
        change = "" if prev is None else f"{abs(acc - prev):10.2e}"
        print(f"{M:5d} {raw[M]:18.10f} {acc:18.10f} {change}")
        prev = acc
    print(f"limit {r.value:.10f} +- {r.uncertainty:.1e}")
    print(f"S(M) oscillation over last octave: {np.ptp(raw[cfg.M_max // 2:]):.3e}")


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--M-max", type=int, default=Config.M_max)
    ap.add_argument("--levels", type=int, default=Config.levels)
    a = ap.parse_args()
    main(Config(a.M_max, a.levels))
