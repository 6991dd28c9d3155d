"""Finite-box condensate fraction of the ideal Bose gas and its large-box limit."""

import argparse
from dataclasses import dataclass

from gpbose.ideal_gas import TorusSpec, condensate_fraction, critical_density


@dataclass
class Config:
    beta: float = 1.0
    density_ratio: float = 2.0
    sides: tuple = (4.0, 8.0, 16.0, 32.0, 64.0)


def main(cfg: Config):
    rho_c = critical_density(cfg.beta)
    rho = cfg.density_ratio * rho_c
    limit = max(0.0, 1 - 1 / cfg.density_ratio)
    print(f"rho_c = {rho_c:.12f}, rho = {rho:.12f}, bulk fraction {limit:.6f}")
    print(f"{'L':>6} {'fraction':>12} {'extrapolated':>14}")
    for L in cfg.sides:
        f = condensate_fraction(cfg.beta, rho, TorusSpec(L))
        fx = condensate_fraction(cfg.beta, rho, TorusSpec(L), extrapolate=True)
        print(f"{L:6.1f} {f:12.6f} {fx:14.6f}")


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--beta", type=float, default=Config.beta)
    ap.add_argument("--density-ratio", type=float, default=Config.density_ratio)
    ap.add_argument("--sides", type=float, nargs="+", default=list(Config.sides))
    a = ap.parse_args()
    main(Config(a.beta, a.density_ratio, tuple(a.sides)))
