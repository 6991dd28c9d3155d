"""Exact Fock-space diagonalisation of lattice pair Hamiltonians against the quasi-particle formulas."""

import argparse
import math
from dataclasses import dataclass

from gpbose.bogoliubov import depletion_summand, dispersion_shell
from gpbose.fock_oracle import (
    QuadraticHamiltonian,
    distinct_gaps,
    exact_ground_state,
    excited_levels,
    pair_space,
    symplectic_diagonalize,
)


@dataclass
class Config:
    a: float = 0.2
    shells: int = 4
    n_max: int = 40


def main(cfg: Config):
    b = 8 * math.pi * cfg.a
    print(f"{'|n|^2':>5} {'gap exact':>14} {'eps formula':>14} {'<N+> exact':>14} {'<N+> formula':>14}")
    for m in range(1, cfg.shells + 1):
        p2 = (2 * math.pi) ** 2 * m
        h = QuadraticHamiltonian([p2 + b], [b])
        space = pair_space(1, cfg.n_max)
        g = exact_ground_state(h, space)
        gap = distinct_gaps(excited_levels(h, space, 3))[0][0]
        d = symplectic_diagonalize(h)
        print(f"{m:5d} {gap:14.10f} {dispersion_shell(m, cfg.a):14.10f} "
              f"{g.excitations:14.3e} {2 * depletion_summand(p2, cfg.a):14.3e}")
        print(f"      ground energy exact {g.energy:.10f}, formula {d.ground_energy(h):.10f}")


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    for name, val in vars(Config()).items():
        ap.add_argument(f"--{name.replace('_', '-')}", type=type(val), default=val)
    main(Config(**vars(ap.parse_args())))
