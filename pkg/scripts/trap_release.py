"""Ground state in a 2D trap, then free expansion after the trap is switched off."""

import argparse
from dataclasses import dataclass

from gpbose.gp_solver import GpProblem, minimize_gp
from gpbose.tdgp import TdgpConfig, evolve, released, rms_width


@dataclass
class Config:
    n: int = 128
    X: float = 16.0
    coupling: float = 50.0
    dt: float = 1e-3
    n_steps: int = 3000
    stride: int = 300


def main(cfg: Config):
    trap = GpProblem.trap(2, cfg.n, cfg.X, cfg.coupling)
    ground = minimize_gp(trap, tol_energy=1e-10)
    print(f"trapped ground state: E = {ground.energy:.8f}, mu = {ground.mu:.8f}")
    traj = evolve(ground, released(trap), TdgpConfig(cfg.dt, cfg.n_steps, snapshot_stride=cfg.stride))
    print(f"{'t':>8} {'rms width':>12} {'norm - 1':>12} {'energy':>14}")
    for t, w, nrm, e in zip(traj.times, traj.widths, traj.norms, traj.energies):
        print(f"{t:8.3f} {w:12.6f} {nrm - 1:12.2e} {e:14.8f}")
    print(f"norm drift {traj.norm_drift:.2e}, energy drift {traj.energy_drift:.2e}")
    print(f"final width {rms_width(traj.final.phi, trap.grid):.6f}")


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    for name, val in vars(Config()).items():
        ap.add_argument(f"--{name.replace('_', '-')}", type=type(val), default=val)
    main(Config(**vars(ap.parse_args())))
