"""Command-line driver: ``gpbose <command> [action] [--key value ...]``.

Parameters come from an optional config file (JSON, or ``key = value`` lines)
and are overridden by ``--key value`` flags. Every key is checked against a
per-command schema; all violations are reported together. Each run writes its
results plus ``manifest.json`` (resolved config, its hash, tolerances,
library versions, file list) into the output directory.

Exit codes: 0 success, 2 config error, 3 numerical failure, 4 I/O error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import platform
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .errors import ConfigError, NumericalError, ParseError, ValidationError
from .io import dumps, write_csv, write_field_binary, write_json
from .tolerances import TOLERANCES

OUTPUT_ENV = "GPBOSE_OUTPUT_DIR"
EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_IO = 0, 2, 3, 4
_REQUIRED = object()


# ---------------------------------------------------------------- schema

@dataclass(frozen=True)
class Param:
    kind: str  # float, int, bool, str, floats (scalar or list of floats)
    default: object = _REQUIRED
    check: str | None = None  # positive, nonnegative, or None
    choices: tuple | None = None


def _p(kind, default=_REQUIRED, check=None, choices=None):
    return Param(kind, default, check, choices)


POTENTIAL = {
    "potential": _p("str", choices=("hard-core", "square-well", "gaussian", "tabulated")),
    "R": _p("float", None, "positive"),
    "V0": _p("float", None, "nonnegative"),
    "amplitude": _p("float", None, "nonnegative"),
    "width": _p("float", None, "positive"),
    "table": _p("str", None),
}
TRAP = {
    "dim": _p("int", 2, choices=(2, 3)),
    "n": _p("int", 64, "positive"),
    "X": _p("float", 8.0, "positive"),
    "coupling": _p("float", 0.0, "nonnegative"),
    "freqs": _p("floats", 1.0, "positive"),
}

SCHEMAS = {
    "scatter": {
        "length": {**POTENTIAL, "r_max": _p("float", None, "positive"),
                   "grid_points": _p("int", 16384, "positive"), "N": _p("float", None, "positive"),
                   "profile": _p("bool", False)},
        "neumann": {**POTENTIAL, "N": _p("float", check="positive"), "ell0": _p("float", None, "positive"),
                    "grid_points": _p("int", 4096, "positive"), "kappa": _p("float", None, "positive")},
        "dyson": {"trials": _p("int", 1000, "positive"), "grid_points": _p("int", 4096, "positive")},
    },
    "ideal": {
        "critical": {"beta": _p("float", None, "positive"), "rho": _p("float", None, "positive")},
        "fraction": {"beta": _p("float", check="positive"), "rho": _p("float", check="positive"),
                     "L": _p("float", 1.0, "positive"), "extrapolate": _p("bool", False)},
        "sweep": {"rho": _p("float", check="positive"), "beta_min": _p("float", check="positive"),
                  "beta_max": _p("float", check="positive"), "n_beta": _p("int", 11, "positive"),
                  "L": _p("float", 1.0, "positive")},
        "free-energy": {"beta": _p("float", check="positive"), "N": _p("float", check="positive"),
                        "a": _p("float", 0.0, "nonnegative")},
    },
    "gp-min": {
        "torus": {"dim": _p("int", 3, choices=(1, 2, 3)), "n": _p("int", 32, "positive"),
                  "a": _p("float", check="nonnegative"), "init": _p("str", "random", choices=("default", "random")),
                  "tol_energy": _p("float", 1e-10, "positive"), "max_iter": _p("int", 5000, "positive"),
                  "write_field": _p("bool", True)},
        "trap": {**TRAP, "init": _p("str", "default", choices=("default", "random")),
                 "tol_energy": _p("float", 1e-10, "positive"), "max_iter": _p("int", 5000, "positive"),
                 "write_field": _p("bool", True)},
    },
    "gp-rotate": {
        "trap": {**TRAP, "Omega": _p("floats"), "tol_energy": _p("float", 1e-10, "positive"),
                 "max_iter": _p("int", 5000, "positive"), "write_field": _p("bool", True)},
    },
    "tdgp": {
        "evolve": {**TRAP, "dt": _p("float", 1e-3, "positive"), "n_steps": _p("int", 1000, "nonnegative"),
                   "stride": _p("int", 100, "nonnegative"),
                   "initial": _p("str", "ground", choices=("ground", "gaussian")),
                   "release": _p("bool", False),
                   "imprint": _p("str", "none", choices=("none", "vortex", "step")),
                   "charge": _p("int", 1), "snapshot_cap": _p("int", 64, "positive")},
    },
    "bogo": {
        "dispersion": {"a": _p("float", check="nonnegative"), "shells": _p("int", 5, "positive")},
        "energy": {"N": _p("int", check="positive"), "a": _p("float", check="nonnegative"),
                   "cutoff": _p("float", 64 * math.pi, "positive"), "M_max": _p("int", 256, "positive"),
                   "levels": _p("int", 3, "positive")},
        "depletion": {"a": _p("float", check="nonnegative"), "cutoff": _p("float", 64 * math.pi, "positive")},
        "elambda": {"M_max": _p("int", 256, "positive"), "levels": _p("int", 3, "positive")},
        "spectrum": {"a": _p("float", check="nonnegative"), "zeta": _p("float", check="positive"),
                     "mode_budget": _p("int", 20000, "positive")},
    },
    "oracle": {
        "pair": {"D": _p("float", check="positive"), "B": _p("float"), "nmax": _p("int", 60, "positive")},
        "random-pairs": {"count": _p("int", 20, "positive"), "ratio": _p("float", 0.5, "positive"),
                         "nmax": _p("int", 60, "positive")},
        "excitation-map": {"N": _p("int", check="positive"), "modes": _p("int", 3, choices=(2, 3))},
    },
}
DEFAULT_ACTION = {"scatter": "length", "ideal": "fraction", "gp-min": "torus", "gp-rotate": "trap",
                  "tdgp": "evolve", "bogo": "dispersion", "oracle": "pair"}
COMMON = {"command", "action", "output_dir", "seed", "threads"}


@dataclass
class RunConfig:
    command: str
    action: str
    parameters: dict
    output_dir: str
    seed: int = 0
    threads: int = 1

    def canonical(self):
        """The resolved config as a JSON-ready dict (no output directory)."""
        return {"command": self.command, "action": self.action, "seed": self.seed,
                "threads": self.threads, "parameters": self.parameters}

    def sha256(self):
        return hashlib.sha256(dumps(self.canonical()).encode()).hexdigest()


# ---------------------------------------------------------------- parsing

def _literal(text):
    text = text.strip()
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        low = text.lower()
        if low in ("true", "false"):
            return low == "true"
        return text


def _read_key_value(text):
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError("expected key = value", line=lineno)
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ParseError("empty key", line=lineno)
        if key in out:
            raise ParseError("duplicate key", line=lineno, key=key)
        out[key] = _literal(value)
    return out


def read_config_file(path):
    """Raw key tree from a JSON object or ``key = value`` file."""
    path = Path(path)
    text = path.read_text()
    if text.lstrip().startswith("{"):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as err:
            raise ParseError(err.msg, line=err.lineno) from None
        if not isinstance(data, dict):
            raise ParseError("top level must be an object")
        for key, value in data.items():
            if isinstance(value, dict):
                raise ParseError("nested tables are not supported", key=key)
        return data
    return _read_key_value(text)


def _coerce(key, spec, value, errors):
    kind = spec.kind
    if value is None and spec.default is None:
        return None
    if kind == "bool":
        if not isinstance(value, bool):
            errors.append((key, "expected true or false"))
            return None
        return value
    if kind == "int":
        if isinstance(value, bool) or not (isinstance(value, int) or (isinstance(value, float) and value.is_integer())):
            errors.append((key, "expected an integer"))
            return None
        value = int(value)
    elif kind == "float":
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            errors.append((key, "expected a number"))
            return None
        value = float(value)
        if not math.isfinite(value):
            errors.append((key, "must be finite"))
            return None
    elif kind == "floats":
        items = value if isinstance(value, list) else [value]
        if not items or any(isinstance(v, bool) or not isinstance(v, (int, float)) for v in items):
            errors.append((key, "expected a number or a list of numbers"))
            return None
        value = [float(v) for v in items] if isinstance(value, list) else float(value)
    elif kind == "str":
        if not isinstance(value, str):
            errors.append((key, "expected a string"))
            return None
    if spec.choices is not None and value not in spec.choices:
        errors.append((key, f"must be one of {list(spec.choices)}"))
        return None
    vals = value if isinstance(value, list) else [value]
    if spec.check == "positive" and not all(v > 0 for v in vals):
        errors.append((key, "must be positive"))
    elif spec.check == "nonnegative" and not all(v >= 0 for v in vals):
        errors.append((key, "must be >= 0"))
    return value


def _cross_checks(command, action, params, errors):
    if command == "scatter" and action in ("length", "neumann"):
        need = {"hard-core": ["R"], "square-well": ["R", "V0"], "gaussian": ["amplitude", "width"],
                "tabulated": ["table"]}.get(params.get("potential"), [])
        for key in need:
            if params.get(key) is None:
                errors.append((key, f"required for potential {params['potential']!r}"))
    if command == "ideal" and action == "critical":
        if (params.get("beta") is None) == (params.get("rho") is None):
            errors.append(("beta", "give exactly one of beta and rho"))
    if command == "ideal" and action == "sweep":
        if params.get("beta_min") is not None and params.get("beta_max") is not None \
                and params["beta_min"] > params["beta_max"]:
            errors.append(("beta_max", "must be >= beta_min"))
    if command == "ideal" and action == "free-energy" and params.get("N") is not None and params["N"] < 2 \
            and params.get("a"):
        errors.append(("N", "must be >= 2 when a > 0"))
    if command == "bogo" and action == "energy" and params.get("N") is not None and params["N"] < 2:
        errors.append(("N", "must be >= 2"))
    if command in ("bogo",) and action in ("energy", "depletion") and params.get("cutoff") is not None \
            and params["cutoff"] < 16 * math.pi:
        errors.append(("cutoff", "must be >= 16 pi"))
    if command == "bogo" and action == "elambda" or (command == "bogo" and action == "energy"):
        if params.get("M_max") is not None and params["M_max"] < 8:
            errors.append(("M_max", "must be >= 8"))
        if params.get("levels") is not None and params["levels"] < 2:
            errors.append(("levels", "must be >= 2"))
    if command == "oracle" and action == "pair" and params.get("D") is not None and params.get("B") is not None:
        if not params["D"] > abs(params["B"]):
            errors.append(("B", "need D > |B|"))
    if command == "oracle" and action == "random-pairs" and params.get("ratio") is not None \
            and params["ratio"] >= 1:
        errors.append(("ratio", "must be < 1"))
    if command == "oracle" and action == "excitation-map" and params.get("N") is not None and params["N"] > 6:
        errors.append(("N", "must be <= 6"))


def validate(raw, output_dir=None):
    """Check a raw key tree against the schema; returns a RunConfig or raises
    ValidationError listing every problem."""
    errors = []
    raw = dict(raw)
    command = raw.get("command")
    if command not in SCHEMAS:
        raise ValidationError([("command", f"must be one of {sorted(SCHEMAS)}")])
    action = raw.get("action", DEFAULT_ACTION[command])
    schema = SCHEMAS[command].get(action)
    if schema is None:
        raise ValidationError([("action", f"{command} supports {sorted(SCHEMAS[command])}")])
    params = {}
    for key in sorted(raw):
        if key not in COMMON and key not in schema:
            errors.append((key, "unknown key"))
    for key, spec in schema.items():
        if key in raw:
            params[key] = _coerce(key, spec, raw[key], errors)
        elif spec.default is _REQUIRED:
            errors.append((key, "missing required key"))
        else:
            params[key] = spec.default
    seed = raw.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
        errors.append(("seed", "must be a nonnegative integer"))
    threads = raw.get("threads", 1)
    if isinstance(threads, bool) or not isinstance(threads, int) or threads < 1:
        errors.append(("threads", "must be a positive integer"))
    _cross_checks(command, action, params, errors)
    if errors:
        raise ValidationError(errors)
    out = os.environ.get(OUTPUT_ENV) or output_dir or raw.get("output_dir") or f"gpbose-out/{command}"
    return RunConfig(command, action, params, str(out), seed, threads)


def parse_config(path, overrides=None):
    """Read and validate a config file; ``overrides`` take precedence."""
    raw = read_config_file(path)
    raw.update(overrides or {})
    return validate(raw)


# ---------------------------------------------------------------- results

@dataclass
class Report:
    """Files written by a command plus scalar results for ``result.json``."""

    out: Path
    scalars: dict = field(default_factory=dict)
    files: list = field(default_factory=list)

    def csv(self, name, header, rows):
        write_csv(self.out / name, header, rows)
        self.files.append(name)

    def json(self, name, obj):
        write_json(self.out / name, obj)
        self.files.append(name)

    def field(self, name, phi, grid, extra=None):
        path, side = write_field_binary(self.out / name, phi, grid.spacing, [grid.origin] * grid.dim, extra)
        self.files += [path.name, side.name]


def _potential(p):
    from .scattering import RadialPotential

    kind = p["potential"]
    if kind == "hard-core":
        return RadialPotential.hard_core(p["R"])
    if kind == "square-well":
        return RadialPotential.square_well(p["V0"], p["R"])
    if kind == "gaussian":
        return RadialPotential.gaussian(p["amplitude"], p["width"])
    return RadialPotential.from_csv(p["table"])


def _scatter(cfg, rep):
    from .scattering import (eta_coefficients, run_dyson_trials, scattering_length_integral,
                             solve_neumann, solve_zero_energy)

    p = cfg.parameters
    if cfg.action == "dyson":
        res = run_dyson_trials(p["trials"], cfg.seed, p["grid_points"])
        rep.csv("dyson_trials.csv", ["trial", "lhs", "rhs", "a", "satisfied"],
                [(k, r.lhs, r.rhs, r.a, r.satisfied) for k, r in enumerate(res)])
        rep.scalars.update(trials=len(res), violations=sum(not r.satisfied for r in res))
        return
    V = _potential(p)
    if cfg.action == "length":
        W = V.scaled(p["N"]) if p["N"] is not None else V
        sol = solve_zero_energy(W, r_max=p["r_max"], grid_points=p["grid_points"])
        rep.scalars.update(a=sol.a, R0=sol.R0, r_max=sol.r_max, residual=sol.residual,
                           a_integral=scattering_length_integral(W, sol),
                           born_bound=W.fourier_zero() / (8 * math.pi) if W.integrable else None)
        if p["N"] is not None:
            rep.scalars["a_times_N"] = sol.a * p["N"]
        if p["profile"]:
            sol.to_csv(rep.out / "profile.csv")
            rep.files.append("profile.csv")
        return
    sol = solve_neumann(V, p["N"], ell0=p["ell0"], grid_points=p["grid_points"])
    rep.scalars.update(lambda_N=sol.lambda_N, ell0=sol.ell0, N=sol.N, p_cutoff=sol.p_cutoff,
                       iterations=sol.iterations)
    rep.csv("neumann_profile.csv", ["r", "f_N", "eta"], zip(sol.r, sol.f_N, sol.eta_position))
    rep.csv("eta_shells.csv", ["m", "abs_p", "eta"],
            [(m, 2 * math.pi * math.sqrt(m), v) for m, v in sorted(sol.eta_fourier.items())])
    if p["kappa"] is not None:
        eta = eta_coefficients(sol, p["kappa"])
        rep.csv("eta_map.csv", ["n1", "n2", "n3", "eta"], [(*n, v) for n, v in eta.items()])


def _ideal(cfg, rep):
    from .ideal_gas import (TorusSpec, condensate_fraction, critical_beta, critical_density,
                            free_energy_gp, free_energy_ideal, interaction_correction, solve_mu, sweep)

    p = cfg.parameters
    if cfg.action == "critical":
        if p["beta"] is not None:
            rep.scalars.update(beta=p["beta"], rho_c=critical_density(p["beta"]))
        else:
            rep.scalars.update(rho=p["rho"], beta_c=critical_beta(p["rho"]))
    elif cfg.action == "fraction":
        s = solve_mu(p["beta"], p["rho"], TorusSpec(p["L"]))
        rep.scalars.update(mu=s.mu, fraction=s.fraction, rho0=s.rho0, rho_plus=s.rho_plus,
                           rho_c=critical_density(p["beta"]), m_max=s.m_max)
        if p["extrapolate"]:
            rep.scalars["fraction_extrapolated"] = condensate_fraction(p["beta"], p["rho"], TorusSpec(p["L"]),
                                                                       extrapolate=True)
    elif cfg.action == "sweep":
        betas = np.linspace(p["beta_min"], p["beta_max"], p["n_beta"])
        rep.csv("sweep.csv", ["beta", "mu", "fraction", "free_energy"], sweep(betas, p["rho"], TorusSpec(p["L"])))
    else:
        rep.scalars.update(F0=free_energy_ideal(p["beta"], p["N"]))
        if p["a"] > 0:
            rep.scalars.update(correction=interaction_correction(p["beta"], p["N"], p["a"]),
                               F=free_energy_gp(p["beta"], p["N"], p["a"]))


def _trap_problem(p, Omega=None):
    from .gp_solver import GpProblem

    return GpProblem.trap(p["dim"], p["n"], p["X"], p["coupling"], p["freqs"], Omega)


def _state_scalars(rep, s):
    rep.scalars.update(energy=s.energy, mu=s.mu, residual=s.residual, iterations=s.iterations,
                       norm=s.norm, breakdown=s.breakdown)


def _gp_min(cfg, rep):
    from .gp_solver import GpProblem, default_init, minimize_gp, random_init

    p = cfg.parameters
    P = GpProblem.torus(p["dim"], p["n"], p["a"]) if cfg.action == "torus" else _trap_problem(p)
    init = random_init(P, np.random.default_rng(cfg.seed)) if p["init"] == "random" else default_init(P)
    s = minimize_gp(P, init, tol_energy=p["tol_energy"], max_iter=p["max_iter"])
    _state_scalars(rep, s)
    rep.csv("history.csv", ["iteration", "energy"], enumerate(s.history))
    if p["write_field"]:
        rep.field("phi.bin", s.phi, P.grid, {"energy": s.energy})


def _gp_rotate(cfg, rep):
    from .gp_solver import minimize_gp_rotating

    p = cfg.parameters
    P = _trap_problem(p, p["Omega"])
    s = minimize_gp_rotating(P, tol_energy=p["tol_energy"], max_iter=p["max_iter"], seed=cfg.seed)
    _state_scalars(rep, s)
    rep.csv("history.csv", ["iteration", "energy"], enumerate(s.history))
    if p["write_field"]:
        rep.field("phi.bin", s.phi, P.grid, {"energy": s.energy})


def _tdgp(cfg, rep):
    from .gp_solver import minimize_gp
    from .tdgp import TdgpConfig, evolve, phase_imprint, released

    p = cfg.parameters
    P = _trap_problem(p)
    if p["initial"] == "ground":
        phi = minimize_gp(P, tol_energy=1e-12).phi
    else:
        x = P.grid.axes()
        phi = np.exp(-0.5 * sum(xi * xi for xi in x)) + 0j
        phi /= math.sqrt(float(np.sum(np.abs(phi) ** 2)) * P.grid.dV)
    if p["imprint"] != "none":
        phi = phase_imprint(phi, P.grid, p["imprint"], p["charge"])
    target = released(P) if p["release"] else P
    tr = evolve(phi, target, TdgpConfig(p["dt"], p["n_steps"], p["stride"], p["snapshot_cap"]),
                output_dir=rep.out)
    rep.files += tr.files + [f + ".json" for f in tr.files] + ["trajectory.json"]
    rep.csv("trajectory.csv", ["time", "norm", "energy", "rms_width"],
            zip(tr.times, tr.norms, tr.energies, tr.widths))
    rep.scalars.update(norm_drift=tr.norm_drift, energy_drift=tr.energy_drift,
                       snapshots=[{"time": t, "file": f} for t, f in zip(tr.times, tr.files)])


def _bogo(cfg, rep):
    from .bogoliubov import (depletion, dispersion_shell, e_lambda, enumerate_spectrum,
                             ground_state_energy)
    from .lattice import shell_counts

    p = cfg.parameters
    if cfg.action == "dispersion":
        counts = shell_counts(p["shells"] * p["shells"] * 4)
        ms = [m for m in range(1, len(counts)) if counts[m] > 0][: p["shells"]]
        eps = dispersion_shell(ms, p["a"])
        rep.csv("dispersion.csv", ["abs_p", "eps"],
                [(2 * math.pi * math.sqrt(m), float(e)) for m, e in zip(ms, eps)])
    elif cfg.action == "energy":
        r = ground_state_energy(p["N"], p["a"], p["cutoff"], p["M_max"], p["levels"])
        rep.scalars.update(vars(r))
    elif cfg.action == "depletion":
        r = depletion(p["a"], p["cutoff"])
        rep.scalars.update(value=r.value, tail_estimate=r.tail_estimate)
    elif cfg.action == "elambda":
        r = e_lambda(p["M_max"], p["levels"])
        rep.scalars.update(value=r.value, uncertainty=r.uncertainty)
        rep.csv("elambda.csv", ["M", "partial_sum", "smoothed"], zip(r.cutoffs, r.partial_sums, r.accelerated))
    else:
        lines = enumerate_spectrum(p["a"], p["zeta"], mode_budget=p["mode_budget"])
        rep.csv("spectrum.csv", ["energy", "degeneracy", "patterns"],
                [(l.energy, l.degeneracy, " ".join("+".join(f"{m}:{k}" for m, k in pat) or "vacuum"
                                                   for pat in l.patterns)) for l in lines])
        rep.scalars.update(lines=len(lines), caveat="finite-N correction O(N^-1/4 zeta^3) not evaluated")


def _pair_result(D, B, nmax):
    from .fock_oracle import (QuadraticHamiltonian, distinct_gaps, exact_ground_state, excited_levels,
                              pair_space, symplectic_diagonalize)

    h = QuadraticHamiltonian([D], [B])
    d = symplectic_diagonalize(h)
    space = pair_space(1, nmax)
    g = exact_ground_state(h, space)
    gap = distinct_gaps(excited_levels(h, space, 3))[0][0]
    eps = d.eps[0]
    return {"D": D, "B": B, "nmax": nmax, "gap_exact": gap, "eps_symplectic": eps, "gap_difference": gap - eps,
            "ground_exact": g.energy, "ground_symplectic": d.ground_energy(h),
            "excitations_exact": g.excitations, "excitations_symplectic": (D - eps) / eps,
            "tau": d.tau[0], "boundary_weight": g.boundary_weight, "truncation_estimate": g.truncation_estimate}


def _oracle(cfg, rep):
    from .fock_oracle import ModeSet, excitation_map_check

    p = cfg.parameters
    if cfg.action == "pair":
        rep.scalars.update(_pair_result(p["D"], p["B"], p["nmax"]))
    elif cfg.action == "random-pairs":
        rng = np.random.default_rng(cfg.seed)
        D = rng.uniform(1.0, 100.0, p["count"])
        B = D * rng.uniform(-p["ratio"], p["ratio"], p["count"])
        rows = [_pair_result(float(d), float(b), p["nmax"]) for d, b in zip(D, B)]
        keys = ["D", "B", "gap_exact", "eps_symplectic", "gap_difference", "excitations_exact",
                "excitations_symplectic"]
        rep.csv("pairs.csv", keys, [[r[k] for k in keys] for r in rows])
        rep.scalars.update(max_gap_difference=max(abs(r["gap_difference"]) for r in rows),
                           max_excitation_difference=max(abs(r["excitations_exact"] - r["excitations_symplectic"])
                                                         for r in rows))
    else:
        modes = ((0, 0, 0), (1, 0, 0), (-1, 0, 0))[: p["modes"]]
        r = excitation_map_check(p["N"], ModeSet(modes, paired=False))
        rep.scalars.update(N=r.N, dimension=r.dimension, deviations=r.deviations, max_deviation=r.max_deviation)


HANDLERS = {"scatter": _scatter, "ideal": _ideal, "gp-min": _gp_min, "gp-rotate": _gp_rotate,
            "tdgp": _tdgp, "bogo": _bogo, "oracle": _oracle}


def versions():
    return {"gpbose": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
            "python": platform.python_version()}


def emit_report(cfg, rep):
    """Write ``result.json`` (if there are scalars) and the manifest."""
    if rep.scalars:
        rep.json("result.json", rep.scalars)
    manifest = {"config": cfg.canonical(), "config_sha256": cfg.sha256(), "tolerances": TOLERANCES,
                "versions": versions(), "files": sorted(rep.files)}
    write_json(rep.out / "manifest.json", manifest)
    return manifest


def run(cfg):
    """Execute a validated config; returns the manifest dict."""
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    rep = Report(out)
    HANDLERS[cfg.command](cfg, rep)
    return emit_report(cfg, rep)


# ---------------------------------------------------------------- entry point

def _flags_to_dict(tokens):
    out = {}
    i = 0
    while i < len(tokens):
        tok = tokens[i]
        if not tok.startswith("--") or len(tok) == 2:
            raise ParseError(f"unexpected argument {tok!r}")
        if "=" in tok:
            key, value = tok[2:].split("=", 1)
            i += 1
        else:
            if i + 1 >= len(tokens):
                raise ParseError("flag without a value", key=tok[2:])
            key, value = tok[2:], tokens[i + 1]
            i += 2
        out[key.replace("-", "_")] = _literal(value)
    return out


def _error(kind, exc, code, out_dir):
    payload = {"error": kind, "type": type(exc).__name__, "message": str(exc), "exit_code": code}
    if isinstance(exc, ValidationError):
        payload["violations"] = [{"key": k, "message": m} for k, m in exc.violations]
    if isinstance(exc, ParseError):
        payload.update(line=exc.line, key=exc.key)
    sys.stderr.write(dumps(payload))
    if out_dir is not None:
        try:
            Path(out_dir).mkdir(parents=True, exist_ok=True)
            write_json(Path(out_dir) / "error.json", payload)
        except OSError:
            pass
    return code


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    # positionals are split off by hand: argparse would otherwise bind them to
    # the values of unknown --key flags
    positional = []
    while argv and not argv[0].startswith("-") and len(positional) < 2:
        positional.append(argv.pop(0))
    parser = argparse.ArgumentParser(
        prog="gpbose", allow_abbrev=False, description=__doc__.split("\n\n")[0],
        usage="gpbose [command [action]] [--config FILE] [--key value ...]",
        epilog="commands: " + ", ".join(SCHEMAS))
    parser.add_argument("--config", help="JSON or key = value config file")
    args, rest = parser.parse_known_args(argv)
    cfg = None
    try:
        raw = read_config_file(args.config) if args.config else {}
        raw.update(_flags_to_dict(rest))
        if positional:
            raw["command"] = positional[0]
        if len(positional) > 1:
            raw["action"] = positional[1]
        cfg = validate(raw)
        manifest = run(cfg)
    except ConfigError as exc:
        return _error("config", exc, EXIT_CONFIG, None)
    except NumericalError as exc:
        return _error("numerical", exc, EXIT_NUMERICAL, cfg.output_dir if cfg else None)
    except OSError as exc:
        return _error("io", exc, EXIT_IO, None)
    sys.stdout.write(dumps({"output_dir": cfg.output_dir, "files": manifest["files"]}))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
