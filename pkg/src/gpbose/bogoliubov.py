"""Second-order formulas on the unit torus and the free-boson excitation spectrum.

Momenta live on 2 pi Z^3. The excitation energy of mode p is
``eps(p) = sqrt(|p|^4 + 16 pi a |p|^2)``; all absolutely convergent lattice sums
are cut off spherically and grouped by shell ``|n|^2 = m`` (p = 2 pi n), so every
sum runs over shell counts r3(m) rather than individual vectors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import NoConvergence, ThresholdTooLarge, ZeroMomentum
from .lattice import lattice_vectors, shell_counts
from .tolerances import tol

TWO_PI = 2.0 * math.pi
CAVEAT_ENERGY = "finite-N correction O(N^-1/4) not evaluated"
CAVEAT_SPECTRUM = "finite-N correction O(N^-1/4 zeta^3) not evaluated"


# ---------------------------------------------------------------- dispersion

def _eps_from_p2(p2, a):
    # written as sqrt(p2 * (p2 + 16 pi a)) so that a = 0 returns p2 exactly
    p2 = np.asarray(p2, dtype=float)
    return np.sqrt(p2 * (p2 + 16.0 * math.pi * a))


def dispersion(p, a):
    """Excitation energy for momentum ``p`` (a vector, or an array of vectors
    along the last axis)."""
    if a < 0:
        raise ValueError("a must be >= 0")
    p = np.asarray(p, dtype=float)
    p2 = np.sum(p * p, axis=-1)
    if np.any(p2 == 0):
        raise ZeroMomentum("dispersion is undefined at p = 0")
    out = _eps_from_p2(p2, a)
    return float(out) if out.ndim == 0 else out


def dispersion_shell(m, a):
    """eps for the lattice shell |n|^2 = m, i.e. |p|^2 = (2 pi)^2 m."""
    return _eps_from_p2(TWO_PI**2 * np.asarray(m, dtype=float), a)


# ---------------------------------------------------------------- e_Lambda

def _bump(t):
    out = np.zeros_like(t)
    inside = (t > 0) & (t < 1)
    ti = t[inside]
    out[inside] = np.exp(-1.0 / (ti * (1.0 - ti)))
    return out


@lru_cache(maxsize=8)
def _cube_shells(M_max):
    """Contribution of each cube shell max|n_i| = M to sum cos|n| / |n|^2.

    Enumerates the full cube slab by slab in x (x and -x give equal slabs).
    Per-slab shell sums are combined with fsum, so the result does not depend
    on slab ordering.
    """
    ax = np.arange(-M_max, M_max + 1, dtype=float)
    y, z = np.meshgrid(ax, ax, indexing="ij")
    yz2 = y * y + z * z
    yz_max = np.maximum(np.abs(y), np.abs(z)).astype(np.int64)
    per_slab = np.zeros((M_max + 1, M_max + 1))
    for x in range(M_max + 1):
        r2 = yz2 + x * x
        with np.errstate(divide="ignore", invalid="ignore"):
            f = np.where(r2 > 0, np.cos(np.sqrt(r2)) / r2, 0.0)
        shell = np.maximum(yz_max, x)
        per_slab[x] = np.bincount(shell.ravel(), weights=f.ravel(), minlength=M_max + 1)
    per_slab[1:] *= 2.0
    out = np.array([math.fsum(per_slab[:, M]) for M in range(M_max + 1)])
    out.flags.writeable = False
    return out


def cube_partial_sums(M_max):
    """S(M) = sum over n in Z^3 \\ {0} with max|n_i| <= M of cos|n| / |n|^2,
    for M = 0..M_max."""
    return np.cumsum(_cube_shells(int(M_max)))


def octant_partial_sums(M_max):
    """Same partial sums from the closed octant n_i >= 0 only.

    A point with k nonzero coordinates stands for 2^k points of the cube, which
    folds the 8 open octants together with their faces, edges and axes.
    """
    M_max = int(M_max)
    ax = np.arange(M_max + 1, dtype=float)
    y, z = np.meshgrid(ax, ax, indexing="ij")
    nz_yz = (y > 0).astype(int) + (z > 0).astype(int)
    shells = np.zeros(M_max + 1)
    for x in range(M_max + 1):
        r2 = y * y + z * z + x * x
        with np.errstate(divide="ignore", invalid="ignore"):
            f = np.where(r2 > 0, np.cos(np.sqrt(r2)) / r2, 0.0)
        weight = 2.0 ** (nz_yz + (x > 0))
        shell = np.maximum(np.maximum(y, z), x).astype(np.int64)
        shells += np.bincount(shell.ravel(), weights=(weight * f).ravel(), minlength=M_max + 1)
    return np.cumsum(shells)


def _window_mean(values, M):
    """Mean of values[0..M] under a C-infinity bump that vanishes at both ends.

    The cube partial sums oscillate like cos(M)/M; a smooth window averages
    the oscillation away to all orders while the slowly varying limit passes
    through unchanged.
    """
    t = np.arange(M + 1) / M
    w = _bump(t)
    return float(np.sum(w * values[: M + 1]) / np.sum(w))


@dataclass(frozen=True)
class ELambdaResult:
    value: float
    uncertainty: float
    cutoffs: tuple
    accelerated: tuple
    partial_sums: tuple


def e_lambda(M_max=256, extrapolation_levels=3):
    """Finite-volume constant 2 - lim_M sum_{max|n_i|<=M} cos|n| / |n|^2.

    The cube partial sums are smoothed at M = M_max / 2^k, k < levels; value
    is the smoothed sum at M_max and uncertainty the difference to M_max / 2.
    """
    M_max = int(M_max)
    if M_max < 8:
        raise ValueError("M_max must be >= 8")
    if extrapolation_levels < 2:
        raise ValueError("need at least two extrapolation levels")
    e = 2.0 - cube_partial_sums(M_max)
    cutoffs = [M_max >> k for k in range(extrapolation_levels)][::-1]
    cutoffs = [M for M in cutoffs if M >= 2]
    if len(cutoffs) < 2:
        raise ValueError("too many extrapolation levels for this M_max")
    acc = [_window_mean(e, M) for M in cutoffs]
    spreads = np.abs(np.diff(acc))
    if len(spreads) >= 2 and spreads[-1] > spreads[-2] and spreads[-1] > tol("bogo.elambda_stability"):
        raise NoConvergence(f"accelerated e_Lambda spread grows: {spreads.tolist()}")
    return ELambdaResult(acc[-1], float(spreads[-1]), tuple(cutoffs), tuple(acc),
                         tuple(float(e[M]) for M in cutoffs))


# ---------------------------------------------------------------- spherical lattice sums

def _tail_factor(cutoff):
    """Upper bound on sum_{p in 2 pi Z^3, |p| > K} |p|^-4.

    Each lattice point owns a cube of volume (2 pi)^3 whose points q satisfy
    |q| <= |p| (1 + sqrt(3) pi / K), which turns the sum into an integral of
    |q|^-4 over |q| > K - sqrt(3) pi.
    """
    d = math.sqrt(3.0) * math.pi
    return (1.0 + d / cutoff) ** 4 * 4.0 * math.pi / (TWO_PI**3 * (cutoff - d))


def _shells_within(cutoff):
    m_max = int(math.floor((cutoff / TWO_PI) ** 2 * (1 + 1e-15)))
    counts = shell_counts(m_max)[1:].astype(float)
    m = np.arange(1, m_max + 1, dtype=float)
    keep = counts > 0
    return m[keep], counts[keep]


def energy_bracket(p2, a):
    """p^2 + 8 pi a - eps(p) - (8 pi a)^2 / (2 p^2), which is <= 0.

    With b = 8 pi a and eps - p^2 = 2 b p^2 / (eps + p^2) the bracket is
    -b^3 (1 + 2 p^2 / (eps + p^2)) / (2 p^2 (p^2 + b + eps)), free of
    subtractions; the direct form cancels catastrophically for p^2 >> b.
    """
    p2 = np.asarray(p2, dtype=float)
    b = 8.0 * math.pi * a
    eps = _eps_from_p2(p2, a)
    return -(b**3) * (1.0 + 2.0 * p2 / (eps + p2)) / (2.0 * p2 * (p2 + b + eps))


def depletion_summand(p2, a):
    """(p^2 + 8 pi a - eps) / (2 eps), written without cancellation."""
    p2 = np.asarray(p2, dtype=float)
    b = 8.0 * math.pi * a
    eps = _eps_from_p2(p2, a)
    return b * b / (2.0 * eps * (p2 + b + eps))


@dataclass(frozen=True)
class EnergyFormulaResult:
    total: float
    term_leading: float
    term_finite_volume: float
    term_bogoliubov_sum: float
    cutoff_used: float
    tail_estimate: float
    e_lambda: float
    e_lambda_uncertainty: float
    caveats: tuple = field(default=(CAVEAT_ENERGY,))


def bogoliubov_sum(a, cutoff):
    """-1/2 sum_{0 < |p| <= cutoff} energy_bracket and its tail bound."""
    m, g = _shells_within(cutoff)
    val = -0.5 * float(np.sum(g * energy_bracket(TWO_PI**2 * m, a)))
    b = 8.0 * math.pi * a
    # |bracket| <= b^3 / (2 p^4)
    return val, 0.5 * 0.5 * b**3 * _tail_factor(cutoff)


def ground_state_energy(N, a, cutoff=None, M_max=256, extrapolation_levels=3):
    """Second-order ground-state energy 4 pi a (N-1) + e_Lambda a^2 + Bogoliubov sum."""
    if N < 2:
        raise ValueError("N must be >= 2")
    if a < 0:
        raise ValueError("a must be >= 0")
    cutoff = 64.0 * math.pi if cutoff is None else float(cutoff)
    if cutoff < 16.0 * math.pi:
        raise ValueError("cutoff must be >= 16 pi")
    el = e_lambda(M_max, extrapolation_levels)
    lead = 4.0 * math.pi * a * (N - 1)
    fv = el.value * a * a
    bs, tail = bogoliubov_sum(a, cutoff)
    return EnergyFormulaResult(lead + fv + bs, lead, fv, bs, cutoff, tail, el.value, el.uncertainty)


@dataclass(frozen=True)
class DepletionResult:
    value: float
    tail_estimate: float


def depletion(a, cutoff=None):
    """Expected number of excitations in the quadratic ground state."""
    if a < 0:
        raise ValueError("a must be >= 0")
    cutoff = 64.0 * math.pi if cutoff is None else float(cutoff)
    if cutoff < 16.0 * math.pi:
        raise ValueError("cutoff must be >= 16 pi")
    m, g = _shells_within(cutoff)
    val = float(np.sum(g * depletion_summand(TWO_PI**2 * m, a)))
    b = 8.0 * math.pi * a
    # summand <= b^2 / (4 p^4)
    return DepletionResult(val, 0.25 * b * b * _tail_factor(cutoff))


# ---------------------------------------------------------------- spectrum

@dataclass(frozen=True)
class SpectrumLine:
    """One energy level of the free excitation gas.

    ``occupations`` is a representative occupation map (momentum tuple ->
    count); ``patterns`` lists every distribution of quanta over mode groups
    that lands in this energy bin, as tuples of (group, count) pairs.
    """

    energy: float
    degeneracy: int
    occupations: dict
    patterns: tuple


def enumerate_levels(mode_energies, multiplicities, zeta, budget=10**6):
    """Group-level enumeration of sum_i k_i e_i <= zeta.

    Group i has ``multiplicities[i]`` modes of energy ``mode_energies[i]``;
    putting k quanta into it can be done in C(k + g - 1, k) ways. Returns
    ``(energy, count, pattern)`` triples sorted by energy, before binning.
    """
    e = [float(x) for x in mode_energies]
    g = [int(x) for x in multiplicities]
    if any(x <= 0 for x in e):
        raise ValueError("mode energies must be positive")
    order = sorted(range(len(e)), key=lambda i: e[i])
    slack = 1e-12 * max(1.0, zeta)
    out = []

    def dfs(j, energy, count, pattern):
        if len(out) > budget:
            raise ThresholdTooLarge(f"more than {budget} occupation patterns below threshold")
        if j == len(order):
            out.append((energy, count, tuple(sorted(pattern))))
            return
        i = order[j]
        k = 0
        while energy + k * e[i] <= zeta + slack:
            ways = math.comb(k + g[i] - 1, k)
            dfs(j + 1, energy + k * e[i], count * ways, pattern + ([(i, k)] if k else []))
            k += 1

    dfs(0, 0.0, 1, [])
    out.sort(key=lambda t: (t[0], t[2]))
    return out


def bin_levels(raw, rel_tol=None):
    """Merge consecutive energies within rel_tol * max(1, E) of the bin start."""
    rel_tol = tol("bogo.degeneracy_bin") if rel_tol is None else rel_tol
    bins = []
    for energy, count, pattern in raw:
        if bins and energy - bins[-1][0] <= rel_tol * max(1.0, abs(bins[-1][0])):
            bins[-1][1] += count
            bins[-1][2].append(pattern)
        else:
            bins.append([energy, count, [pattern]])
    return bins


def enumerate_spectrum(a, zeta, mode_budget=20000, pattern_budget=10**6):
    """All excitation levels sum n_p eps(p) <= zeta, binned at 1e-9 relative."""
    if not zeta > 0:
        raise ValueError("zeta must be positive")
    if a < 0:
        raise ValueError("a must be >= 0")
    # eps(p) >= |p|^2 bounds the shells that can carry a quantum
    m_top = int(math.floor(zeta / TWO_PI**2 * (1 + 1e-12)))
    counts = shell_counts(max(m_top, 1))
    shells = [m for m in range(1, m_top + 1) if counts[m] > 0]
    energies = {m: float(dispersion_shell(m, a)) for m in shells}
    shells = [m for m in shells if energies[m] <= zeta * (1 + 1e-12)]
    n_modes = int(sum(counts[m] for m in shells))
    if n_modes > mode_budget:
        raise ThresholdTooLarge(f"{n_modes} modes below threshold exceed the budget {mode_budget}")
    raw = enumerate_levels([energies[m] for m in shells], [counts[m] for m in shells],
                           zeta, pattern_budget)
    vecs = {}
    if shells:
        allv = lattice_vectors(shells[-1])
        norms = np.sum(allv * allv, axis=1)
        vecs = {m: [tuple(int(c) for c in v) for v in allv[norms == m]] for m in shells}
    lines = []
    for energy, count, patterns in bin_levels(raw):
        occ = {}
        for i, k in patterns[0]:
            # representative: all quanta of the group in its first mode
            occ[tuple(TWO_PI * c for c in vecs[shells[i]][0])] = k
        named = tuple(tuple((shells[i], k) for i, k in p) for p in patterns)
        lines.append(SpectrumLine(float(energy), int(count), occ, named))
    return lines


def condensation_rate_bound(zeta, C=1.0):
    """Affine bound C (zeta + 1) on the expected number of excitations."""
    if zeta < 0:
        raise ValueError("zeta must be >= 0")
    return C * (zeta + 1.0)
