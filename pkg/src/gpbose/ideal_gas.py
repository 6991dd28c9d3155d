"""Grand-canonical ideal Bose gas on the torus [0, L]^3.

Momenta live on (2 pi / L) Z^3. Every summand depends on |p|^2 only, so all
lattice sums run over shells |n|^2 = m weighted by the representation count
r3(m); the p = 0 shell carries the condensate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq

from .errors import BracketFailure
from .lattice import shell_counts
from .tolerances import tol


@lru_cache(maxsize=1)
def zeta_three_halves():
    """sum_{n>=1} n^{-3/2}: 10^6 terms plus an Euler-Maclaurin tail."""
    N = tol("ideal.zeta_terms")
    n = np.arange(1, N + 1, dtype=float)
    head = float(np.sum(n ** -1.5))
    # sum_{n>N} f(n) = int_N^inf f - f(N)/2 - f'(N)/12 + f'''(N)/720 - ...
    tail = 2.0 / math.sqrt(N) - 0.5 * N**-1.5 + (1.5 / 12.0) * N**-2.5 - (1.5 * 2.5 * 3.5 / 720.0) * N**-4.5
    return head + tail


def critical_density(beta):
    """Critical density (4 pi beta)^{-3/2} zeta(3/2) of the infinite-volume gas."""
    if not beta > 0:
        raise ValueError("beta must be positive")
    return (4.0 * math.pi * beta) ** -1.5 * zeta_three_halves()


def critical_beta(rho):
    """Inverse critical temperature at density rho (inverse of critical_density)."""
    if not rho > 0:
        raise ValueError("rho must be positive")
    return zeta_three_halves() ** (2.0 / 3.0) / (4.0 * math.pi * rho ** (2.0 / 3.0))


@dataclass(frozen=True)
class TorusSpec:
    """Box side ``L``; ``m_max`` optionally fixes the shell cutoff |n|^2 <= m_max.

    With ``m_max=None`` the cutoff is chosen per (beta, mu) so the dropped Bose
    tail is below 1e-12 of the retained sum.
    """

    L: float
    m_max: int | None = None

    def __post_init__(self):
        if not self.L > 0:
            raise ValueError("L must be positive")
        if self.m_max is not None and self.m_max < 1:
            raise ValueError("m_max must be >= 1")

    @property
    def k2(self):
        return (2.0 * math.pi / self.L) ** 2


@dataclass(frozen=True)
class ThermoState:
    beta: float
    mu: float
    rho: float
    rho0: float
    rho_plus: float
    L: float
    m_max: int = 0

    @property
    def fraction(self):
        return self.rho0 / self.rho


def _tail_estimate(c, M):
    # continuum count 2 pi sqrt(m) dm bounds the shells beyond M
    # int_M^inf 2 pi sqrt(m) e^{-c m} dm <= 2 pi e^{-cM} (sqrt(M)/c + 1/(2 c^2 sqrt(M)))
    return 2.0 * math.pi * math.exp(-c * M) * (math.sqrt(M) / c + 0.5 / (c * c * math.sqrt(M)))


def _auto_cutoff(beta, spec):
    c = beta * spec.k2
    M = max(8, int(math.ceil(40.0 / c)))
    while _tail_estimate(c, M) > tol("ideal.bose_tail") * 1e-3:
        M = int(M * 1.25) + 1
    return M


def _cutoff(beta, mu, spec):
    """Shell cutoff, and a check that a fixed cutoff is sufficient."""
    if spec.m_max is None:
        return _auto_cutoff(beta, spec)
    M = spec.m_max
    c = beta * spec.k2
    counts = shell_counts(M)
    retained = float(np.sum(counts[1:] * np.exp(-c * np.arange(1, M + 1))))
    # tail of the excited sum relative to the retained excited sum
    if _tail_estimate(c, M) > tol("ideal.bose_tail") * max(retained, 1e-300):
        raise BracketFailure(f"cutoff m_max={M} leaves a Bose tail above 1e-12 at beta={beta}")
    return M


def _shell_occupations(beta, mu, spec, M):
    e = spec.k2 * np.arange(M + 1)
    with np.errstate(over="ignore"):
        return shell_counts(M), 1.0 / np.expm1(beta * (e - mu))


def lattice_densities(beta, mu, spec, m_max=None):
    """(rho0, rho_plus) from the Bose factors at chemical potential mu < 0."""
    if not mu < 0:
        raise ValueError("mu must be negative")
    M = m_max if m_max is not None else _cutoff(beta, mu, spec)
    counts, occ = _shell_occupations(beta, mu, spec, M)
    vol = spec.L**3
    rho0 = occ[0] / vol
    rho_plus = float(np.dot(counts[1:], occ[1:])) / vol
    return rho0, rho_plus


def solve_mu(beta, rho, spec):
    """Chemical potential fixing the lattice-sum density to rho.

    The root is sought in t = log(-mu), where the density is monotone and the
    condensed regime (mu ~ -1/(beta L^3 rho0)) is well resolved.
    """
    if not (beta > 0 and rho > 0):
        raise ValueError("beta and rho must be positive")
    M = _cutoff(beta, -1e-300, spec)
    vol = spec.L**3

    def excess(t):
        r0, rp = lattice_densities(beta, -math.exp(t), spec, M)
        return (r0 + rp) / rho - 1.0

    # lower end: the p = 0 term alone already exceeds rho
    t_lo = math.log(0.5 / (beta * vol * rho))
    while excess(t_lo) <= 0:
        t_lo -= 5.0
        if t_lo < -745:
            raise BracketFailure("could not bracket mu from above")
    t_hi = math.log(max(1.0 / beta, 1e-300))
    while excess(t_hi) >= 0:
        t_hi += 2.0
        if t_hi > 700:
            raise BracketFailure("could not bracket mu from below")
    t = brentq(excess, t_lo, t_hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
    mu = -math.exp(t)
    rho0, rho_plus = lattice_densities(beta, mu, spec, M)
    if abs(rho0 + rho_plus - rho) > tol("ideal.density_residual") * rho:
        raise BracketFailure("density residual above 1e-10 after root finding")
    return ThermoState(beta=beta, mu=mu, rho=rho, rho0=rho0, rho_plus=rho_plus, L=spec.L, m_max=M)


def richardson(values, ratio=2.0, orders=(1, 2)):
    """Eliminate error terms h^p (p in ``orders``) from values at h, h/ratio, ..."""
    v = list(map(float, values))
    for p in orders:
        f = ratio**p
        v = [(f * b - a) / (f - 1.0) for a, b in zip(v[:-1], v[1:])]
    return v[-1]


def condensate_fraction(beta, rho, spec, extrapolate=False):
    """rho0 / rho at the given box, or its L -> infinity limit.

    With ``extrapolate`` the fraction is computed at L, 2L, 4L and Richardson
    extrapolated in 1/L (first and second order), then clipped to [0, 1].
    """
    if not extrapolate:
        return solve_mu(beta, rho, spec).fraction
    fr = [solve_mu(beta, rho, TorusSpec(spec.L * 2**k)).fraction for k in range(3)]
    return min(1.0, max(0.0, richardson(fr)))


def grand_free_energy(beta, mu, spec):
    """(1/beta) sum_p log(1 - exp(-beta (p^2 - mu))), the ideal grand potential."""
    M = _cutoff(beta, mu, spec)
    counts = shell_counts(M)
    e = spec.k2 * np.arange(M + 1)
    return float(np.dot(counts, np.log(-np.expm1(-beta * (e - mu))))) / beta


def free_energy_ideal(beta, N, L=1.0):
    """F0 = mu N + (1/beta) sum_p log(1 - e^{-beta (p^2 - mu)}) at density N / L^3."""
    spec = TorusSpec(L)
    state = solve_mu(beta, N / L**3, spec)
    return state.mu * N + grand_free_energy(beta, state.mu, spec)


def interaction_correction(beta, N, a):
    """4 pi (a/N) (2 rho^2 - rho0^2) on the unit torus with rho = N."""
    if a < 0:
        raise ValueError("scattering length must be >= 0")
    rho0 = N * solve_mu(beta, float(N), TorusSpec(1.0)).fraction
    return 4.0 * math.pi * (a / N) * (2.0 * N * N - rho0 * rho0)


def free_energy_gp(beta, N, a):
    """Ideal free energy plus the mean-field correction for scattering length a/N."""
    return free_energy_ideal(beta, N) + interaction_correction(beta, N, a)


def sweep(betas, rho, spec):
    """Rows (beta, mu, rho0/rho, F) at fixed density; F is the grand-canonical free energy."""
    rows = []
    N = rho * spec.L**3
    for beta in betas:
        s = solve_mu(beta, rho, spec)
        rows.append((beta, s.mu, s.fraction, s.mu * N + grand_free_energy(beta, s.mu, spec)))
    return rows
