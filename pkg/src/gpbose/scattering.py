"""Zero-energy scattering, the Neumann correlation problem and Dyson's lemma.

All problems are radial. With f(x) = u(|x|)/|x| the zero-energy equation
[-Delta + v/2] f = 0 becomes -u'' + (v/2) u = 0 with u(0) = 0, and beyond the
range of v the solution is exactly linear, u(r) = r - a.

Discretisation is the standard three-point stencil on a uniform grid. The
potential enters through cell averages (exact integrals of v over each grid
cell), which keeps the scheme second order across the jump of a square well.
A useful by-product: for that discretisation the quadrature
(1/2) sum_i h v_i u_i r_i reproduces the fitted scattering length to rounding,
because it is a summation-by-parts image of the stencil itself.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np
from scipy.integrate import simpson
from scipy.linalg import solve_banded
from scipy.special import erf

from .errors import (
    EigensolveFailure,
    GeometryError,
    InvalidPotential,
    NonConvergence,
    NormalizationError,
    QuadratureFailure,
    UnsupportedKind,
)
from .lattice import lattice_vectors
from .tolerances import tol

KINDS = ("hard-core", "square-well", "tabulated", "gaussian")

DEFAULT_GRID_POINTS = 1 << 14
DEFAULT_RMAX_FACTOR = 4.0


@dataclass(frozen=True, eq=False)
class RadialPotential:
    """Non-negative radial interaction v(r) with an effective finite range.

    Use the constructors :meth:`hard_core`, :meth:`square_well`,
    :meth:`gaussian`, :meth:`tabulated` rather than the raw initializer.
    """

    kind: str
    radius: float = 0.0
    depth: float = 0.0
    amplitude: float = 0.0
    width: float = 0.0
    r_table: np.ndarray | None = field(default=None, repr=False)
    v_table: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidPotential(f"unknown potential kind {self.kind!r}")
        if self.kind in ("hard-core", "square-well") and not self.radius > 0:
            raise InvalidPotential("radius must be positive")
        if self.kind == "square-well" and self.depth < 0:
            raise InvalidPotential("square-well height must be >= 0 (repulsive)")
        if self.kind == "gaussian":
            if self.amplitude < 0:
                raise InvalidPotential("gaussian amplitude must be >= 0")
            if not self.width > 0:
                raise InvalidPotential("gaussian width must be positive")
        if self.kind == "tabulated":
            r = np.asarray(self.r_table, dtype=float)
            v = np.asarray(self.v_table, dtype=float)
            if r.ndim != 1 or r.shape != v.shape or r.size < 2:
                raise InvalidPotential("tabulated potential needs matching 1d samples")
            if np.any(np.diff(r) <= 0):
                raise InvalidPotential("tabulated r samples must be strictly increasing")
            if r[0] < 0:
                raise InvalidPotential("tabulated r samples must be >= 0")
            if np.any(v < 0) or not np.all(np.isfinite(v)):
                raise InvalidPotential("tabulated potential must be finite and >= 0")
            object.__setattr__(self, "r_table", r)
            object.__setattr__(self, "v_table", v)
            if self.range <= 0:
                raise InvalidPotential("tabulated potential has no positive range")

    # constructors -------------------------------------------------------

    @classmethod
    def hard_core(cls, R):
        return cls("hard-core", radius=float(R))

    @classmethod
    def square_well(cls, V0, R):
        """Repulsive step of height ``V0`` on ``r < R``."""
        return cls("square-well", radius=float(R), depth=float(V0))

    @classmethod
    def gaussian(cls, amplitude, width):
        return cls("gaussian", amplitude=float(amplitude), width=float(width))

    @classmethod
    def tabulated(cls, r, v):
        return cls("tabulated", r_table=np.array(r, dtype=float), v_table=np.array(v, dtype=float))

    @classmethod
    def from_csv(cls, path):
        """Read a two-column ``r, v`` CSV file; a non-numeric header row is skipped."""
        rows = []
        with open(path, newline="") as fh:
            for i, row in enumerate(csv.reader(fh)):
                if not row or row[0].lstrip().startswith("#"):
                    continue
                try:
                    rows.append((float(row[0]), float(row[1])))
                except (ValueError, IndexError):
                    if i == 0:
                        continue
                    raise InvalidPotential(f"{path}: malformed row {i + 1}: {row!r}")
        if not rows:
            raise InvalidPotential(f"{path}: no samples")
        r, v = np.array(rows).T
        return cls.tabulated(r, v)

    # derived potentials ---------------------------------------------------

    def scaled(self, N):
        """The Gross-Pitaevskii rescaling x -> N^2 v(N x)."""
        N = float(N)
        if self.kind == "hard-core":
            return RadialPotential.hard_core(self.radius / N)
        if self.kind == "square-well":
            return RadialPotential.square_well(N * N * self.depth, self.radius / N)
        if self.kind == "gaussian":
            return RadialPotential.gaussian(N * N * self.amplitude, self.width / N)
        return RadialPotential.tabulated(self.r_table / N, N * N * self.v_table)

    def times(self, lam):
        """The potential lam * v (lam >= 0)."""
        if lam < 0:
            raise InvalidPotential("coupling multiplier must be >= 0")
        if self.kind == "hard-core":
            raise UnsupportedKind("hard-core potentials cannot be rescaled in strength")
        if self.kind == "square-well":
            return RadialPotential.square_well(lam * self.depth, self.radius)
        if self.kind == "gaussian":
            return RadialPotential.gaussian(lam * self.amplitude, self.width)
        return RadialPotential.tabulated(self.r_table, lam * self.v_table)

    # evaluation -----------------------------------------------------------

    @property
    def range(self):
        """Smallest R0 with v(r) = 0 for r > R0."""
        if self.kind in ("hard-core", "square-well"):
            return self.radius
        if self.kind == "gaussian":
            return self.width * math.sqrt(-math.log(tol("scattering.gaussian_truncation")))
        nz = np.flatnonzero(self.v_table > 0)
        if nz.size == 0:
            return float(self.r_table[-1])
        last = nz[-1]
        return float(self.r_table[min(last + 1, self.r_table.size - 1)])

    @property
    def integrable(self):
        return self.kind != "hard-core"

    @property
    def is_zero(self):
        if self.kind == "square-well":
            return self.depth == 0
        if self.kind == "gaussian":
            return self.amplitude == 0
        if self.kind == "tabulated":
            return not np.any(self.v_table > 0)
        return False

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        if self.kind == "hard-core":
            return np.where(r < self.radius, np.inf, 0.0)
        if self.kind == "square-well":
            return np.where(r < self.radius, self.depth, 0.0)
        if self.kind == "gaussian":
            R0 = self.range
            return np.where(r <= R0, self.amplitude * np.exp(-((r / self.width) ** 2)), 0.0)
        rt, vt = self.r_table, self.v_table
        inside = np.interp(r, rt, vt, left=vt[0])
        return np.where(r <= rt[-1], inside, 0.0)

    def antiderivative(self, r):
        """F(r) = integral of v over [0, r] (one-dimensional, no r^2 weight)."""
        if self.kind == "hard-core":
            raise UnsupportedKind("hard-core potential is not integrable")
        r = np.clip(np.asarray(r, dtype=float), 0.0, None)
        if self.kind == "square-well":
            return self.depth * np.minimum(r, self.radius)
        if self.kind == "gaussian":
            w = self.width
            return self.amplitude * 0.5 * math.sqrt(math.pi) * w * erf(np.minimum(r, self.range) / w)
        rt, vt = self.r_table, self.v_table
        seg = np.diff(rt)
        cum = np.concatenate(([vt[0] * rt[0]], vt[0] * rt[0] + np.cumsum(0.5 * (vt[1:] + vt[:-1]) * seg)))
        out = np.where(r <= rt[0], vt[0] * r, cum[-1])
        idx = np.clip(np.searchsorted(rt, r, side="right") - 1, 0, rt.size - 2)
        inner = (r > rt[0]) & (r < rt[-1])
        t = r - rt[idx]
        slope = (vt[idx + 1] - vt[idx]) / seg[idx]
        piece = cum[idx] + vt[idx] * t + 0.5 * slope * t * t
        return np.where(inner, piece, out)

    def cell_average(self, r, h):
        """Mean of v over [r - h/2, r + h/2] clipped to r >= 0."""
        r = np.asarray(r, dtype=float)
        lo = np.clip(r - 0.5 * h, 0.0, None)
        hi = r + 0.5 * h
        return (self.antiderivative(hi) - self.antiderivative(lo)) / (hi - lo)

    def fourier_zero(self):
        """V-hat(0) = integral of V over R^3."""
        if self.kind == "hard-core":
            raise UnsupportedKind("hard-core potential is not integrable")
        if self.kind == "square-well":
            return 4.0 * math.pi * self.depth * self.radius**3 / 3.0
        if self.kind == "gaussian":
            w, z = self.width, self.range / self.width
            radial = 0.25 * w**3 * (math.sqrt(math.pi) * math.erf(z) - 2.0 * z * math.exp(-z * z))
            return 4.0 * math.pi * self.amplitude * radial
        # v is piecewise linear, v r^2 cubic: two-point Gauss is exact per segment
        rt, vt = self.r_table, self.v_table
        total = vt[0] * rt[0] ** 3 / 3.0
        g = 0.5 / math.sqrt(3.0)
        mid, half = 0.5 * (rt[1:] + rt[:-1]), np.diff(rt)
        for s in (-g, g):
            x = mid + s * half
            total += np.sum(0.5 * half * np.interp(x, rt, vt) * x * x)
        return 4.0 * math.pi * float(total)


@dataclass
class ScatteringSolution:
    """Reduced radial solution u(r), normalised so that u = r - a beyond R0."""

    r: np.ndarray
    u: np.ndarray
    a: float
    r_max: float
    R0: float
    residual: float
    potential: RadialPotential = field(repr=False)

    @property
    def f(self):
        with np.errstate(divide="ignore", invalid="ignore"):
            f = self.u / self.r
        if self.r[0] == 0.0:
            f[0] = self.u[1] / self.r[1] if self.potential.kind != "hard-core" else 0.0
        return f

    def to_csv(self, path):
        rows = np.column_stack([self.r, self.u, self.f])
        with open(path, "w", newline="") as fh:
            fh.write("r,u,f\n")
            for row in rows:
                fh.write(",".join(format(x, ".17g") for x in row) + "\n")


def _fit_line(r, u):
    # least squares u ~ s r + t
    A = np.column_stack([r, np.ones_like(r)])
    (s, t), *_ = np.linalg.lstsq(A, u, rcond=None)
    return s, t


def solve_zero_energy(V, r_max=None, grid_points=DEFAULT_GRID_POINTS):
    """Solve -u'' + (v/2) u = 0 outward from u(0) = 0 and read off a.

    Parameters
    ----------
    V : RadialPotential
    r_max : float, optional
        Outer radius; defaults to ``4 * V.range``. Must exceed ``2 * V.range``.
    grid_points : int
        Number of grid intervals (>= 512).

    Returns
    -------
    ScatteringSolution
    """
    R0 = V.range
    if r_max is None:
        r_max = DEFAULT_RMAX_FACTOR * R0
    if not r_max > 2.0 * R0:
        raise GeometryError(f"r_max={r_max} must exceed 2*R0={2 * R0}")
    if grid_points < 512:
        raise ValueError("grid_points must be >= 512")
    n = int(grid_points)

    if V.kind == "hard-core":
        # boundary condition u(R) = 0; the core itself is never sampled
        h = (r_max - V.radius) / n
        r = V.radius + h * np.arange(n + 1)
        r[-1] = r_max
        q = np.zeros(n + 1)
    else:
        h = r_max / n
        r = h * np.arange(n + 1)
        r[-1] = r_max
        q = np.zeros(n + 1)
        q[1:] = 0.5 * V.cell_average(r[1:], h)

    # March the deficit w = (r - r[0]) - u instead of u itself: for weak
    # potentials w is tiny and would otherwise be lost to cancellation.
    # With e_i = h - (u_{i+1} - u_i) the stencil reads e_i = e_{i-1} - h^2 q_i u_i.
    w = np.zeros(n + 1)
    rel = r - r[0]
    last = int(np.flatnonzero(q)[-1]) if np.any(q) else 0
    h2 = h * h
    e = 0.0
    for i in range(1, last + 1):
        e -= h2 * q[i] * (rel[i] - w[i])
        w[i + 1] = w[i] + e
        if abs(w[i + 1]) > 1e100:
            # strong barrier: rescale u by c, keeping the deficit form
            c = 1e-100
            w[: i + 2] = rel[: i + 2] - c * (rel[: i + 2] - w[: i + 2])
            e = h - c * (h - e)
    k = last + 1
    if k < n:
        w[k:] = w[k] + e * np.arange(n + 1 - k)
    u = rel - w

    window = r >= r_max - tol("scattering.asymptote_fit_fraction") * (r_max - R0)
    alpha, beta = _fit_line(r[window], w[window])
    lead = (r > R0 + 2 * h) & ~window
    if np.count_nonzero(lead) >= 2:
        alpha2, _ = _fit_line(r[lead], w[lead])
        if not np.isfinite(alpha2) or abs(alpha2 - alpha) > tol("scattering.slope_stability") * abs(1.0 - alpha):
            raise NonConvergence(f"asymptotic slope unstable: {alpha!r} vs {alpha2!r}")
    s = 1.0 - alpha
    if not (np.isfinite(s) and s > 0):
        raise NonConvergence("asymptotic slope is not positive and finite")
    # w = alpha r + beta beyond the support, so u = s r - beta - r[0]
    a = (beta + r[0]) / s
    u = u / s

    defect = np.zeros(n + 1)
    defect[1:-1] = u[2:] - 2.0 * u[1:-1] + u[:-2] - h * h * q[1:-1] * u[1:-1]
    residual = float(np.max(np.abs(defect)) / max(np.max(np.abs(u)), 1e-300))
    return ScatteringSolution(r=r, u=u, a=float(a), r_max=float(r_max), R0=R0,
                              residual=residual, potential=V)


def scattering_length(V, **kwargs):
    return solve_zero_energy(V, **kwargs).a


def scattering_length_integral(V, sol):
    """(1/8 pi) int V f dx on the solution grid, i.e. (1/2) int v(r) u(r) r dr."""
    if not V.integrable:
        raise UnsupportedKind("hard-core potential has no finite integral")
    r, u = sol.r, sol.u
    if r[-1] < V.range or r[0] != 0.0:
        raise QuadratureFailure("solution grid does not cover the potential support")
    h = r[1] - r[0]
    v = np.zeros_like(r)
    v[1:] = V.cell_average(r[1:], h)
    v[-1] = 0.0 if r[-1] > V.range else v[-1]
    val = 0.5 * h * np.sum(v[1:-1] * u[1:-1] * r[1:-1])
    if not np.isfinite(val):
        raise QuadratureFailure("non-finite quadrature")
    return float(val)


def scaled_scattering_length(V, N, **kwargs):
    """Scattering length of x -> N^2 v(N x); equals a(V)/N."""
    if N < 1:
        raise ValueError("N must be >= 1")
    return solve_zero_energy(V.scaled(N), **kwargs).a


# ---------------------------------------------------------------------------
# Neumann correlation problem


@dataclass
class NeumannSolution:
    r: np.ndarray
    u: np.ndarray
    f_N: np.ndarray
    lambda_N: float
    eta_position: np.ndarray
    eta_fourier: dict
    N: float
    ell0: float
    p_cutoff: float
    iterations: int = 0

    def eta_radial(self, p):
        """eta_p as a function of |p| for arbitrary p > 0 (same radial integral)."""
        return _eta_transform(self.r, self.u, self.N, np.atleast_1d(p))


def _eta_transform(r, u, N, p):
    # eta_p = -(4 pi N / p) int_0^ell0 (r - u) sin(p r) dr ; u = 0 on [0, r[0]]
    p = np.asarray(p, dtype=float)
    out = np.empty_like(p)
    r0 = r[0]
    for j, pj in enumerate(p):
        val = simpson((r - u) * np.sin(pj * r), x=r)
        if r0 > 0:
            val += (math.sin(pj * r0) - pj * r0 * math.cos(pj * r0)) / (pj * pj)
        out[j] = -4.0 * math.pi * N * val / pj
    return out


def _neumann_operator(V, N, ell0, n):
    Vn = V.scaled(N)
    r_in = Vn.radius if V.kind == "hard-core" else 0.0
    h = (ell0 - r_in) / n
    r = r_in + h * np.arange(n + 1)
    r[-1] = ell0
    q = np.zeros(n + 1)
    if V.kind != "hard-core":
        q[1:] = 0.5 * Vn.cell_average(r[1:], h)
    ih2 = 1.0 / (h * h)
    # unknowns u_1..u_n; row n uses a ghost node for u'(ell0) = u(ell0)/ell0
    diag = 2.0 * ih2 + q[1:]
    off = -ih2 * np.ones(n - 1)
    diag[-1] = 2.0 * ((1.0 - h / ell0) * ih2 + 0.5 * q[n])
    off[-1] *= math.sqrt(2.0)
    return r, diag, off


def _tridiag_eig_lowest(diag, off, shift, tol_res, max_iter=200):
    n = diag.size
    ab = np.zeros((3, n))
    ab[0, 1:] = off
    ab[1] = diag - shift
    ab[2, :-1] = off
    scale = np.max(np.abs(diag)) + 2 * np.max(np.abs(off))

    def matvec(y):
        out = diag * y
        out[:-1] += off * y[1:]
        out[1:] += off * y[:-1]
        return out

    y = np.ones(n) / math.sqrt(n)
    for it in range(1, max_iter + 1):
        y_prev = y
        y = solve_banded((1, 1), ab, y)
        y /= np.linalg.norm(y)
        if y @ y_prev < 0:
            y = -y
        Ty = matvec(y)
        lam = float(y @ Ty)
        res = np.linalg.norm(Ty - lam * y) / scale
        # the Rayleigh quotient converges quadratically faster than the
        # vector, so stop on the vector update as well
        if res <= tol_res and np.linalg.norm(y - y_prev) <= 1e-13:
            return lam, y, it
    raise EigensolveFailure(f"inverse iteration stalled (residual {res:.2e})")


def solve_neumann(V, N, ell0=None, grid_points=4096, p_cutoff=None):
    """Lowest radial Neumann eigenpair of -Delta + (N^2/2) v(N x) on |x| <= ell0.

    The eigenvector is normalised so that f_N(ell0) = 1. The residual test of
    the inverse iteration is normwise, ||T y - lam y|| / ||T|| <= 1e-10, since
    the absolute residual is bounded below by rounding in ||T|| ~ 4/h^2.

    ``p_cutoff`` bounds the momenta |p| in 2 pi Z^3 at which eta_p is tabulated
    (default 2 pi * 12).
    """
    if ell0 is None:
        ell0 = tol("scattering.default_ell0")
    if not 0 < ell0 < 0.5:
        raise GeometryError("ell0 must lie in (0, 1/2) so the ball fits in the unit torus")
    if N * ell0 <= V.range:
        raise GeometryError(f"N*ell0 = {N * ell0} must exceed the potential range {V.range}")
    if p_cutoff is None:
        p_cutoff = 2.0 * math.pi * 12
    n = int(grid_points)
    r, diag, off = _neumann_operator(V, N, ell0, n)
    shift = -1.0 / (ell0 * ell0)
    lam, y, iters = _tridiag_eig_lowest(diag, off, shift, tol("scattering.neumann_eig_residual"))
    x = y.copy()
    x[-1] *= math.sqrt(2.0)
    x *= ell0 / x[-1]
    u = np.concatenate(([0.0], x))
    with np.errstate(divide="ignore", invalid="ignore"):
        f = u / r
    if r[0] == 0.0:
        f[0] = u[1] / r[1]
    eta_pos = -float(N) * (1.0 - f)

    m_max = int(math.floor((p_cutoff / (2.0 * math.pi)) ** 2))
    ms = np.arange(1, m_max + 1)
    vals = _eta_transform(r, u, float(N), 2.0 * math.pi * np.sqrt(ms)) if ms.size else []
    eta_f = {int(m): float(v) for m, v in zip(ms, vals)}
    return NeumannSolution(r=r, u=u, f_N=f, lambda_N=lam, eta_position=eta_pos,
                           eta_fourier=eta_f, N=float(N), ell0=float(ell0),
                           p_cutoff=float(p_cutoff), iterations=iters)


def eta_coefficients(sol, kappa_H):
    """Map integer vector n -> eta_p for p = 2 pi n with kappa_H < |p| <= cutoff."""
    if not kappa_H > 0:
        raise ValueError("kappa_H must be positive")
    m_max = max(sol.eta_fourier) if sol.eta_fourier else 0
    out = {}
    for n in lattice_vectors(m_max):
        m = int(n @ n)
        if 2.0 * math.pi * math.sqrt(m) > kappa_H and m in sol.eta_fourier:
            out[tuple(int(c) for c in n)] = sol.eta_fourier[m]
    return out


# ---------------------------------------------------------------------------
# Dyson's lemma


@dataclass
class DysonResult:
    lhs: float
    rhs: float
    satisfied: bool
    a: float


_GL_X, _GL_W = np.polynomial.legendre.leggauss(16)


def _panel_integral(func, breaks, panels=64):
    # 16-point Gauss-Legendre on panels that never straddle a breakpoint;
    # panels are shared out in proportion to piece length
    breaks = np.asarray(breaks, dtype=float)
    lengths = np.diff(breaks)
    span = breaks[-1] - breaks[0]
    edges = [breaks[:1]]
    for lo, L in zip(breaks[:-1], lengths):
        if L <= 0:
            continue
        k = max(2, int(math.ceil(panels * L / span)))
        edges.append(lo + L * np.arange(1, k + 1) / k)
    edges = np.concatenate(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])[:, None]
    half = 0.5 * np.diff(edges)[:, None]
    x = mid + half * _GL_X[None, :]
    return float(np.sum(half * _GL_W[None, :] * func(x)))


def _shell_support(U, r_hi):
    if isinstance(U, RadialPotential):
        if U.kind == "tabulated":
            return [float(x) for x in U.r_table if x < r_hi]
        if U.kind == "square-well":
            return [U.radius]
        return []
    return []


def dyson_check(v, U, phi, mu, B_radius, dphi=None, grid_points=DEFAULT_GRID_POINTS):
    """Evaluate both sides of Dyson's inequality on a ball of radius ``B_radius``.

    lhs = int_B [mu |grad phi|^2 + v |phi|^2 / 2] dx
    rhs = mu * a * int_B U |phi|^2 dx, with a the scattering length of v/mu.

    ``phi`` and ``dphi`` are radial callables; without ``dphi`` the derivative
    is taken by a centred difference.
    """
    if not 0 < mu <= 1:
        raise ValueError("mu must lie in (0, 1]")
    if not v.integrable:
        raise UnsupportedKind("Dyson check needs an integrable v")
    R0 = v.range
    Ufun = U if callable(U) else (lambda r: np.zeros_like(r))
    probe = np.linspace(0.0, R0, 2049)[:-1]
    if np.any(np.asarray(Ufun(probe)) > 0):
        raise ValueError("U must vanish for r < R0")
    r_far = max(B_radius, R0) * 1.0
    norm_breaks = sorted({0.0, R0, r_far, *[b for b in _shell_support(U, 10 * r_far)]})
    norm_breaks.append(max(norm_breaks[-1], 10 * r_far))
    mass = _panel_integral(lambda r: Ufun(r) * r * r, sorted(set(norm_breaks)))
    if isinstance(U, RadialPotential) and U.kind == "tabulated":
        mass = U.fourier_zero() / (4.0 * math.pi)
    if mass > 1.0 + 1e-12:
        raise NormalizationError(f"int U r^2 dr = {mass} exceeds 1")

    a = solve_zero_energy(v.times(1.0 / mu), grid_points=grid_points).a if not v.is_zero else 0.0
    if dphi is None:
        def dphi(r, _h=1e-6 * max(B_radius, R0)):
            return (phi(r + _h) - phi(np.abs(r - _h))) / (r + _h - np.abs(r - _h))

    breaks = sorted({0.0, B_radius, *(b for b in (R0, *_shell_support(U, B_radius)) if b < B_radius)})
    lhs = 4.0 * math.pi * _panel_integral(
        lambda r: (mu * dphi(r) ** 2 + 0.5 * v(r) * phi(r) ** 2) * r * r, breaks)
    rhs = 4.0 * math.pi * mu * a * _panel_integral(lambda r: Ufun(r) * phi(r) ** 2 * r * r, breaks)
    tol_abs = 1e-9 * max(abs(lhs), abs(rhs), 1e-300)
    return DysonResult(lhs=lhs, rhs=rhs, satisfied=bool(lhs >= rhs - tol_abs), a=a)


def smeared_shell(R, width, mass=1.0, samples=65):
    """Tabulated bump U around radius R with int U r^2 dr = mass."""
    r = np.linspace(R - width, R + width, samples)
    shape = np.cos(0.5 * math.pi * (r - R) / width) ** 2
    shape[[0, -1]] = 0.0
    U = RadialPotential.tabulated(r, shape)
    raw = U.fourier_zero() / (4.0 * math.pi)
    return RadialPotential.tabulated(r, shape * (mass / raw))


def random_dyson_trial(rng):
    """Draw one admissible (v, U, phi, mu, B_radius) configuration."""
    R0 = rng.uniform(0.2, 1.0)
    if rng.random() < 0.5:
        v = RadialPotential.square_well(rng.uniform(0.05, 60.0), R0)
    else:
        rr = np.linspace(0.0, R0, 33)
        v = RadialPotential.tabulated(rr, rng.uniform(0.1, 40.0) * (1 - (rr / R0) ** 2) ** 2)
    mu = rng.uniform(0.05, 1.0)
    B = R0 * rng.uniform(1.05, 4.0)
    Rs = rng.uniform(R0, B if rng.random() < 0.8 else 1.5 * B)
    width = rng.uniform(0.01, 0.5) * (Rs - R0) + 1e-3 * R0
    U = smeared_shell(Rs, min(width, Rs - R0), mass=rng.uniform(0.05, 1.0))
    k = rng.integers(1, 4)
    coef = rng.normal(size=k)
    scales = R0 * rng.uniform(0.3, 4.0, size=k)
    c0 = rng.normal()

    def phi(r):
        r = np.asarray(r, dtype=float)[..., None]
        return c0 + np.sum(coef * np.exp(-((r / scales) ** 2)), axis=-1)

    def dphi(r):
        r = np.asarray(r, dtype=float)[..., None]
        return np.sum(coef * (-2.0 * r / scales**2) * np.exp(-((r / scales) ** 2)), axis=-1)

    return v, U, phi, dphi, mu, B


def run_dyson_trials(n_trials, seed=0, grid_points=1 << 12):
    """Seeded randomized Dyson trials; each trial gets its own spawned stream."""
    children = np.random.SeedSequence(seed).spawn(n_trials)
    results = []
    for ss in children:
        v, U, phi, dphi, mu, B = random_dyson_trial(np.random.default_rng(ss))
        results.append(dyson_check(v, U, phi, mu, B, dphi=dphi, grid_points=grid_points))
    return results
