"""Gross-Pitaevskii energy functional and its constrained minimisation.

The functional is

    E(phi) = int |grad phi|^2 + V |phi|^2 + c |phi|^4,     int |phi|^2 = 1,

with c = 4 pi a in 3D or 4 pi g in 2D. In a frame rotating with angular
velocity Omega the kinetic term becomes |(i grad + A) phi|^2 with
A = (Omega ^ x)/2 and V is replaced by W = V - |A|^2.

Fields live on uniform periodic grids and derivatives are spectral. A trapped
problem uses the box [-X, X)^d; the trap makes phi negligible at the edge, so
the periodic extension is harmless.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import fft

from .errors import (
    ConfinementError,
    DivergentEnergy,
    DomainError,
    GeometryError,
    GridMismatch,
    NonConvergence,
    NormalizationError,
)
from .tolerances import tol


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid: unit torus [0,1)^d or box [-X, X)^d."""

    dim: int
    n: int
    geometry: str = "torus"
    X: float = 1.0

    def __post_init__(self):
        if self.dim not in (2, 3):
            raise GeometryError("dim must be 2 or 3")
        if self.geometry not in ("torus", "box"):
            raise GeometryError("geometry must be 'torus' or 'box'")
        if self.n < 4 or self.n % 2:
            raise GeometryError("n must be an even number >= 4")
        if not self.X > 0:
            raise GeometryError("X must be positive")

    @property
    def shape(self):
        return (self.n,) * self.dim

    @property
    def length(self):
        return 1.0 if self.geometry == "torus" else 2.0 * self.X

    @property
    def spacing(self):
        return self.length / self.n

    @property
    def origin(self):
        return 0.0 if self.geometry == "torus" else -self.X

    @property
    def dV(self):
        return self.spacing**self.dim

    def axes(self):
        """Sparse coordinate arrays (broadcastable)."""
        x = self.origin + self.spacing * np.arange(self.n)
        out = []
        for j in range(self.dim):
            s = [1] * self.dim
            s[j] = self.n
            out.append(x.reshape(s))
        return out

    def wavenumbers(self, zero_nyquist=False):
        k = 2.0 * np.pi * np.fft.fftfreq(self.n, d=self.spacing)
        if zero_nyquist:
            # first derivatives of real fields stay real
            k[self.n // 2] = 0.0
        out = []
        for j in range(self.dim):
            s = [1] * self.dim
            s[j] = self.n
            out.append(k.reshape(s))
        return out

    def k2(self):
        return sum(k * k for k in self.wavenumbers())


def harmonic_potential(grid, freqs=1.0):
    """sum_j (w_j x_j)^2; with w = 1 the linear ground energy is ``dim``."""
    w = np.broadcast_to(np.asarray(freqs, dtype=float), (grid.dim,))
    return sum((wj * xj) ** 2 for wj, xj in zip(w, grid.axes())) + np.zeros(grid.shape)


def coupling_2d(N, a):
    """Two-dimensional coupling g = N / |log(N a^2)|."""
    if N < 2:
        raise DomainError("N must be >= 2")
    if not a > 0:
        raise DomainError("a must be positive")
    x = N * a * a
    if x >= 1.0:
        raise DomainError(f"N a^2 = {x} must be < 1")
    return N / abs(math.log(x))


@dataclass
class GpProblem:
    grid: Grid
    coupling: float
    V_ext: np.ndarray | None = None
    Omega: np.ndarray | None = None
    confinement_margin: float = 10.0

    def __post_init__(self):
        if self.coupling < 0:
            raise ValueError("coupling must be >= 0")
        if self.V_ext is not None:
            self.V_ext = np.asarray(self.V_ext, dtype=float)
            if self.V_ext.shape != self.grid.shape:
                raise GridMismatch("V_ext does not match the grid shape")
        if self.Omega is not None:
            om = np.atleast_1d(np.asarray(self.Omega, dtype=float))
            if self.grid.dim == 2:
                if om.size == 3:
                    if om[0] or om[1]:
                        raise GeometryError("in 2D only rotation about the z axis is possible")
                    om = om[2:]
                if om.size != 1:
                    raise GeometryError("2D Omega must be a scalar")
            elif om.size != 3:
                raise GeometryError("3D Omega must have three components")
            self.Omega = om if np.any(om) else None
        if self.Omega is not None and self.grid.geometry == "torus":
            raise GeometryError("rotation requires a box geometry")

    @classmethod
    def torus(cls, dim, n, a):
        """Uniform gas on the unit torus with c = 4 pi a."""
        return cls(Grid(dim, n, "torus"), 4.0 * math.pi * a)

    @classmethod
    def trap(cls, dim, n, X, coupling, freqs=1.0, Omega=None):
        g = Grid(dim, n, "box", X)
        return cls(g, coupling, harmonic_potential(g, freqs), Omega)

    @property
    def rotating(self):
        return self.Omega is not None

    def vector_potential(self):
        """Components of A = (Omega ^ x)/2."""
        if not self.rotating:
            return None
        x = self.grid.axes()
        if self.grid.dim == 2:
            w = self.Omega[0]
            return [-0.5 * w * x[1], 0.5 * w * x[0]]
        o = self.Omega
        return [0.5 * (o[1] * x[2] - o[2] * x[1]),
                0.5 * (o[2] * x[0] - o[0] * x[2]),
                0.5 * (o[0] * x[1] - o[1] * x[0])]

    def A2(self):
        A = self.vector_potential()
        return sum(np.broadcast_to(a, self.grid.shape) ** 2 for a in A)

    def W(self):
        V = self.V_ext if self.V_ext is not None else np.zeros(self.grid.shape)
        return V - self.A2() if self.rotating else V

    def check_confinement(self):
        """W must rise by ``confinement_margin`` from its minimum to every boundary sample."""
        W = self.W()
        idx = np.indices(W.shape)
        edge = np.zeros(W.shape, dtype=bool)
        for ax in idx:
            edge |= (ax == 0) | (ax == self.grid.n - 1)
        rise = W[edge].min() - W.min()
        if not rise >= self.confinement_margin:
            raise ConfinementError(f"W rises only {rise:.3g} towards the grid boundary")
        return rise


@dataclass
class GpState:
    phi: np.ndarray
    grid: Grid
    energy: float = float("nan")
    breakdown: dict = field(default_factory=dict)
    mu: float = float("nan")
    residual: float = float("nan")
    iterations: int = 0
    history: list = field(default_factory=list)

    @property
    def norm(self):
        return float(np.sqrt(np.sum(np.abs(self.phi) ** 2) * self.grid.dV))


# ---------------------------------------------------------------------------
# evaluation


def _check(phi, problem):
    if phi.shape != problem.grid.shape:
        raise GridMismatch(f"field shape {phi.shape} does not match grid {problem.grid.shape}")


def _gradient_components(phi, grid):
    ph = fft.fftn(phi)
    return [fft.ifftn(1j * k * ph) for k in grid.wavenumbers(zero_nyquist=True)]


def energy_terms(phi, problem):
    """Energy breakdown of an arbitrary (not necessarily normalised) field."""
    _check(phi, problem)
    g = problem.grid
    dV = g.dV
    dens = np.abs(phi) ** 2
    ph = fft.fftn(phi)
    kinetic = float(np.sum(g.k2() * np.abs(ph) ** 2)) * dV / phi.size
    external = float(np.sum(problem.V_ext * dens)) * dV if problem.V_ext is not None else 0.0
    interaction = problem.coupling * float(np.sum(dens * dens)) * dV
    out = {"kinetic": kinetic, "external": external, "interaction": interaction}
    if not problem.rotating:
        out["total"] = kinetic + external + interaction
        return out
    # magnetic kinetic term evaluated directly as sum_j |i d_j phi + A_j phi|^2;
    # first derivatives drop the Nyquist mode, whose kinetic share is added back
    A = problem.vector_potential()
    grads = _gradient_components(phi, g)
    nyquist = kinetic - float(sum(np.sum(np.abs(d) ** 2) for d in grads)) * dV
    magnetic = float(sum(np.sum(np.abs(1j * d + a * phi) ** 2) for d, a in zip(grads, A))) * dV + nyquist
    W_term = float(np.sum(problem.W() * dens)) * dV
    out.update(magnetic_kinetic=magnetic, W_term=W_term,
               angular_momentum=angular_momentum(phi, problem, grads))
    out["total"] = magnetic + W_term + interaction
    return out


def energy_functional(phi, problem):
    return energy_terms(phi, problem)["total"]


def gp_energy(state, problem):
    """Energy breakdown of a normalised state."""
    _check(state.phi, problem)
    if abs(state.norm - 1.0) > tol("gp.normalization"):
        raise NormalizationError(f"state norm {state.norm!r} differs from 1")
    return energy_terms(state.phi, problem)


def angular_momentum(phi, problem, grads=None):
    """Real part of <phi, L phi> with L = x ^ (-i grad); a 1-vector in 2D."""
    g = problem.grid
    if grads is None:
        grads = _gradient_components(phi, g)
    x = g.axes()
    c = np.conj(phi)

    def comp(i, j):
        # <(x_i p_j - x_j p_i)>, p = -i d
        return float(np.real(np.sum(c * (-1j) * (x[i] * grads[j] - x[j] * grads[i])))) * g.dV

    if g.dim == 2:
        return np.array([comp(0, 1)])
    return np.array([comp(1, 2), comp(2, 0), comp(0, 1)])


def apply_hamiltonian(phi, problem):
    """H phi with dE = 2 Re <H phi, d phi>; H = -Lap + V + 2c|phi|^2 (+ rotation)."""
    _check(phi, problem)
    g = problem.grid
    ph = fft.fftn(phi)
    out = fft.ifftn(g.k2() * ph)
    if problem.V_ext is not None:
        out += problem.V_ext * phi
    out += 2.0 * problem.coupling * np.abs(phi) ** 2 * phi
    if problem.rotating:
        # (i grad + A)^2 + W = -Lap + 2i A.grad + V  (div A = 0)
        A = problem.vector_potential()
        for kj, a in zip(g.wavenumbers(zero_nyquist=True), A):
            out += 2j * a * fft.ifftn(1j * kj * ph)
    if not np.iscomplexobj(phi) and not problem.rotating:
        out = out.real
    return out


gradient = apply_hamiltonian


# ---------------------------------------------------------------------------
# minimisation


def _inner(a, b, dV):
    return float(np.real(np.vdot(a, b))) * dV


def _normalize(phi, dV):
    return phi / math.sqrt(_inner(phi, phi, dV))


def default_init(problem):
    g = problem.grid
    if g.geometry == "torus":
        phi = np.ones(g.shape, dtype=complex)
    else:
        phi = np.exp(-0.5 * sum(x * x for x in g.axes())) + np.zeros(g.shape, dtype=complex)
    return _normalize(phi, g.dV)


def random_init(problem, rng, bandwidth=4):
    """Smooth random complex field (Fourier noise below ~bandwidth modes)."""
    g = problem.grid
    noise = rng.normal(size=g.shape) + 1j * rng.normal(size=g.shape)
    kscale = 2.0 * np.pi * bandwidth / g.length
    phi = fft.ifftn(noise * np.exp(-0.5 * g.k2() / kscale**2))
    if g.geometry == "box":
        phi = phi * default_init(problem)
    return _normalize(phi, g.dV)


def _fix_phase(phi):
    s = np.sum(phi)
    if abs(s) > 0:
        phi = phi * (np.conj(s) / abs(s))
    return phi


def minimize_gp(problem, init=None, tol_energy=1e-10, max_iter=5000, sigma=None):
    """Riemannian preconditioned nonlinear CG on the unit sphere.

    Directions are preconditioned by (k^2 + sigma)^{-1}, steps follow the
    great circle through phi, and the step length comes from a secant model
    of dE/dt with an energy acceptance test. Stops once both the energy change
    is below ``tol_energy`` and the residual ||H phi - mu phi|| is below
    10 * ``tol_energy``.
    """
    if not tol_energy > 0:
        raise ValueError("tol must be positive")
    g = problem.grid
    dV = g.dV
    if problem.rotating:
        problem.check_confinement()
    phi = default_init(problem) if init is None else np.asarray(init.phi if isinstance(init, GpState) else init)
    _check(phi, problem)
    phi = _normalize(phi.astype(complex), dV)
    k2 = g.k2()
    res_tol = tol("gp.residual_factor") * tol_energy

    def evaluate(p):
        Hp = apply_hamiltonian(p, problem)
        lam = _inner(p, Hp, dV)
        return Hp, lam

    E = energy_functional(phi, problem)
    Hp, lam = evaluate(phi)
    if sigma is None:
        sigma = max(1.0, abs(lam))
    history = [E]
    d_prev = r_prev_z = None
    t_prev = None
    for it in range(1, max_iter + 1):
        r = Hp - lam * phi
        res = math.sqrt(_inner(r, r, dV))
        if it > 1 and abs(history[-2] - history[-1]) < tol_energy and res < res_tol:
            break
        P = lambda v: fft.ifftn(fft.fftn(v) / (k2 + sigma))
        z = P(r)
        Pphi = P(phi)
        z = z - (_inner(phi, z, dV) / _inner(phi, Pphi, dV)) * Pphi
        rz = _inner(r, z, dV)
        if d_prev is not None:
            beta = max(0.0, (rz - _inner(r_prev, z, dV)) / r_prev_z)
            d = -z + beta * (d_prev - _inner(phi, d_prev, dV) * phi)
        else:
            d = -z
        d = d - _inner(phi, d, dV) * phi
        slope = 2.0 * _inner(r, d, dV)
        if slope >= 0:
            d = -z + (_inner(phi, z, dV)) * phi
            slope = 2.0 * _inner(r, d, dV)
        dn = math.sqrt(_inner(d, d, dV))
        if dn == 0:
            break
        u = d / dn
        slope_u = slope / dn

        def along(t):
            return math.cos(t) * phi + math.sin(t) * u

        def dE(t, p, Hq):
            tangent = -math.sin(t) * phi + math.cos(t) * u
            return 2.0 * _inner(Hq, tangent, dV)

        t0 = t_prev if t_prev else min(1.0, dn)
        t0 = min(t0, 0.5)
        p0 = along(t0)
        H0 = apply_hamiltonian(p0, problem)
        s0 = dE(t0, p0, H0)
        curv = s0 - slope_u
        t = t0 * slope_u / (slope_u - s0) if curv > 0 else 2.0 * t0
        t = min(max(t, 0.0), 1.0)
        accepted = False
        for _ in range(40):
            p_new = along(t)
            E_new = energy_functional(p_new, problem)
            if not math.isfinite(E_new):
                raise DivergentEnergy("energy became non-finite")
            if E_new <= E + 1e-14 * abs(E) + 1e-300:
                accepted = True
                break
            t *= 0.5
        if not accepted:
            # no representable decrease left along this direction
            if res < res_tol:
                break
            d_prev = None
            t_prev = None
            continue
        phi = _normalize(p_new, dV)
        E = E_new
        history.append(E)
        Hp, lam = evaluate(phi)
        d_prev, r_prev, r_prev_z, t_prev = d, r, rz, t
    else:
        raise NonConvergence(f"no convergence after {max_iter} iterations (residual {res:.3e})")

    if not problem.rotating:
        phi = _fix_phase(phi)
        Hp, lam = evaluate(phi)
    r = Hp - lam * phi
    state = GpState(phi=phi, grid=g, mu=lam, residual=math.sqrt(_inner(r, r, dV)),
                    iterations=it, history=history)
    state.breakdown = gp_energy(state, problem)
    state.energy = state.breakdown["total"]
    return state


def vortex_seed(problem, rng, strength=0.1):
    """Trap Gaussian plus a small (x + i y) component to break rotational symmetry."""
    g = problem.grid
    x = g.axes()
    base = default_init(problem)
    phase = np.exp(2j * np.pi * rng.random())
    return _normalize(base * (1.0 + strength * phase * (x[0] + 1j * x[1])), g.dV)


def minimize_gp_rotating(problem, init=None, tol_energy=1e-10, max_iter=5000, seed=0):
    """Minimise the rotating-frame functional; W must confine on the grid."""
    if not problem.rotating:
        return minimize_gp(problem, init, tol_energy, max_iter)
    problem.check_confinement()
    if init is None:
        init = vortex_seed(problem, np.random.default_rng(seed))
    return minimize_gp(problem, init, tol_energy, max_iter)
