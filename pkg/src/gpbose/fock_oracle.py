"""Exact diagonalization on truncated bosonic Fock spaces with a few modes.

This is the brute-force side of the excitation-spectrum checks: occupation
vectors are enumerated explicitly, ladder operators become sparse matrices,
and quadratic pair Hamiltonians

    H = shift + sum_pairs D (n_p + n_-p) + B (a*_p a*_-p + a_p a_-p)

are diagonalized numerically and compared against their closed-form
symplectic diagonalization.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.linalg import eigh
from scipy.sparse.linalg import eigsh

from .errors import BudgetExceeded, EigensolveFailure, IdentityViolation, TruncationWarning, UnstableForm
from .tolerances import tol


def _neg(p):
    return tuple(-c for c in p)


@dataclass(frozen=True)
class ModeSet:
    """Momentum labels (integer tuples). With ``paired`` the set must be closed
    under p -> -p; the zero mode, when present, is its own partner."""

    modes: tuple
    paired: bool = True

    def __post_init__(self):
        modes = tuple(tuple(int(c) for c in p) for p in self.modes)
        object.__setattr__(self, "modes", modes)
        if len(set(modes)) != len(modes):
            raise ValueError("duplicate mode labels")
        if self.paired:
            missing = [p for p in modes if _neg(p) not in modes]
            if missing:
                raise ValueError(f"modes without a -p partner: {missing}")

    @classmethod
    def pairs_of(cls, momenta):
        """+p, -p for each given p, in that order."""
        modes = []
        for p in momenta:
            modes += [tuple(p), _neg(p)]
        return cls(tuple(modes))

    def __len__(self):
        return len(self.modes)

    def index(self, p):
        return self.modes.index(tuple(p))

    @property
    def zero_index(self):
        z = tuple(0 for _ in self.modes[0])
        return self.modes.index(z) if z in self.modes else None

    def pairs(self):
        """Index pairs (i, j) with modes[j] = -modes[i], each pair once."""
        out, seen = [], set()
        for i, p in enumerate(self.modes):
            if i in seen or not any(p):
                continue
            j = self.index(_neg(p))
            seen |= {i, j}
            out.append((i, j))
        return out


def _capped_count(k, n_max, total, at_most):
    """Number of k-vectors with entries in [0, n_max] and sum == / <= total."""
    ways = np.zeros(total + 1, dtype=object)
    ways[0] = 1
    for _ in range(k):
        new = np.zeros_like(ways)
        for s in range(total + 1):
            new[s] = sum(ways[s - n] for n in range(min(n_max, s) + 1))
        ways = new
    return int(sum(ways)) if at_most else int(ways[total])


class TruncatedFock:
    """Occupation-number basis with per-mode cap ``n_max``.

    ``particles`` optionally constrains the total occupation, to exactly that
    value or, with ``at_most``, to at most that value. Basis vectors are
    stored in lexicographic order.
    """

    def __init__(self, mode_set, n_max, particles=None, at_most=False, budget=None):
        self.mode_set = mode_set
        self.n_max = int(n_max)
        self.particles = particles
        self.at_most = at_most
        self.budget = int(tol("fock.budget") if budget is None else budget)
        k = len(mode_set)
        if particles is None:
            dim = (self.n_max + 1) ** k
        else:
            dim = _capped_count(k, self.n_max, int(particles), at_most)
        if dim > self.budget:
            raise BudgetExceeded(f"Fock dimension {dim} exceeds the budget {self.budget}")
        self.radix = self.n_max + 1
        grids = np.indices((self.radix,) * k).reshape(k, -1).T
        if particles is not None:
            s = grids.sum(axis=1)
            grids = grids[(s <= particles) if at_most else (s == particles)]
        self.basis = np.ascontiguousarray(grids)
        self.codes = self._encode(self.basis)
        self.dimension = len(self.basis)
        assert self.dimension == dim
        self.basis.setflags(write=False)

    def _encode(self, occ):
        w = self.radix ** np.arange(occ.shape[1] - 1, -1, -1)
        return occ @ w

    def lookup(self, occ):
        """Basis indices of occupation vectors (-1 where not in the basis)."""
        occ = np.asarray(occ)
        ok = np.all((occ >= 0) & (occ <= self.n_max), axis=1)
        codes = self._encode(np.where(ok[:, None], occ, 0))
        idx = np.searchsorted(self.codes, codes)
        idx = np.minimum(idx, self.dimension - 1)
        ok &= self.codes[idx] == codes
        return np.where(ok, idx, -1)

    def index_of(self, occ):
        i = int(self.lookup(np.asarray([occ]))[0])
        if i < 0:
            raise KeyError(f"{occ} is not a basis vector")
        return i

    def _move(self, shifts, amplitude):
        """Sparse matrix sending |n> to amplitude(n) |n + shifts>."""
        target = self.lookup(self.basis + shifts)
        amp = amplitude(self.basis)
        keep = (target >= 0) & (amp != 0)
        src = np.flatnonzero(keep)
        return sparse.csr_matrix((amp[keep].astype(float), (target[keep], src)),
                                 shape=(self.dimension, self.dimension))

    def annihilation(self, j):
        e = np.zeros(len(self.mode_set), dtype=int)
        e[j] = -1
        return self._move(e, lambda b: np.sqrt(b[:, j]))

    def number(self, j):
        return sparse.diags(self.basis[:, j].astype(float)).tocsr()

    def total_number(self):
        return sparse.diags(self.basis.sum(axis=1).astype(float)).tocsr()

    def bilinear(self, i, j):
        """a*_i a_j computed directly, without leaving a constrained sector."""
        if i == j:
            return self.number(i)
        e = np.zeros(len(self.mode_set), dtype=int)
        e[i], e[j] = 1, -1
        return self._move(e, lambda b: np.sqrt(b[:, j] * (b[:, i] + 1.0)))

    def pair_creation(self, i, j):
        """a*_i a*_j for i != j."""
        e = np.zeros(len(self.mode_set), dtype=int)
        e[i], e[j] = 1, 1
        return self._move(e, lambda b: np.sqrt((b[:, i] + 1.0) * (b[:, j] + 1.0)))


def build_operators(space):
    """Annihilation matrices, one per mode, in the space's basis."""
    if space.dimension > space.budget:
        raise BudgetExceeded(f"Fock dimension {space.dimension} exceeds the budget")
    return [space.annihilation(j) for j in range(len(space.mode_set))]


# ---------------------------------------------------------------- excitation map

@dataclass
class ExcitationMapReport:
    N: int
    dimension: int
    deviations: dict = field(default_factory=dict)

    @property
    def max_deviation(self):
        return max(self.deviations.values()) if self.deviations else 0.0


def excitation_map(N, modes):
    """The N-particle sector, the excitation space and the unitary between them.

    A basis state of the sector is fixed by the excitation occupations
    (the condensate takes the rest), so U maps |N - |n|, n> to |n> with
    |n| <= N. Returns ``(sector, excitations, U)`` with U of shape
    (excitations.dimension, sector.dimension).
    """
    z = modes.zero_index
    if z is None:
        raise ValueError("the mode set must contain the zero mode")
    sector = TruncatedFock(modes, N, particles=N)
    rest = ModeSet(tuple(p for i, p in enumerate(modes.modes) if i != z), paired=False)
    exc = TruncatedFock(rest, N, particles=N, at_most=True)
    plus = np.delete(sector.basis, z, axis=1)
    rows = exc.lookup(plus)
    assert np.all(rows >= 0) and len(set(rows.tolist())) == exc.dimension == sector.dimension
    U = sparse.csr_matrix((np.ones(sector.dimension), (rows, np.arange(sector.dimension))),
                          shape=(exc.dimension, sector.dimension))
    return sector, exc, U


def _compare(name, lhs, rhs, report, threshold):
    diff = (lhs - rhs).toarray() if sparse.issparse(lhs - rhs) else np.asarray(lhs - rhs)
    dev = float(np.max(np.abs(diff))) if diff.size else 0.0
    report.deviations[name] = max(report.deviations.get(name, 0.0), dev)
    if dev > threshold:
        r, c = np.unravel_index(np.argmax(np.abs(diff)), diff.shape)
        raise IdentityViolation(name, int(r), int(c), dev)


def excitation_map_check(N, modes, threshold=None):
    """Verify the conjugation rules of the excitation map as matrix identities:

    U a*_p a_q U* = a*_p a_q,  U a*_0 a_0 U* = N - N_+,
    U a*_p a_0 U* = a*_p sqrt(N - N_+),
    and (U a*_p a_0 U*)(U a*_0 a_p U*) / N = a*_p (N - N_+) a_p / N.
    """
    if N < 1 or N > 6:
        raise ValueError("N must be between 1 and 6")
    threshold = tol("fock.identity") if threshold is None else threshold
    z = modes.zero_index
    sector, exc, U = excitation_map(N, modes)
    rep = ExcitationMapReport(N, sector.dimension)
    Ut = U.T.tocsr()
    conj = lambda op: U @ op @ Ut  # noqa: E731

    # excitation-space operators on |n| <= N + 1, restricted to |n| <= N, so
    # that raising out of the space is represented exactly where it matters
    big = TruncatedFock(exc.mode_set, N + 1, particles=N + 1, at_most=True)
    keep = big.lookup(exc.basis)
    restrict = lambda op: op[keep][:, keep]  # noqa: E731
    n_plus = exc.total_number()
    remaining = sparse.diags(N - exc.basis.sum(axis=1).astype(float)).tocsr()
    root = sparse.diags(np.sqrt(N - exc.basis.sum(axis=1).astype(float))).tocsr()

    others = [i for i in range(len(modes)) if i != z]
    for a_, i in enumerate(others):
        for b_, j in enumerate(others):
            _compare(f"a*_{modes.modes[i]} a_{modes.modes[j]}",
                     conj(sector.bilinear(i, j)), exc.bilinear(a_, b_), rep, threshold)
    _compare("a*_0 a_0", conj(sector.number(z)), N * sparse.identity(exc.dimension) - n_plus,
             rep, threshold)
    for a_, i in enumerate(others):
        create = restrict(big.annihilation(a_).T.tocsr())
        annihilate = restrict(big.annihilation(a_))
        b_dag = conj(sector.bilinear(i, z))
        _compare(f"a*_{modes.modes[i]} a_0", b_dag, create @ root, rep, threshold)
        b = conj(sector.bilinear(z, i))
        _compare(f"b*b_{modes.modes[i]}", b_dag @ b / N, create @ remaining @ annihilate / N,
                 rep, threshold)
    vac = np.zeros(sector.dimension)
    vac[sector.index_of([N if k == z else 0 for k in range(len(modes))])] = 1.0
    image = U @ vac
    _compare("vacuum", image[None, :], np.eye(1, exc.dimension), rep, threshold)
    rep.deviations["vacuum N_+"] = abs(float(image @ (n_plus @ image)))
    return rep


# ---------------------------------------------------------------- quadratic Hamiltonians

@dataclass(frozen=True)
class QuadraticHamiltonian:
    """Per-pair coefficients D, B (arrays) and a constant shift."""

    D: tuple
    B: tuple
    shift: float = 0.0

    def __post_init__(self):
        D = tuple(float(x) for x in np.atleast_1d(self.D))
        B = tuple(float(x) for x in np.atleast_1d(self.B))
        if len(D) != len(B):
            raise ValueError("D and B need one entry per pair")
        bad = [k for k, (d, b) in enumerate(zip(D, B)) if not d > abs(b)]
        if bad:
            raise UnstableForm(f"D <= |B| for pairs {bad}")
        object.__setattr__(self, "D", D)
        object.__setattr__(self, "B", B)

    @property
    def n_pairs(self):
        return len(self.D)

    def assemble(self, space):
        """Sparse matrix on a space whose modes are [+p1, -p1, +p2, -p2, ...]."""
        pairs = space.mode_set.pairs()
        if len(pairs) != self.n_pairs or len(space.mode_set) != 2 * self.n_pairs:
            raise ValueError("space must consist of exactly the Hamiltonian's pairs")
        H = self.shift * sparse.identity(space.dimension, format="csr")
        for (i, j), D, B in zip(pairs, self.D, self.B):
            up = space.pair_creation(i, j)
            H = H + D * (space.number(i) + space.number(j)) + B * (up + up.T)
        return H.tocsr()


@dataclass(frozen=True)
class BogoliubovDiag:
    """tau per pair (tanh 2 tau = -B/D), eps = sqrt(D^2 - B^2), and the ground
    shift sum_pairs (eps - D), i.e. (eps - D)/2 for each of the two modes."""

    tau: tuple
    eps: tuple
    ground_shift: float

    def ground_energy(self, h):
        return h.shift + self.ground_shift

    def depletion(self):
        """Expected excitation number 2 sinh^2 tau summed over pairs."""
        return float(sum(2.0 * math.sinh(t) ** 2 for t in self.tau))

    def truncation_estimate(self, n_max):
        """Weight of pair numbers above n_max: sum_pairs tanh(tau)^(2 (n_max + 1))."""
        return float(sum(math.tanh(abs(t)) ** (2 * (n_max + 1)) for t in self.tau))


def symplectic_diagonalize(h):
    tau, eps, shift = [], [], 0.0
    for D, B in zip(h.D, h.B):
        if not D > abs(B):
            raise UnstableForm("D <= |B|")
        e = math.sqrt((D - B) * (D + B))
        tau.append(-math.atanh(B / D) / 2.0)
        eps.append(e)
        shift += e - D
    return BogoliubovDiag(tuple(tau), tuple(eps), shift)


def pair_space(n_pairs, n_max, budget=None):
    """Fock space for ``n_pairs`` +-p pairs along the first axis."""
    return TruncatedFock(ModeSet.pairs_of([(k + 1, 0, 0) for k in range(n_pairs)]), n_max,
                         budget=budget)


def _gershgorin_floor(H):
    Hd = H.diagonal()
    off = np.asarray(abs(H).sum(axis=1)).ravel() - np.abs(Hd)
    return float(np.min(Hd - off))


def _lowest(H, k):
    n = H.shape[0]
    k = min(k, n)
    if n <= tol("fock.dense_limit"):
        return eigh(H.toarray(), subset_by_index=[0, k - 1])
    sigma = _gershgorin_floor(H) - 1.0
    w, v = eigsh(H, k=k, sigma=sigma, which="LM", tol=1e-14)
    order = np.argsort(w)
    w, v = w[order], v[:, order]
    res = np.linalg.norm(H @ v - v * w, axis=0)
    if np.any(res > 1e-10 * np.maximum(1.0, np.abs(w))):
        raise EigensolveFailure(f"eigenpair residuals {res.max():.3e} above 1e-10")
    return w, v


def pair_charges(space):
    """n_p - n_-p for every pair, per basis state; conserved by pair Hamiltonians."""
    pairs = space.mode_set.pairs()
    return np.stack([space.basis[:, i] - space.basis[:, j] for i, j in pairs], axis=1)


def _lowest_by_blocks(H, space, k):
    """k lowest eigenpairs, diagonalizing each pair-charge block separately.

    Krylov solvers can return fewer copies of a degenerate eigenvalue than
    its multiplicity; inside one charge block the levels are generically
    simple, so solving block by block keeps the multiplicities exact.
    """
    _, label = np.unique(pair_charges(space), axis=0, return_inverse=True)
    label = label.ravel()
    vals, vecs = [], []
    for b in range(label.max() + 1):
        idx = np.flatnonzero(label == b)
        w, v = _lowest(H[idx][:, idx], min(k, len(idx)))
        for m in range(len(w)):
            vals.append(w[m])
            vecs.append((idx, v[:, m]))
    order = np.argsort(vals, kind="stable")[:k]
    V = np.zeros((space.dimension, len(order)))
    for c, o in enumerate(order):
        V[vecs[o][0], c] = vecs[o][1]
    return np.asarray(vals)[order], V


def _solve(h, space, k, use_symmetry):
    H = h.assemble(space)
    return _lowest_by_blocks(H, space, k) if use_symmetry else _lowest(H, k)


def boundary_weight(state, space):
    """Probability that some mode sits at the occupation cap."""
    at_cap = np.any(space.basis == space.n_max, axis=1)
    return float(np.sum(np.abs(state[at_cap]) ** 2))


@dataclass
class GroundState:
    energy: float
    state: np.ndarray
    occupations: np.ndarray
    boundary_weight: float
    truncation_estimate: float

    @property
    def excitations(self):
        return float(np.sum(self.occupations))


def exact_ground_state(h, space, use_symmetry=True):
    """Lowest eigenpair of the truncated Hamiltonian and its mode occupations.

    With ``use_symmetry`` the pair-charge blocks are solved separately;
    otherwise the whole matrix goes to the dense or iterative eigensolver.
    """
    w, v = _solve(h, space, 1, use_symmetry)
    psi = v[:, 0]
    # fix the sign so the largest component is positive
    psi = psi * np.sign(psi[np.argmax(np.abs(psi))])
    occ = np.abs(psi) ** 2 @ space.basis
    bw = boundary_weight(psi, space)
    if bw > tol("fock.truncation_weight"):
        warnings.warn(f"occupation weight {bw:.2e} at the cap n_max={space.n_max}",
                      TruncationWarning, stacklevel=2)
    est = symplectic_diagonalize(h).truncation_estimate(space.n_max)
    return GroundState(float(w[0]), psi, occ, bw, est)


def excited_levels(h, space, k, use_symmetry=True):
    """The k lowest eigenvalues of the truncated Hamiltonian."""
    return _solve(h, space, k, use_symmetry)[0]


def distinct_gaps(levels, rel_tol=1e-7):
    """(gap, multiplicity) above the lowest level, merging near-equal values."""
    levels = np.sort(np.asarray(levels))
    gaps = levels - levels[0]
    out = []
    for g in gaps[1:]:
        if out and g - out[-1][0] <= rel_tol * max(1.0, out[-1][0]):
            out[-1][1] += 1
        else:
            out.append([float(g), 1])
    return [tuple(x) for x in out]


# ---------------------------------------------------------------- density matrices

@dataclass
class DensityMatrix:
    gamma: np.ndarray
    trace: float
    top_eigenvalue: float
    min_eigenvalue: float

    @property
    def condensate_fraction(self):
        return self.top_eigenvalue / self.trace if self.trace else 0.0


def one_particle_density_matrix(state, space):
    """gamma[p, q] = <a*_p a_q> in the given state."""
    state = np.asarray(state)
    k = len(space.mode_set)
    gamma = np.empty((k, k), dtype=complex if np.iscomplexobj(state) else float)
    for i in range(k):
        for j in range(k):
            gamma[i, j] = np.vdot(state, space.bilinear(i, j) @ state)
    gamma = 0.5 * (gamma + gamma.conj().T)
    w = np.linalg.eigvalsh(gamma)
    return DensityMatrix(gamma, float(np.real(np.trace(gamma))), float(w[-1]), float(w[0]))
