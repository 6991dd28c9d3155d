import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gpbose.bogoliubov import (
    bogoliubov_sum,
    condensation_rate_bound,
    cube_partial_sums,
    depletion,
    depletion_summand,
    dispersion,
    e_lambda,
    energy_bracket,
    enumerate_levels,
    enumerate_spectrum,
    ground_state_energy,
    octant_partial_sums,
)
from gpbose.errors import ThresholdTooLarge, ZeroMomentum
from gpbose.lattice import lattice_vectors

TWO_PI = 2 * math.pi

# frozen from the smoothed cube sums at M = 256 (agrees with M = 128 to 4e-7)
E_LAMBDA = 10.41363


def brute_force_levels(mode_energies, zeta, rel=1e-9):
    """Per-mode depth-first enumeration of occupation vectors, binned by energy."""
    energies = []

    def go(i, e):
        if i == len(mode_energies):
            energies.append(e)
            return
        n = 0
        while e + n * mode_energies[i] <= zeta * (1 + 1e-12):
            go(i + 1, e + n * mode_energies[i])
            n += 1

    go(0, 0.0)
    energies.sort()
    lines = []
    for e in energies:
        if lines and e - lines[-1][0] <= rel * max(1.0, lines[-1][0]):
            lines[-1][1] += 1
        else:
            lines.append([e, 1])
    return lines


# ---------------------------------------------------------------- dispersion

def test_dispersion_free_and_zero_momentum():
    p = TWO_PI * np.array([1.0, -2.0, 0.0])
    assert dispersion(p, 0.0) == pytest.approx(p @ p, rel=1e-15)
    with pytest.raises(ZeroMomentum):
        dispersion([0.0, 0.0, 0.0], 0.3)


def test_dispersion_identity_random():
    rng = np.random.default_rng(10)
    for _ in range(100):
        p = TWO_PI * rng.integers(-6, 7, 3)
        if not p.any():
            continue
        a = rng.uniform(0, 2)
        p2, b = p @ p, 8 * math.pi * a
        assert math.sqrt((p2 + b) ** 2 - b**2) == pytest.approx(dispersion(p, a), rel=1e-12)


def test_phonon_slope():
    a = 0.4
    slopes = [dispersion([q, 0, 0], a) / q for q in (1e-2, 1e-4, 1e-6)]
    assert abs(slopes[-1] - math.sqrt(16 * math.pi * a)) < 1e-5
    assert np.all(np.diff(np.abs(np.array(slopes) - math.sqrt(16 * math.pi * a))) < 0)


@given(st.floats(0.1, 100), st.floats(0.1, 100), st.floats(0, 5), st.floats(0, 5))
def test_dispersion_monotone(q1, q2, a1, a2):
    lo, hi = sorted((q1, q2))
    al, ah = sorted((a1, a2))
    assert dispersion([lo, 0, 0], al) <= dispersion([hi, 0, 0], al)
    assert dispersion([lo, 0, 0], al) <= dispersion([lo, 0, 0], ah)
    assert dispersion([lo, 0, 0], al) >= lo * lo
    if al > 1e-12 * lo * lo:
        assert dispersion([lo, 0, 0], al) > lo * lo


# ---------------------------------------------------------------- e_Lambda

def test_cube_sum_first_shell_brute_force():
    total = 0.0
    for n in itertools.product((-1, 0, 1), repeat=3):
        r2 = sum(c * c for c in n)
        if r2:
            total += math.cos(math.sqrt(r2)) / r2
    assert cube_partial_sums(8)[1] == pytest.approx(total, abs=1e-14)
    assert cube_partial_sums(8)[0] == 0


def test_octant_decomposition_agrees():
    S, O = cube_partial_sums(256), octant_partial_sums(256)
    assert np.max(np.abs(S - O)) <= 1e-12


def test_e_lambda_converges():
    r = e_lambda(256, 3)
    assert r.cutoffs == (64, 128, 256)
    assert np.all(np.abs(np.diff(r.accelerated)) <= 1e-3)
    assert r.uncertainty <= 1e-6
    assert r.value == pytest.approx(E_LAMBDA, abs=1e-5)
    # the raw partial sums still oscillate at the 1e-1 level
    assert np.ptp(r.partial_sums) > 0.1


# ---------------------------------------------------------------- energy and depletion

def test_energy_zero_coupling_exact():
    r = ground_state_energy(50, 0.0)
    assert r.total == 0.0 and r.tail_estimate == 0.0
    assert depletion(0.0).value == 0.0


def test_energy_terms_add_up():
    r = ground_state_energy(1000, 0.05, cutoff=32 * math.pi)
    assert r.total == r.term_leading + r.term_finite_volume + r.term_bogoliubov_sum
    assert r.term_leading == 4 * math.pi * 0.05 * 999
    assert r.term_finite_volume == pytest.approx(E_LAMBDA * 0.05**2, rel=1e-6)
    assert r.caveats
    with pytest.raises(ValueError):
        ground_state_energy(10, 0.1, cutoff=10.0)


@given(st.integers(1, 400), st.floats(0, 3))
def test_summand_signs(m, a):
    p2 = TWO_PI**2 * m
    # the bracket p^2 + 8 pi a - eps - (8 pi a)^2/(2 p^2) is never positive,
    # so the Bogoliubov contribution -1/2 sum is never negative
    assert energy_bracket(p2, a) <= 0
    assert depletion_summand(p2, a) >= 0
    b = 8 * math.pi * a
    assert -energy_bracket(p2, a) <= b**3 / (2 * p2 * p2) * (1 + 1e-12)
    assert depletion_summand(p2, a) <= b**2 / (4 * p2 * p2) * (1 + 1e-12)


@pytest.mark.parametrize("a", [0.01, 0.1, 1.0])
def test_cutoff_doubling_within_tail(a):
    for K in (16 * math.pi, 32 * math.pi, 64 * math.pi):
        s1, t1 = bogoliubov_sum(a, K)
        s2, t2 = bogoliubov_sum(a, 2 * K)
        assert abs(s2 - s1) < t1 and t2 < t1
        d1, d2 = depletion(a, K), depletion(a, 2 * K)
        assert abs(d2.value - d1.value) < d1.tail_estimate and d2.tail_estimate < d1.tail_estimate


def test_summand_decay_slope():
    a = 0.5
    p = TWO_PI * np.sqrt(np.arange(100, 2501, dtype=float))
    for f in (lambda q: -energy_bracket(q * q, a), lambda q: depletion_summand(q * q, a)):
        slope = np.polyfit(np.log(p), np.log(f(p)), 1)[0]
        assert -4.3 <= slope <= -3.7


# ---------------------------------------------------------------- spectrum

def test_vacuum_only_below_first_mode():
    a = 0.2
    e1 = dispersion([TWO_PI, 0, 0], a)
    lines = enumerate_spectrum(a, 0.999 * e1)
    assert len(lines) == 1 and lines[0].energy == 0 and lines[0].degeneracy == 1
    lines = enumerate_spectrum(a, 1.001 * e1)
    assert lines[1].energy == pytest.approx(e1, rel=1e-15) and lines[1].degeneracy == 6


def test_free_spectrum_counts_knapsack():
    # count occupation vectors with sum n_p |n_p|^2 = E, mode by mode
    vecs = lattice_vectors(9)
    weights = np.sum(vecs * vecs, axis=1)
    ways = [1] + [0] * 9
    for w in weights:
        for e in range(w, 10):
            ways[e] += ways[e - w]
    lines = enumerate_spectrum(0.0, 9 * TWO_PI**2)
    assert [round(l.energy / TWO_PI**2, 9) for l in lines] == list(range(10))
    assert [l.degeneracy for l in lines] == ways


def test_interacting_spectrum_complete():
    a, zeta = 0.1, 130.0
    vecs = lattice_vectors(4)
    energies = [dispersion(TWO_PI * v, a) for v in vecs]
    energies = [e for e in energies if e <= zeta]
    ref = brute_force_levels(energies, zeta)
    lines = enumerate_spectrum(a, zeta)
    assert len(lines) == len(ref)
    for line, (e, count) in zip(lines, ref):
        assert line.energy == pytest.approx(e, rel=1e-12)
        assert line.degeneracy == count
        rep = sum(n * dispersion(np.array(p), a) for p, n in line.occupations.items())
        assert rep == pytest.approx(line.energy, rel=1e-12, abs=1e-12)
        assert (line.energy == 0) == (not line.occupations)


def test_enumerate_levels_generic():
    raw = enumerate_levels([1.0, 2.5], [2, 2], 5.0)
    ref = brute_force_levels([1.0, 1.0, 2.5, 2.5], 5.0)
    total = {}
    for e, c, _ in raw:
        total[round(e, 9)] = total.get(round(e, 9), 0) + c
    assert total == {round(e, 9): c for e, c in ref}


def test_spectrum_budget():
    with pytest.raises(ThresholdTooLarge):
        enumerate_spectrum(0.0, 400 * TWO_PI**2, mode_budget=1000)


def test_condensation_rate_bound():
    assert condensation_rate_bound(0.0, C=2.5) == 2.5
    z = 3.7
    assert condensation_rate_bound(2 * z, 1.5) - condensation_rate_bound(z, 1.5) == pytest.approx(1.5 * z)
