"""Integer-lattice helpers shared by the momentum sums.

Sums over (2*pi/L) Z^3 of radial summands collapse onto shells |n|^2 = m, so
the only lattice information needed is the representation count r3(m).
"""

from functools import lru_cache

import numpy as np


@lru_cache(maxsize=32)
def _r3_cached(m_max):
    r1 = np.zeros(m_max + 1, dtype=np.int64)
    k = 0
    while k * k <= m_max:
        r1[k * k] += 1 if k == 0 else 2
        k += 1
    squares = np.flatnonzero(r1)

    def fold(base):
        out = np.zeros_like(base)
        for s in squares:
            out[s:] += r1[s] * base[: m_max + 1 - s]
        return out

    r3 = fold(fold(r1))
    r3.setflags(write=False)
    return r3


def shell_counts(m_max):
    """Number of integer vectors n in Z^3 with |n|^2 == m, for m = 0..m_max."""
    return _r3_cached(int(m_max))


def lattice_vectors(m_max, include_zero=False):
    """All integer vectors with |n|^2 <= m_max, sorted by (|n|^2, lexicographic)."""
    k = int(np.floor(np.sqrt(m_max)))
    r = np.arange(-k, k + 1)
    n = np.stack(np.meshgrid(r, r, r, indexing="ij"), axis=-1).reshape(-1, 3)
    m = np.sum(n * n, axis=1)
    keep = m <= m_max
    if not include_zero:
        keep &= m > 0
    n, m = n[keep], m[keep]
    order = np.lexsort((n[:, 2], n[:, 1], n[:, 0], m))
    return n[order]
