"""Sign patterns and basis bookkeeping for m-dimensional Fourier sub-networks.

Each FLM sub-network owns ``l = 2**(m-1)`` cosine neurons whose input weights
are sign-flipped copies of one frequency vector. The sign patterns are the
rows of the lexicographic sign matrix built here. The separable basis index
``k`` (1-based) selects which coordinates carry a sine factor.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

MAX_DIM = 20


@dataclass(frozen=True)
class SignMatrix:
    m: int
    rows: np.ndarray  # (l, m), int8 entries in {+1, -1}

    @property
    def l(self) -> int:
        return self.rows.shape[0]

    def __eq__(self, other):
        if not isinstance(other, SignMatrix):
            return NotImplemented
        return self.m == other.m and np.array_equal(self.rows, other.rows)

    def __hash__(self):
        return hash((self.m, self.rows.tobytes()))


@dataclass(frozen=True)
class BasisIndex:
    k: int
    m: int
    sine_set: frozenset
    cosine_set: frozenset

    @property
    def mask(self) -> int:
        """Bitmask of the sine set, bit ``m - j`` set for coordinate ``j``."""
        return self.k - 1


def sign_matrix(m: int) -> SignMatrix:
    """Return the ``2**(m-1) x m`` sign matrix, rows in lexicographic order.

    The first column is always +1 and +1 sorts before -1. ``m = 1`` gives the
    single row ``[1]``.
    """
    if not isinstance(m, (int, np.integer)) or m < 1:
        raise ValueError(f"input dimension must be an integer >= 1, got {m!r}")
    if m > MAX_DIM:
        raise ValueError(f"input dimension {m} exceeds the supported maximum {MAX_DIM}")
    tails = itertools.product((1, -1), repeat=m - 1)
    rows = np.array([(1, *t) for t in tails], dtype=np.int8).reshape(-1, m)
    rows.setflags(write=False)
    return SignMatrix(m=int(m), rows=rows)


def index_set(k: int, m: int) -> BasisIndex:
    # bit j from the left of the m-bit word k-1 marks coordinate j as a sine
    if m < 1:
        raise ValueError(f"input dimension must be >= 1, got {m}")
    if not 1 <= k <= 2**m:
        raise IndexError(f"basis index {k} outside 1..{2**m}")
    word = k - 1
    sines = frozenset(j for j in range(1, m + 1) if (word >> (m - j)) & 1)
    return BasisIndex(k=k, m=m, sine_set=sines,
                      cosine_set=frozenset(range(1, m + 1)) - sines)


def sign_factor(S: SignMatrix, i: int, k: int) -> int:
    """Product of the row-``i`` signs over the sine set of basis ``k`` (1-based)."""
    if not 1 <= i <= S.l:
        raise IndexError(f"row index {i} outside 1..{S.l}")
    idx = index_set(k, S.m)
    out = 1
    for j in idx.sine_set:
        out *= int(S.rows[i - 1, j - 1])
    return out


def sine_masks(m: int) -> np.ndarray:
    """Boolean ``(2**m, m)`` table, entry ``[k-1, j-1]`` true iff ``j`` is in ``I_k``."""
    k = np.arange(2**m)[:, None]
    shifts = m - 1 - np.arange(m)[None, :]
    return ((k >> shifts) & 1).astype(bool)


def sign_factors(S: SignMatrix) -> np.ndarray:
    """All sign factors at once, shape ``(l, 2**m)``."""
    masks = sine_masks(S.m)
    rows = S.rows.astype(np.int64)
    # product over the masked coordinates; unmasked entries contribute 1
    prod = np.where(masks[None, :, :], rows[:, None, :], 1)
    return prod.prod(axis=2)
