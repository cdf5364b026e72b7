"""Translate sub-network amplitudes/phases into separable Fourier coefficients.

A sub-network with frequency ``n`` equals a combination of the ``2**m``
products ``prod_{p not in I_k} cos(n_p x_p) * prod_{q in I_k} sin(n_q x_q)``.
The coefficient of basis ``k`` depends only on ``|I_k| mod 4``, which picks
cos or sin of the phase and an overall sign.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lexi import SignMatrix, sign_factors, sign_matrix, sine_masks
from .model import SubNetwork


@dataclass
class SeparableBlock:
    n: np.ndarray
    a: np.ndarray  # length 2**m, ordered by basis index k

    def __post_init__(self):
        self.n = np.asarray(self.n, dtype=float).ravel()
        self.a = np.asarray(self.a, dtype=float).ravel()
        if self.a.size != 2 ** self.n.size:
            raise ValueError(f"need {2 ** self.n.size} coefficients for m={self.n.size}, "
                             f"got {self.a.size}")

    @property
    def m(self) -> int:
        return self.n.size


def to_separable_2d(A1, A2, phi1, phi2):
    a1 = A1 * np.cos(phi1) + A2 * np.cos(phi2)
    a2 = A1 * np.sin(phi1) - A2 * np.sin(phi2)
    a3 = A1 * np.sin(phi1) + A2 * np.sin(phi2)
    a4 = -A1 * np.cos(phi1) + A2 * np.cos(phi2)
    return a1, a2, a3, a4


def to_separable_md(subnet: SubNetwork, S: SignMatrix | None = None) -> SeparableBlock:
    m = subnet.m
    if S is None:
        S = sign_matrix(m)
    if S.m != m:
        raise ValueError(f"sign matrix is for m={S.m}, sub-network has m={m}")
    s = sign_factors(S)  # (l, 2**m)
    card = sine_masks(m).sum(axis=1) % 4
    ac = (subnet.A * np.cos(subnet.b)) @ s
    as_ = (subnet.A * np.sin(subnet.b)) @ s
    a = np.select([card == 0, card == 1, card == 2, card == 3], [ac, as_, -ac, -as_])
    return SeparableBlock(n=subnet.n.copy(), a=a)


def basis_values(n, x) -> np.ndarray:
    """Separable basis functions at points ``x`` (``(m,)`` or ``(P, m)``), shape ``(P, 2**m)``."""
    n = np.asarray(n, dtype=float).ravel()
    X = np.atleast_2d(np.asarray(x, dtype=float))
    if X.shape[1] != n.size:
        raise ValueError(f"block has m={n.size}, points have width {X.shape[1]}")
    masks = sine_masks(n.size)
    nx = X * n
    cos, sin = np.cos(nx), np.sin(nx)
    out = np.ones((X.shape[0], masks.shape[0]))
    for j in range(n.size):
        out *= np.where(masks[None, :, j], sin[:, j:j + 1], cos[:, j:j + 1])
    return out


def eval_separable(block: SeparableBlock, x):
    X = np.asarray(x, dtype=float)
    out = basis_values(block.n, X) @ block.a
    return out[0] if X.ndim == 1 else out


def reflect_subnet(subnet: SubNetwork, q: int) -> SubNetwork:
    """Negate frequency component ``q`` (0-based) and re-index units so the output is unchanged.

    Flipping coordinate ``q`` maps each sign row onto another row, or onto the
    negative of one when ``q = 0``; ``cos`` is even, so the latter only
    negates that unit's bias.
    """
    S = sign_matrix(subnet.m)
    rows = S.rows.astype(int)
    lookup = {tuple(r): i for i, r in enumerate(rows)}
    A = np.empty_like(subnet.A)
    b = np.empty_like(subnet.b)
    for i, r in enumerate(rows):
        target = r.copy()
        target[q] = -target[q]
        if target[0] == 1:
            j = lookup[tuple(target)]
            A[i], b[i] = subnet.A[j], subnet.b[j]
        else:
            j = lookup[tuple(-target)]
            A[i], b[i] = subnet.A[j], -subnet.b[j]
    n = subnet.n.copy()
    n[q] = -n[q]
    return SubNetwork(n, A, b)


def translate_model(model):
    """Yield ``(subnet_index, k, sine_mask, a_k, n)`` for every sub-network and basis index."""
    masks = sine_masks(model.m)
    weights = 1 << np.arange(model.m)[::-1]
    for idx, sub in enumerate(model.subnets):
        block = to_separable_md(sub, model.sign)
        for k in range(2 ** model.m):
            yield idx, k + 1, int(masks[k] @ weights), block.a[k], block.n
