"""Fourier Learning Machine: N parallel cosine sub-networks over m inputs.

Sub-network ``s`` owns a frequency vector ``n[s]`` (length m), and
``l = 2**(m-1)`` hidden cosine units whose input weights are the rows of the
sign matrix multiplied elementwise with ``n[s]``. The model output is

    f(x) = sum_s sum_i A[s, i] * cos((S[i] * n[s]) . x - b[s, i])

Every derivative used downstream (input gradient, diagonal input Hessian and
parameter gradients of all three) is a polynomial in (A, w, x) times the
cosine or sine of the hidden phase, so they are written out in closed form
and share one trig evaluation per hidden unit.

Flat parameter layout: ``[n.ravel(), A.ravel(), b.ravel()]`` (C order).
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .lexi import SignMatrix, sign_matrix


class CheckpointError(ValueError):
    """Malformed or inconsistent checkpoint file."""


@dataclass
class SubNetwork:
    n: np.ndarray
    A: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        self.n = np.asarray(self.n, dtype=float).ravel()
        self.A = np.asarray(self.A, dtype=float).ravel()
        self.b = np.asarray(self.b, dtype=float).ravel()
        m = self.n.size
        l = 2 ** (m - 1)
        if m < 1 or self.A.size != l or self.b.size != l:
            raise ValueError(
                f"sub-network with {m} frequencies needs {l} amplitudes and biases, "
                f"got {self.A.size} and {self.b.size}")

    @property
    def m(self) -> int:
        return self.n.size


@dataclass
class EvalBundle:
    """Value, input derivatives and their parameter Jacobians at a set of points.

    Shapes for P points, m inputs and p parameters: ``value (P,)``,
    ``grad_x (P, m)``, ``diag_hess_x (P, m)``; ``param_grads`` maps the same
    three names to ``(P, p)``, ``(P, m, p)`` and ``(P, m, p)``.
    """
    value: np.ndarray
    grad_x: np.ndarray
    diag_hess_x: np.ndarray
    param_grads: dict


@dataclass
class PointCache:
    X: np.ndarray
    C: np.ndarray  # (P, K) cos of hidden phases
    S: np.ndarray  # (P, K) sin of hidden phases


@dataclass
class GridCache:
    t: np.ndarray
    Z: np.ndarray
    Ca: np.ndarray  # (T, K) time part
    Sa: np.ndarray
    Cb: np.ndarray  # (B, K) remaining coordinates and bias
    Sb: np.ndarray


class FlmModel:
    def __init__(self, n, A, b):
        n = np.array(n, dtype=float, ndmin=2)
        A = np.array(A, dtype=float, ndmin=2)
        b = np.array(b, dtype=float, ndmin=2)
        N, m = n.shape
        l = 2 ** (m - 1)
        if A.shape != (N, l) or b.shape != (N, l):
            raise ValueError(
                f"expected amplitudes and biases of shape {(N, l)}, "
                f"got {A.shape} and {b.shape}")
        self.sign = sign_matrix(m)
        self.n, self.A, self.b = n, A, b

    @classmethod
    def from_subnets(cls, subnets) -> "FlmModel":
        subnets = list(subnets)
        if not subnets:
            raise ValueError("a model needs at least one sub-network")
        return cls([s.n for s in subnets], [s.A for s in subnets], [s.b for s in subnets])

    @property
    def m(self) -> int:
        return self.n.shape[1]

    @property
    def N(self) -> int:
        return self.n.shape[0]

    @property
    def l(self) -> int:
        return self.sign.l

    @property
    def n_params(self) -> int:
        return self.N * (self.m + 2 * self.l)

    @property
    def subnets(self) -> list:
        return [SubNetwork(self.n[s], self.A[s], self.b[s]) for s in range(self.N)]

    @property
    def params(self) -> np.ndarray:
        return np.concatenate([self.n.ravel(), self.A.ravel(), self.b.ravel()])

    @params.setter
    def params(self, theta):
        theta = np.asarray(theta, dtype=float)
        if theta.shape != (self.n_params,):
            raise ValueError(f"expected {self.n_params} parameters, got shape {theta.shape}")
        N, m, l = self.N, self.m, self.l
        self.n = theta[: N * m].reshape(N, m).copy()
        self.A = theta[N * m: N * (m + l)].reshape(N, l).copy()
        self.b = theta[N * (m + l):].reshape(N, l).copy()

    def split_grad(self, g):
        """Split a flat parameter vector into ``(n, A, b)`` shaped arrays."""
        N, m, l = self.N, self.m, self.l
        return (g[..., : N * m].reshape(*g.shape[:-1], N, m),
                g[..., N * m: N * (m + l)].reshape(*g.shape[:-1], N, l),
                g[..., N * (m + l):].reshape(*g.shape[:-1], N, l))

    def copy(self) -> "FlmModel":
        return FlmModel(self.n.copy(), self.A.copy(), self.b.copy())

    def __eq__(self, other):
        if not isinstance(other, FlmModel):
            return NotImplemented
        return (self.n.shape == other.n.shape
                and np.array_equal(self.n, other.n)
                and np.array_equal(self.A, other.A)
                and np.array_equal(self.b, other.b))

    def __repr__(self):
        return f"FlmModel(m={self.m}, N={self.N})"

    # -- hidden-layer geometry ------------------------------------------------

    def weights(self) -> np.ndarray:
        """Input-to-hidden weights, shape ``(N*l, m)``; row ``s*l + i`` is ``S[i] * n[s]``."""
        W = self.n[:, None, :] * self.sign.rows[None, :, :]
        return W.reshape(-1, self.m)

    def _points(self, x) -> tuple[np.ndarray, bool]:
        X = np.asarray(x, dtype=float)
        single = X.ndim == 1
        X = np.atleast_2d(X)
        if X.shape[-1] != self.m:
            raise ValueError(f"model takes {self.m} inputs, got points of width {X.shape[-1]}")
        return X, single

    # -- general point sets ---------------------------------------------------

    def cache(self, x) -> PointCache:
        X, _ = self._points(x)
        phase = X @ self.weights().T - self.b.ravel()
        return PointCache(X=X, C=np.cos(phase), S=np.sin(phase))

    def eval(self, x):
        """Model output at one point ``(m,)`` or a batch ``(P, m)``."""
        X, single = self._points(x)
        out = self.cache(X).C @ self.A.ravel()
        return out[0] if single else out

    __call__ = eval

    def derivatives(self, x, cache: PointCache | None = None):
        """Return ``(value, grad_x, diag_hess_x)`` over a batch of points."""
        c = cache if cache is not None else self.cache(x)
        W = self.weights()
        Ak = self.A.ravel()
        value = c.C @ Ak
        grad = -c.S @ (Ak[:, None] * W)
        hess = -c.C @ (Ak[:, None] * W * W)
        return value, grad, hess

    def vjp(self, x, g0=None, g1=None, g2=None, cache: PointCache | None = None) -> np.ndarray:
        """Gradient of ``sum_p g0*f + g1 . grad_x f + g2 . diag_hess_x f``.

        ``g0`` has shape ``(P,)``; ``g1`` and ``g2`` have shape ``(P, m)``.
        Omitted weights are zero. Returns a flat parameter gradient.
        """
        c = cache if cache is not None else self.cache(x)
        X = c.X
        P = X.shape[0]
        W = self.weights()
        Ak = self.A.ravel()
        K = Ak.size
        # f-weight per hidden unit multiplies cos, f_j weight multiplies sin
        U = np.zeros((P, K)) if g0 is None else np.repeat(np.asarray(g0, float)[:, None], K, axis=1)
        if g2 is not None:
            U = U - g2 @ (W * W).T
        V = -(g1 @ W.T) if g1 is not None else None

        E = -U * c.S
        dA = (U * c.C).sum(axis=0)
        if V is not None:
            dA += (V * c.S).sum(axis=0)
            E += V * c.C
        db = -Ak * E.sum(axis=0)

        gW = X.T @ E  # (m, K)
        if g1 is not None:
            gW -= g1.T @ c.S
        if g2 is not None:
            gW -= 2.0 * W.T * (g2.T @ c.C)
        gW = (Ak * gW).T.reshape(self.N, self.l, self.m)
        dn = (gW * self.sign.rows[None, :, :]).sum(axis=1)
        return np.concatenate([dn.ravel(), dA, db])

    def eval_bundle(self, x) -> EvalBundle:
        """Values, input derivatives and full parameter Jacobians at each point."""
        X, single = self._points(x)
        c = self.cache(X)
        N, m, l = self.N, self.m, self.l
        P = X.shape[0]
        W = self.weights()
        Sg = np.tile(self.sign.rows, (N, 1)).astype(float)  # (K, m) sign per hidden unit
        Ak = self.A.ravel()
        C, S = c.C, c.S
        value, grad, hess = self.derivatives(X, c)

        def pack(dn_k, dA, db):
            # dn_k: (..., K, m) per-unit frequency derivative -> sum units within each subnet
            dn = dn_k.reshape(*dn_k.shape[:-2], N, l, m).sum(axis=-2)
            return np.concatenate([dn.reshape(*dn.shape[:-2], N * m), dA, db], axis=-1)

        # value
        dn_k = -(Ak * S)[:, :, None] * Sg[None] * X[:, None, :]
        jv = pack(dn_k, C, Ak * S)

        jg = np.empty((P, m, self.n_params))
        jh = np.empty((P, m, self.n_params))
        eye = np.eye(m)
        for j in range(m):
            wj = W[:, j]
            # d/dn_q of -A w_j sin(phi): -A [S_qj delta_jq sin + w_j cos S_q x_q]
            dn_k = -Ak[None, :, None] * Sg[None] * (
                eye[j][None, None, :] * S[:, :, None]
                + (wj * C)[:, :, None] * X[:, None, :])
            jg[:, j] = pack(dn_k, -wj * S, Ak * wj * C)
            # d/dn_q of -A w_j^2 cos(phi): -A [2 w_j S_qj delta_jq cos - w_j^2 sin S_q x_q]
            dn_k = -Ak[None, :, None] * Sg[None] * (
                2.0 * eye[j][None, None, :] * (wj * C)[:, :, None]
                - (wj * wj * S)[:, :, None] * X[:, None, :])
            jh[:, j] = pack(dn_k, -wj * wj * C, -Ak * wj * wj * S)

        bundle = EvalBundle(value=value, grad_x=grad, diag_hess_x=hess,
                            param_grads={"value": jv, "grad_x": jg, "diag_hess_x": jh})
        if single:
            bundle = EvalBundle(value=value[0], grad_x=grad[0], diag_hess_x=hess[0],
                                param_grads={k: v[0] for k, v in bundle.param_grads.items()})
        return bundle

    # -- tensor grids: time axis x remaining coordinates ------------------------

    def grid_cache(self, t, Z=None) -> GridCache:
        """Trig tables for the grid ``{(t_k, z_b)}``; ``Z`` is ``(B, m-1)`` or None for m=1.

        The hidden phase splits into a time part ``w_t t`` and a remainder
        ``w_z . z - b``, so cos/sin are only evaluated on T + B rows.
        """
        t = np.asarray(t, dtype=float).ravel()
        W = self.weights()
        if Z is None:
            if self.m != 1:
                raise ValueError("non-time coordinates required for m > 1")
            Z = np.zeros((1, 0))
        Z = np.atleast_2d(np.asarray(Z, dtype=float))
        if Z.shape[1] != self.m - 1:
            raise ValueError(f"expected {self.m - 1} non-time coordinates, got {Z.shape[1]}")
        alpha = np.outer(t, W[:, 0])
        beta = Z @ W[:, 1:].T - self.b.ravel()
        return GridCache(t=t, Z=Z, Ca=np.cos(alpha), Sa=np.sin(alpha),
                         Cb=np.cos(beta), Sb=np.sin(beta))

    def grid_forward(self, gc: GridCache):
        """Value and time derivative on the grid, each of shape ``(B, T)``."""
        W = self.weights()
        Ak = self.A.ravel()
        Aw = Ak * W[:, 0]
        value = (gc.Cb * Ak) @ gc.Ca.T - (gc.Sb * Ak) @ gc.Sa.T
        dt = -((gc.Cb * Aw) @ gc.Sa.T + (gc.Sb * Aw) @ gc.Ca.T)
        return value, dt

    def grid_vjp(self, gc: GridCache, g0, g1) -> np.ndarray:
        """Gradient of ``sum_{b,t} g0 f + g1 df/dt`` on the grid (weights ``(B, T)``)."""
        W = self.weights()
        Ak = self.A.ravel()
        w = W[:, 0]
        t, Z = gc.t, gc.Z
        q = Z.shape[1]
        # weight arrays whose cos/sin reductions are needed
        hs = [g0, g1, g0 * t, g1 * t]
        hs += [g0 * Z[:, j:j + 1] for j in range(q)]
        hs += [g1 * Z[:, j:j + 1] for j in range(q)]
        H = np.stack(hs)  # (h, B, T)
        nh, B, T = H.shape
        Ht = H.transpose(0, 2, 1).reshape(nh * T, B)
        hC = (Ht @ gc.Cb).reshape(nh, T, -1)
        hS = (Ht @ gc.Sb).reshape(nh, T, -1)
        RC = (gc.Ca * hC - gc.Sa * hS).sum(axis=1)  # sum h*cos(phase)
        RS = (gc.Sa * hC + gc.Ca * hS).sum(axis=1)  # sum h*sin(phase)
        rc0, rc1, rc0t, rc1t = RC[:4]
        rs0, rs1, rs0t, rs1t = RS[:4]

        dA = rc0 - w * rs1
        db = Ak * (rs0 + w * rc1)
        gW = np.empty_like(W)
        gW[:, 0] = Ak * (-rs0t - rs1 - w * rc1t)
        for j in range(q):
            gW[:, 1 + j] = Ak * (-RS[4 + j] - w * RC[4 + q + j])
        gW = gW.reshape(self.N, self.l, self.m)
        dn = (gW * self.sign.rows[None, :, :]).sum(axis=1)
        return np.concatenate([dn.ravel(), dA, db])


def lattice_frequencies(m: int, N: int) -> np.ndarray:
    """First N points of the smallest cube ``{0..k-1}^m`` holding N points, in lexicographic order.

    Two inputs and N = 4 give (0,0), (0,1), (1,0), (1,1); N = 16 fills the
    4 x 4 block, N = 27 with three inputs the 3 x 3 x 3 block.
    """
    if m < 1 or N < 1:
        raise ValueError(f"need m >= 1 and N >= 1, got m={m}, N={N}")
    k = max(1, math.ceil(round(N ** (1.0 / m), 12)))
    while k ** m < N:
        k += 1
    pts = itertools.islice(itertools.product(range(k), repeat=m), N)
    return np.array(list(pts), dtype=float).reshape(N, m)


def init_model(m: int, N: int, seed=None, bias_std: float = math.pi / 3) -> FlmModel:
    """Integer-lattice frequencies, zero amplitudes, normal biases with std ``bias_std``."""
    rng = np.random.default_rng(seed)
    n = lattice_frequencies(m, N)
    l = 2 ** (m - 1)
    A = np.zeros((N, l))
    b = rng.normal(0.0, bias_std, size=(N, l))
    return FlmModel(n, A, b)


# -- checkpoints ----------------------------------------------------------------

def to_dict(model: FlmModel) -> dict:
    return {
        "m": model.m,
        "N": model.N,
        "subnets": [{"n": s.n.tolist(), "A": s.A.tolist(), "b": s.b.tolist()}
                    for s in model.subnets],
    }


def from_dict(d: dict) -> FlmModel:
    for key in ("m", "N", "subnets"):
        if key not in d:
            raise CheckpointError(f"checkpoint is missing the '{key}' section")
    m, N, subs = d["m"], d["N"], d["subnets"]
    if len(subs) != N:
        raise CheckpointError(f"checkpoint declares N={N} but holds {len(subs)} sub-networks")
    l = 2 ** (m - 1)
    rows = []
    for idx, s in enumerate(subs):
        for key in ("n", "A", "b"):
            if key not in s:
                raise CheckpointError(f"sub-network {idx} is missing the '{key}' section")
        if len(s["n"]) != m:
            raise CheckpointError(f"sub-network {idx}: len(n)={len(s['n'])}, expected m={m}")
        if len(s["A"]) != l or len(s["b"]) != l:
            raise CheckpointError(
                f"sub-network {idx}: amplitudes/biases must have length 2^(m-1)={l}, "
                f"got {len(s['A'])}/{len(s['b'])}")
        rows.append(SubNetwork(s["n"], s["A"], s["b"]))
    model = FlmModel.from_subnets(rows)
    if not all(np.isfinite(a).all() for a in (model.n, model.A, model.b)):
        raise CheckpointError("checkpoint holds non-finite parameters")
    return model


def save(model: FlmModel, path) -> None:
    # json writes floats with repr(), which round-trips exactly
    Path(path).write_text(json.dumps(to_dict(model), indent=1))


def load(path) -> FlmModel:
    text = Path(path).read_text()
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        seen = [k for k in ("m", "N", "subnets") if f'"{k}"' in text]
        missing = [k for k in ("m", "N", "subnets") if k not in seen]
        where = (f"missing the '{missing[0]}' section" if missing
                 else f"truncated inside the '{seen[-1]}' section")
        raise CheckpointError(f"malformed checkpoint {path}: {where} ({exc})") from exc
    if not isinstance(d, dict):
        raise CheckpointError(f"checkpoint {path} is not a JSON object")
    return from_dict(d)
