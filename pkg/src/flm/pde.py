"""Benchmark PDEs solved by collocation: heat, Poisson, generalized Black-Scholes.

All three operators are linear in u, so each residual is written as
``c0*u + c1 . grad u + c2 . diag_hess u - rhs`` with point-dependent
coefficients. The loss gradient is then one vector-Jacobian product through
the model.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .model import FlmModel, init_model
from .optim import AdamConfig, DivergenceError, TrainConfig, train, train_two_phase

PI = math.pi


@dataclass(frozen=True)
class PdeProblem:
    name: str
    domain: tuple  # ((lo, hi), ...) per model input
    coefficients: Callable  # X -> (c0 (P,), c1 (P,m), c2 (P,m), rhs (P,))
    exact: Callable  # X -> (P,)
    bc: Callable  # boundary target g(X)
    ic: Optional[Callable] = None  # initial target u0(X), None for steady problems
    time_axis: Optional[int] = None
    boundary_axes: tuple = (0,)

    @property
    def m(self) -> int:
        return len(self.domain)

    def residual(self, X, bundle) -> np.ndarray:
        """Operator residual from precomputed values and input derivatives."""
        c0, c1, c2, rhs = self.coefficients(np.atleast_2d(X))
        return (c0 * bundle.value + (c1 * bundle.grad_x).sum(axis=-1)
                + (c2 * bundle.diag_hess_x).sum(axis=-1) - rhs)


def _heat_coeffs(X, alpha=0.1):
    P = X.shape[0]
    c1 = np.zeros((P, 2))
    c1[:, 1] = 1.0  # u_t
    c2 = np.zeros((P, 2))
    c2[:, 0] = -alpha  # -alpha u_xx
    return np.zeros(P), c1, c2, np.zeros(P)


def _poisson_coeffs(X):
    P = X.shape[0]
    x, y = X[:, 0], X[:, 1]
    return (np.zeros(P), np.zeros((P, 2)), np.ones((P, 2)),
            -2.0 * PI**2 * np.sin(PI * x) * np.sin(PI * y))


def gbs_terms(x, t):
    """The four coefficient functions ``a, b, c, d`` of the Black-Scholes-type equation."""
    ex = np.exp(x)
    a = 0.08 * (2.0 + (1.0 - t) * np.sin(ex)) ** 2
    b = 0.06 * (1.0 + t * np.exp(-ex)) - 0.02 * np.exp(-t - ex) - a
    c = -0.06 * (1.0 + t * np.exp(-ex))
    d = 0.02 * np.exp(x - ex - 2.0 * t) - np.exp(x - t)
    return a, b, c, d


def _gbs_coeffs(X):
    P = X.shape[0]
    a, b, c, d = gbs_terms(X[:, 0], X[:, 1])
    # u_t - a u_xx - b u_x - c u - d = 0
    c1 = np.zeros((P, 2))
    c1[:, 0] = -b
    c1[:, 1] = 1.0
    c2 = np.zeros((P, 2))
    c2[:, 0] = -a
    return -c, c1, c2, d


PROBLEMS = ("heat", "poisson", "gbs")


def make_problem(name: str) -> PdeProblem:
    if name == "heat":
        return PdeProblem(
            name="heat", domain=((0.0, 1.0), (0.0, 1.0)),
            coefficients=_heat_coeffs,
            exact=lambda X: np.sin(PI * X[:, 0]) * np.exp(-0.1 * PI**2 * X[:, 1]),
            bc=lambda X: np.zeros(X.shape[0]),
            ic=lambda X: np.sin(PI * X[:, 0]),
            time_axis=1, boundary_axes=(0,))
    if name == "poisson":
        return PdeProblem(
            name="poisson", domain=((0.0, 1.0), (0.0, 1.0)),
            coefficients=_poisson_coeffs,
            exact=lambda X: np.sin(PI * X[:, 0]) * np.sin(PI * X[:, 1]),
            bc=lambda X: np.zeros(X.shape[0]),
            ic=None, time_axis=None, boundary_axes=(0, 1))
    if name == "gbs":
        return PdeProblem(
            name="gbs", domain=((-2.0, 2.0), (0.0, 1.0)),
            coefficients=_gbs_coeffs,
            exact=lambda X: np.exp(X[:, 0] - X[:, 1]),
            bc=lambda X: np.exp(X[:, 0] - X[:, 1]),
            ic=lambda X: np.exp(X[:, 0]),
            time_axis=1, boundary_axes=(0,))
    raise ValueError(f"unknown problem {name!r}; valid options: {', '.join(PROBLEMS)}")


@dataclass
class CollocationSet:
    ic_pts: np.ndarray
    ic_target: np.ndarray
    bc_pts: np.ndarray
    bc_target: np.ndarray
    pde_pts: np.ndarray
    pde_coeffs: tuple = field(repr=False)
    seed: Optional[int] = None


def _open_uniform(rng, lo, hi, size):
    u = rng.random(size)
    u[u == 0.0] = 0.5
    return lo + (hi - lo) * u


def sample_collocation(problem: PdeProblem, n_ic: int, n_bc: int, n_pde: int,
                       seed=None) -> CollocationSet:
    """Uniform i.i.d. points: initial slice, boundary faces (equal split), interior.

    Interior points lie strictly inside the spatial domain with time in (0, T].
    Boundary points take the full closed time range. Steady problems get no
    initial points whatever ``n_ic`` says.
    """
    if min(n_ic, n_bc, n_pde) < 0:
        raise ValueError("collocation counts must be non-negative")
    rng = np.random.default_rng(seed)
    m = problem.m
    dom = problem.domain
    ta = problem.time_axis

    if problem.ic is None:
        n_ic = 0
    ic = np.empty((n_ic, m))
    for j, (lo, hi) in enumerate(dom):
        ic[:, j] = 0.0 if j == ta else rng.uniform(lo, hi, n_ic)

    faces = [(ax, side) for ax in problem.boundary_axes for side in (0, 1)]
    counts = [n_bc // len(faces) + (i < n_bc % len(faces)) for i in range(len(faces))]
    bc_parts = []
    for (ax, side), cnt in zip(faces, counts):
        pts = np.empty((cnt, m))
        for j, (lo, hi) in enumerate(dom):
            pts[:, j] = dom[ax][side] if j == ax else rng.uniform(lo, hi, cnt)
        bc_parts.append(pts)
    bc = np.vstack(bc_parts) if bc_parts else np.empty((0, m))

    pde = np.empty((n_pde, m))
    for j, (lo, hi) in enumerate(dom):
        if j == ta:
            pde[:, j] = hi - (hi - lo) * rng.random(n_pde)  # (lo, hi]
        else:
            pde[:, j] = _open_uniform(rng, lo, hi, n_pde)

    return CollocationSet(
        ic_pts=ic, ic_target=problem.ic(ic) if n_ic else np.empty(0),
        bc_pts=bc, bc_target=problem.bc(bc),
        pde_pts=pde, pde_coeffs=problem.coefficients(pde), seed=seed)


@dataclass
class PdeLoss:
    total: float
    ic: float
    bc: float
    pde: float
    grad: np.ndarray


def pde_loss(model: FlmModel, problem: PdeProblem, colloc: CollocationSet) -> PdeLoss:
    if model.m != problem.m:
        raise ValueError(f"model has {model.m} inputs, problem {problem.name} needs {problem.m}")
    n_ic, n_bc, n_pde = len(colloc.ic_pts), len(colloc.bc_pts), len(colloc.pde_pts)
    X = np.vstack([colloc.ic_pts, colloc.bc_pts, colloc.pde_pts])
    cache = model.cache(X)
    value, grad, hess = model.derivatives(X, cache)

    g0 = np.zeros(X.shape[0])
    g1 = np.zeros_like(grad)
    g2 = np.zeros_like(hess)
    parts = []
    lo = 0
    for target, cnt in ((colloc.ic_target, n_ic), (colloc.bc_target, n_bc)):
        sl = slice(lo, lo + cnt)
        r = value[sl] - target
        parts.append(float(r @ r) / cnt if cnt else 0.0)
        if cnt:
            g0[sl] = 2.0 * r / cnt
        lo += cnt
    sl = slice(lo, lo + n_pde)
    c0, c1, c2, rhs = colloc.pde_coeffs
    r = c0 * value[sl] + (c1 * grad[sl]).sum(1) + (c2 * hess[sl]).sum(1) - rhs
    parts.append(float(r @ r) / n_pde if n_pde else 0.0)
    if n_pde:
        w = 2.0 * r / n_pde
        g0[sl] += w * c0
        g1[sl] = w[:, None] * c1
        g2[sl] = w[:, None] * c2

    total = parts[0] + parts[1] + parts[2]
    if not math.isfinite(total):
        raise DivergenceError(f"non-finite PDE loss for {problem.name}")
    return PdeLoss(total, parts[0], parts[1], parts[2], model.vjp(X, g0, g1, g2, cache))


@dataclass
class ErrorMetrics:
    mse: float
    mae: float
    max_err: float


def evaluation_grid(problem: PdeProblem, grid_n: int = 101) -> np.ndarray:
    if grid_n < 2:
        raise ValueError(f"grid_n must be >= 2, got {grid_n}")
    axes = [np.linspace(lo, hi, grid_n) for lo, hi in problem.domain]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([g.ravel() for g in mesh], axis=1)


def evaluate_metrics(model: FlmModel, problem: PdeProblem, grid_n: int = 101) -> ErrorMetrics:
    X = evaluation_grid(problem, grid_n)
    err = np.abs(model(X) - problem.exact(X))
    return ErrorMetrics(mse=float(np.mean(err**2)), mae=float(np.mean(err)),
                        max_err=float(err.max()))


def surface(model: FlmModel, problem: PdeProblem, grid_n: int = 101) -> np.ndarray:
    """Rows ``(x, y_or_t, u_exact, u_flm, abs_err)`` on the test grid."""
    X = evaluation_grid(problem, grid_n)
    ue, uf = problem.exact(X), model(X)
    return np.column_stack([X, ue, uf, np.abs(ue - uf)])


DEFAULT_COUNTS = {"heat": (100, 200, 1000), "poisson": (0, 200, 1000), "gbs": (100, 200, 1000)}
BEST_CONFIGS = {
    "heat": dict(N=16, lr=1e-3, betas=(0.95, 0.97)),
    "poisson": dict(N=4, lr=1e-3, betas=(0.95, 0.97)),
    "gbs": dict(N=25, lr=1e-3, betas=(0.97, 0.95)),
}


@dataclass
class PdeRun:
    problem: str
    seed: int
    model: FlmModel
    phase1: object
    phase2: object
    metrics: ErrorMetrics
    wall_s: float


def solve(name: str, N: int, adam: AdamConfig, seed: int = 0,
          counts: tuple | None = None,
          phase1: TrainConfig = TrainConfig(10_000, 1e-4),
          phase2: TrainConfig | None = TrainConfig(30_000, 1e-8),
          grid_n: int = 101, reset_state: bool = False,
          bias_std: float = PI / 3) -> PdeRun:
    """Train one FLM on a benchmark problem and score it on the test grid.

    ``phase2=None`` stops after the first phase.
    """
    t0 = time.perf_counter()
    problem = make_problem(name)
    n_ic, n_bc, n_pde = counts or DEFAULT_COUNTS[name]
    colloc = sample_collocation(problem, n_ic, n_bc, n_pde, seed=seed)
    # model init draws from its own stream so collocation and weights stay independent
    model = init_model(problem.m, N, seed=(seed, 1), bias_std=bias_std)

    def loss_and_grad():
        try:
            res = pde_loss(model, problem, colloc)
        except DivergenceError:
            return math.nan, None
        return res.total, res.grad

    p1 = replace(phase1, seed=seed)
    if phase2 is None:
        r1, r2 = train(loss_and_grad, model, adam, p1), None
    else:
        r1, r2 = train_two_phase(loss_and_grad, model, adam, p1, replace(phase2, seed=seed),
                                 reset_state=reset_state)
    return PdeRun(problem=name, seed=seed, model=model, phase1=r1, phase2=r2,
                  metrics=evaluate_metrics(model, problem, grid_n),
                  wall_s=time.perf_counter() - t0)
