"""Rock-Paper-Scissors optimal control solved with FLMs and a penalty loss.

State ``u`` lives on the 2-simplex and follows controlled replicator dynamics
``du/dt = F(u) + gamma * G(u)``. One FLM approximates each of u1, u2 and
gamma; u3 is always ``1 - u1 - u2``. With a fixed initial condition the
networks see time only. With varying initial conditions they see
``(t, u01, u02)``.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .model import FlmModel, init_model
from .optim import AdamConfig, DivergenceError, TrainConfig, train

L3 = np.array([[0.0, -1.0, 1.0],
               [1.0, 0.0, -1.0],
               [-1.0, 1.0, 0.0]])
M3 = np.array([[0.0, 0.0, 1.0],
               [1.0, 0.0, 0.0],
               [0.0, 1.0, 0.0]])
U_STAR = np.full(3, 1.0 / 3.0)
SIMPLEX_TOL = 1e-12


@dataclass(frozen=True)
class OcpConfig:
    T: float = 6.0
    r: float = 0.2
    u_star: tuple = (1 / 3, 1 / 3, 1 / 3)
    mu1: tuple = (1e4, 1e4, 1e4)
    mu2: tuple = (1e4, 1e4, 1e4)
    quad_n: int = 101
    eval_n: int = 2001  # grid for scoring trained networks

    def __post_init__(self):
        if not self.T > 0 or not self.r > 0:
            raise ValueError(f"need T > 0 and r > 0, got T={self.T}, r={self.r}")
        if min(self.mu1) <= 0 or min(self.mu2) <= 0:
            raise ValueError("penalty coefficients must be positive")
        if self.quad_n < 2 or self.eval_n < 2:
            raise ValueError("quadrature grids need at least two points")

    @property
    def L3(self):
        return L3

    @property
    def M3(self):
        return M3

    def grid(self, n=None) -> np.ndarray:
        return np.linspace(0.0, self.T, self.quad_n if n is None else n)


def check_simplex(u, tol=SIMPLEX_TOL):
    u = np.asarray(u, dtype=float)
    if u.shape[-1] != 3:
        raise ValueError(f"simplex points have 3 components, got shape {u.shape}")
    if (np.abs(u.sum(axis=-1) - 1.0) > tol).any() or (u < -tol).any():
        raise ValueError(f"point off the 2-simplex beyond tolerance {tol}: {u}")
    return u


def _field(u, A):
    Au = u @ A.T
    uAu = (u * Au).sum(axis=-1, keepdims=True)
    return u * (Au - uAu)


def _field_jac(u, A):
    """d field_i / d u_j for ``field_i = u_i ((Au)_i - u^T A u)``, shape ``(..., 3, 3)``."""
    Au = u @ A.T
    uAu = (u * Au).sum(axis=-1, keepdims=True)
    sym = u @ (A + A.T)  # gradient of u^T A u
    eye = np.eye(3)
    return (eye * (Au - uAu)[..., :, None]
            + u[..., :, None] * (A - sym[..., None, :]))


def _field_vjp(u, r, A):
    """``J^T r`` for the field Jacobian at ``u`` without forming ``J``."""
    Au = u @ A.T
    uAu = (u * Au).sum(axis=-1, keepdims=True)
    ru = r * u
    return (r * (Au - uAu) + ru @ A
            - ru.sum(axis=-1, keepdims=True) * (u @ (A + A.T)))


def fields(u):
    """``(F, G)`` for any array of states with trailing size 3; no simplex check."""
    u = np.asarray(u, dtype=float)
    return _field(u, L3), _field(u, M3)


def field_jacobians(u):
    u = np.asarray(u, dtype=float)
    return _field_jac(u, L3), _field_jac(u, M3)


def replicator_fields(u):
    u = check_simplex(u)
    return fields(u)


def trapezoid_weights(n: int, T: float) -> np.ndarray:
    w = np.full(n, T / (n - 1))
    w[[0, -1]] *= 0.5
    return w


def objective(traj_u, traj_gamma, cfg: OcpConfig = OcpConfig()) -> float:
    """Trapezoidal cost of a path sampled on a uniform grid over ``[0, T]``.

    ``traj_u`` has shape ``(n, 3)``, ``traj_gamma`` shape ``(n,)``.
    """
    traj_u = np.asarray(traj_u, dtype=float)
    traj_gamma = np.asarray(traj_gamma, dtype=float)
    if traj_u.shape != (traj_gamma.size, 3):
        raise ValueError(f"grid mismatch: states {traj_u.shape}, control {traj_gamma.shape}")
    d = traj_u - np.asarray(cfg.u_star)
    run = 0.5 * (d * d).sum(axis=1) + 0.5 * cfg.r * traj_gamma**2
    return float(trapezoid_weights(traj_gamma.size, cfg.T) @ run)


def cyclic(u, k: int = 1):
    """Apply ``(u1, u2, u3) -> (u2, u3, u1)`` k times (negative k inverts)."""
    u = np.asarray(u, dtype=float)
    return np.roll(u, -k, axis=-1)


# -- initial-condition sets -------------------------------------------------------

DISK_BASIS = (np.array([1.0, -1.0, 0.0]) / math.sqrt(2.0),
              np.array([1.0, 1.0, -2.0]) / math.sqrt(6.0))


def sample_disk(center, radius: float, count: int, seed=None, basis=None) -> np.ndarray:
    """Uniform points on a planar disk inside the simplex, shape ``(count, 3)``."""
    center = check_simplex(center, tol=1e-9)
    # distance from the center to face u_i = 0 measured inside the simplex plane
    clearance = center.min() / math.sqrt(2.0 / 3.0)
    if radius < 0 or radius >= clearance:
        raise ValueError(f"disk of radius {radius} around {center} leaves the open simplex "
                         f"(clearance {clearance:.4f})")
    v1, v2 = DISK_BASIS if basis is None else basis
    rng = np.random.default_rng(seed)
    rho = radius * np.sqrt(rng.random(count))
    theta = rng.uniform(0.0, 2.0 * math.pi, count)
    return center + rho[:, None] * (np.cos(theta)[:, None] * v1 + np.sin(theta)[:, None] * v2)


def disk_centers(center, count: int = 3) -> np.ndarray:
    """The training-disk center and its cyclic images; row k is ``cyclic(center, k)``."""
    return np.stack([cyclic(center, k) for k in range(count)])


def to_training_disk(U, k: int) -> np.ndarray:
    """Map points on the ``k``-th cyclic image disk back onto the training disk."""
    return cyclic(U, -k)


def mape(J_flm, J_ref) -> float:
    J_flm = np.asarray(J_flm, dtype=float)
    J_ref = np.asarray(J_ref, dtype=float)
    if J_flm.shape != J_ref.shape:
        raise ValueError(f"length mismatch: {J_flm.shape} vs {J_ref.shape}")
    if (J_ref == 0).any():
        raise ZeroDivisionError("reference objective of zero in MAPE")
    return float(np.mean(np.abs(J_flm - J_ref) / np.abs(J_ref)) * 100.0)


# -- FLM solution and penalty loss -----------------------------------------------

@dataclass
class OcpSolution:
    mode: str  # "fixed" | "varying"
    state_nets: tuple  # (u1, u2)
    control_net: FlmModel
    config: OcpConfig = field(default_factory=OcpConfig)
    train_report: object = None
    u0: np.ndarray | None = None  # the fixed initial condition, fixed mode only

    def __post_init__(self):
        want = 1 if self.mode == "fixed" else 3
        if self.mode not in ("fixed", "varying"):
            raise ValueError(f"mode must be 'fixed' or 'varying', got {self.mode!r}")
        for net in self.nets:
            if net.m != want:
                raise ValueError(f"{self.mode} mode needs {want}-input networks, got {net.m}")

    @property
    def nets(self):
        return (*self.state_nets, self.control_net)

    @property
    def params(self) -> np.ndarray:
        return np.concatenate([net.params for net in self.nets])

    @params.setter
    def params(self, theta):
        total = sum(net.n_params for net in self.nets)
        if len(theta) != total:
            raise ValueError(f"expected {total} parameters, got {len(theta)}")
        lo = 0
        for net in self.nets:
            net.params = theta[lo: lo + net.n_params]
            lo += net.n_params

    def _z(self, U0):
        if self.mode == "fixed":
            if U0.shape[0] != 1:
                raise ValueError("fixed mode handles a single initial condition")
            return None
        return U0[:, :2]

    def trajectories(self, U0, t):
        """States ``(B, T, 3)``, state rates ``(B, T, 3)`` and control ``(B, T)``."""
        U0 = np.atleast_2d(np.asarray(U0, dtype=float))
        Z = self._z(U0)
        out = [net.grid_forward(net.grid_cache(t, Z)) for net in self.nets]
        (u1, d1), (u2, d2), (g, _) = out
        u = np.stack([u1, u2, 1.0 - u1 - u2], axis=-1)
        du = np.stack([d1, d2, -d1 - d2], axis=-1)
        return u, du, g

    def objective_values(self, U0, n=None) -> np.ndarray:
        """Objective of the network paths for each initial condition, on ``eval_n`` points."""
        cfg = self.config
        t = cfg.grid(cfg.eval_n if n is None else n)
        u, _, g = self.trajectories(U0, t)
        return np.array([objective(u[b], g[b], cfg) for b in range(u.shape[0])])

    def objective_on_disk(self, U0, k: int = 0, n=None) -> np.ndarray:
        """Objective for initial conditions on the ``k``-th cyclic disk image.

        The cost is invariant under the relabelling, so the query goes to the
        training-disk preimage.
        """
        return self.objective_values(to_training_disk(np.atleast_2d(U0), k), n)


@dataclass
class PenaltyLoss:
    loss: float
    grad: np.ndarray
    J: np.ndarray  # (B,)
    V_dyn: np.ndarray  # (B, 3)
    V_init: np.ndarray  # (B, 3)


def penalty_loss(sol: OcpSolution, u0_batch, cfg: OcpConfig | None = None) -> PenaltyLoss:
    cfg = cfg or sol.config
    U0 = np.atleast_2d(np.asarray(u0_batch, dtype=float))
    B = U0.shape[0]
    t = cfg.grid()
    Z = sol._z(U0)
    caches = [net.grid_cache(t, Z) for net in sol.nets]
    (u1, d1), (u2, d2), (g, _) = [net.grid_forward(c) for net, c in zip(sol.nets, caches)]
    u = np.stack([u1, u2, 1.0 - u1 - u2], axis=-1)  # (B, T, 3)
    du = np.stack([d1, d2, -d1 - d2], axis=-1)
    F, G = fields(u)
    R = du - F - g[..., None] * G

    w = trapezoid_weights(cfg.quad_n, cfg.T)
    ustar = np.asarray(cfg.u_star)
    mu1, mu2 = np.asarray(cfg.mu1), np.asarray(cfg.mu2)
    dev = u - ustar
    J = (0.5 * (dev * dev).sum(-1) + 0.5 * cfg.r * g * g) @ w
    V_dyn = np.einsum("t,bti->bi", w, R * R)
    e0 = u[:, 0, :] - U0
    V_init = e0 * e0
    loss = float(np.mean(J + 0.5 * V_dyn @ mu1 + 0.5 * V_init @ mu2))
    if not math.isfinite(loss):
        raise DivergenceError("non-finite penalty loss")

    s = 1.0 / B
    dR = s * w[None, :, None] * mu1 * R
    du_full = (s * w[None, :, None] * dev - _field_vjp(u, dR, L3)
               - _field_vjp(u, g[..., None] * dR, M3))
    du_full[:, 0, :] += s * mu2 * e0
    dg = s * w * cfg.r * g - (dR * G).sum(-1)
    g_u1 = du_full[..., 0] - du_full[..., 2]
    g_u2 = du_full[..., 1] - du_full[..., 2]
    g_d1 = dR[..., 0] - dR[..., 2]
    g_d2 = dR[..., 1] - dR[..., 2]
    zero = np.zeros_like(dg)
    grad = np.concatenate([
        sol.nets[0].grid_vjp(caches[0], g_u1, g_d1),
        sol.nets[1].grid_vjp(caches[1], g_u2, g_d2),
        sol.nets[2].grid_vjp(caches[2], dg, zero),
    ])
    return PenaltyLoss(loss=loss, grad=grad, J=J, V_dyn=V_dyn, V_init=V_init)


# Penalty continuation: (multiplier on mu1/mu2, share of the epoch budget).
# ADAM moments carry across stages; the loss tolerance applies to the last stage only.
FIXED_STAGES = ((1.0, 1.0),)
VARYING_STAGES = ((1e-3, 1 / 6), (1e-2, 1 / 6), (1e-1, 1 / 6), (1.0, 1 / 2))

FIXED_DEFAULTS = dict(N=5, adam=AdamConfig(1e-3, 0.99, 0.999), stages=FIXED_STAGES)
VARYING_DEFAULTS = dict(N=27, adam=AdamConfig(5e-4, 0.95, 0.97), stages=VARYING_STAGES)


def init_solution(mode: str, N: int, seed=None, cfg: OcpConfig = OcpConfig(),
                  u0=None) -> OcpSolution:
    m = 1 if mode == "fixed" else 3
    ss = np.random.SeedSequence(seed).spawn(3)
    nets = [init_model(m, N, seed=s) for s in ss]
    return OcpSolution(mode=mode, state_nets=(nets[0], nets[1]), control_net=nets[2],
                       config=cfg, u0=None if u0 is None else np.asarray(u0, dtype=float))


def _stage_epochs(stages, total: int) -> list:
    if not stages or any(f <= 0 or w <= 0 for f, w in stages):
        raise ValueError(f"stages need positive multipliers and shares, got {stages}")
    shares = np.array([w for _, w in stages], dtype=float)
    counts = np.floor(total * shares / shares.sum()).astype(int)
    counts[-1] = total - counts[:-1].sum()
    if (counts < 1).any():
        raise ValueError(f"epoch budget {total} too small for {len(stages)} stages")
    return counts.tolist()


def train_ocp(mode: str, u0s, cfg: OcpConfig = OcpConfig(), N: int | None = None,
              adam: AdamConfig | None = None,
              train_cfg: TrainConfig = TrainConfig(30_000, 1e-6), seed=0,
              stages=None) -> OcpSolution:
    """Fit state and control networks to one (fixed) or many (varying) initial conditions.

    ``stages`` scales the penalty coefficients of ``cfg`` over successive
    slices of ``train_cfg.max_epochs``; the returned solution carries ``cfg``.
    """
    defaults = FIXED_DEFAULTS if mode == "fixed" else VARYING_DEFAULTS
    N = N or defaults["N"]
    adam = adam or defaults["adam"]
    stages = defaults["stages"] if stages is None else tuple(stages)
    epochs = _stage_epochs(stages, train_cfg.max_epochs)
    U0 = check_simplex(np.atleast_2d(u0s), tol=1e-9)
    sol = init_solution(mode, N, seed=seed, cfg=cfg, u0=U0[0] if mode == "fixed" else None)

    t0 = time.perf_counter()
    state, curve, done, report = None, [], 0, None
    for i, ((factor, _), n_ep) in enumerate(zip(stages, epochs)):
        stage_cfg = replace(cfg, mu1=tuple(factor * v for v in cfg.mu1),
                            mu2=tuple(factor * v for v in cfg.mu2))

        def loss_and_grad():
            try:
                res = penalty_loss(sol, U0, stage_cfg)
            except DivergenceError:
                return math.nan, None
            return res.loss, res.grad

        last = i == len(stages) - 1
        tc = replace(train_cfg, max_epochs=n_ep, seed=seed,
                     loss_tol=train_cfg.loss_tol if last else 0.0)
        report = train(loss_and_grad, sol, adam, tc, state=state)
        state = report.state
        curve += [(done + e, l) for e, l in report.loss_curve]
        done += report.epochs_run
        if report.stop_reason == "divergence":
            break
    report.loss_curve, report.epochs_run = curve, done
    report.wall_s = time.perf_counter() - t0
    sol.train_report = report
    return sol


def replay_objective(sol: OcpSolution, u0, steps: int = 2000) -> float:
    """Objective of the true dynamics driven open-loop by the network control."""
    from .pmp import integrate_rk4

    cfg = sol.config
    u0 = np.asarray(u0, dtype=float)
    Z = None if sol.mode == "fixed" else u0[None, :2]
    net = sol.control_net

    def gamma(t):
        return net.grid_forward(net.grid_cache(np.atleast_1d(t), Z))[0][0, 0]

    def rhs(t, y):
        F, G = fields(y[:3])
        gm = gamma(t)
        d = y[:3] - np.asarray(cfg.u_star)
        return np.concatenate([F + gm * G, [0.5 * d @ d + 0.5 * cfg.r * gm * gm]])

    _, path = integrate_rk4(rhs, np.concatenate([u0, [0.0]]), 0.0, cfg.T, steps)
    return float(path[-1, 3])
