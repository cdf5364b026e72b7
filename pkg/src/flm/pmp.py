"""Indirect reference solution of the RPS control problem by single shooting.

Hamiltonian ``H = |u - u*|^2 / 2 + r gamma^2 / 2 + lam . (F(u) + gamma G(u))``.
Stationarity gives ``gamma = -lam . G(u) / r``; the costate obeys
``dlam/dt = -(u - u*) - (J_F + gamma J_G)^T lam`` with ``lam(T) = 0`` since the
terminal state is free and carries no cost. Newton iterates on ``lam(0)``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .ocp import OcpConfig, check_simplex, field_jacobians, fields, trapezoid_weights

log = logging.getLogger(__name__)


class IntegrationError(FloatingPointError):
    pass


class ConvergenceError(RuntimeError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


def pmp_rhs(u, lam, cfg: OcpConfig = OcpConfig()):
    """Return ``(du/dt, dlam/dt, gamma)``; works on any leading batch shape."""
    u = np.asarray(u, dtype=float)
    lam = np.asarray(lam, dtype=float)
    F, G = fields(u)
    gamma = -(lam * G).sum(axis=-1) / cfg.r
    JF, JG = field_jacobians(u)
    Jt = JF + gamma[..., None, None] * JG
    du = F + gamma[..., None] * G
    dlam = -(u - np.asarray(cfg.u_star)) - np.einsum("...ij,...i->...j", Jt, lam)
    return du, dlam, gamma


def integrate_rk4(rhs, y0, t0: float, t1: float, steps: int):
    """Classical fixed-step RK4. Returns ``(t, path)`` with ``path[k]`` the state at ``t[k]``."""
    if steps < 1:
        raise ValueError(f"steps must be >= 1, got {steps}")
    y = np.array(y0, dtype=float)
    h = (t1 - t0) / steps
    t = t0 + h * np.arange(steps + 1)
    path = np.empty((steps + 1, *y.shape))
    path[0] = y
    for k in range(steps):
        tk = t[k]
        k1 = rhs(tk, y)
        k2 = rhs(tk + 0.5 * h, y + 0.5 * h * k1)
        k3 = rhs(tk + 0.5 * h, y + 0.5 * h * k2)
        k4 = rhs(tk + h, y + h * k3)
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.isfinite(y).all():
            raise IntegrationError(f"state blew up at t={t[k + 1]:.6g}")
        path[k + 1] = y
    return t, path


def _joint_rhs(cfg):
    def rhs(t, y):
        du, dlam, _ = pmp_rhs(y[..., :3], y[..., 3:], cfg)
        return np.concatenate([du, dlam], axis=-1)
    return rhs


@dataclass
class PmpSolution:
    t: np.ndarray
    u: np.ndarray  # (n, 3)
    lam: np.ndarray  # (n, 3)
    gamma: np.ndarray  # (n,)
    J_star: float
    residual_norm: float
    iterations: int = 0


def _shoot(U0, L0, cfg, T, steps, keep_path=False):
    """Integrate state and costate from ``(U0, L0)`` (batched, ``(..., 3)``) to ``T``."""
    y0 = np.concatenate([U0, L0], axis=-1)
    t, path = integrate_rk4(_joint_rhs(cfg), y0, 0.0, T, steps)
    return (t, path) if keep_path else path[-1, ..., 3:]


def _newton(U0, L0, cfg, T, steps, tol, max_iter, fd_step):
    """Batched Newton on ``lam(0) -> lam(T)``; returns ``(L0, residual_inf, iterations)``."""
    B = U0.shape[0]
    L0 = L0.copy()
    eye = np.eye(3)
    res = _shoot(U0, L0, cfg, T, steps)
    norm = np.abs(res).max(axis=1)
    it = 0
    for it in range(1, max_iter + 1):
        active = norm > tol
        if not active.any():
            return L0, norm, it - 1
        idx = np.flatnonzero(active)
        Ua, La = U0[idx], L0[idx]
        pert = La[:, None, :] + fd_step * eye[None]  # (b, 3, 3)
        rp = _shoot(np.repeat(Ua[:, None, :], 3, axis=1), pert, cfg, T, steps)
        Jac = (rp - res[idx][:, None, :]).transpose(0, 2, 1) / fd_step  # d res_i / d lam0_j
        step = -np.linalg.lstsq(Jac[0], res[idx][0], rcond=None)[0][None] if len(idx) == 1 \
            else -np.linalg.solve(Jac, res[idx][..., None])[..., 0]
        alpha = np.ones(len(idx))
        best_L, best_res, best_norm = La.copy(), res[idx].copy(), norm[idx].copy()
        pending = np.ones(len(idx), dtype=bool)
        for _ in range(20):
            trial = La + alpha[:, None] * step
            try:
                tr = _shoot(Ua, trial, cfg, T, steps)
                tn = np.abs(tr).max(axis=1)
            except FloatingPointError:
                tr = np.full_like(La, np.inf)
                tn = np.full(len(idx), np.inf)
            ok = pending & np.isfinite(tn) & (tn < best_norm)
            best_L[ok], best_res[ok], best_norm[ok] = trial[ok], tr[ok], tn[ok]
            pending &= ~ok
            if not pending.any():
                break
            alpha[pending] *= 0.5
        L0[idx], res[idx], norm[idx] = best_L, best_res, best_norm
    return L0, norm, it


def solve_many(U0, cfg: OcpConfig = OcpConfig(), tol: float = 1e-8, steps: int = 2000,
               max_iter: int = 50, fd_step: float = 1e-7, L0=None) -> list:
    """Solve the two-point problem for each row of ``U0`` (shape ``(B, 3)``)."""
    U0 = check_simplex(np.atleast_2d(U0), tol=1e-9)
    B = U0.shape[0]
    L0 = np.zeros((B, 3)) if L0 is None else np.array(L0, dtype=float).reshape(B, 3)
    L0, norm, iters = _newton(U0, L0, cfg, cfg.T, steps, tol, max_iter, fd_step)
    bad = norm > tol
    if bad.any():
        # continuation in the horizon: T = 1, 2, ..., reusing the costate guess
        log.info("continuation in T for %d initial conditions", bad.sum())
        idx = np.flatnonzero(bad)
        Lc = np.zeros((len(idx), 3))
        for Tk in list(np.arange(1.0, cfg.T, 1.0)) + [cfg.T]:
            n_k = max(1, int(round(steps * Tk / cfg.T)))
            Lc, nk, _ = _newton(U0[idx], Lc, cfg, Tk, n_k, tol, max_iter, fd_step)
        L0[idx], norm[idx] = Lc, nk
        if (norm > tol).any():
            worst = float(norm.max())
            raise ConvergenceError(f"shooting did not converge, residual {worst:.3e}", worst)

    t, path = _shoot(U0, L0, cfg, cfg.T, steps, keep_path=True)
    w = trapezoid_weights(steps + 1, cfg.T)
    ustar = np.asarray(cfg.u_star)
    out = []
    for b in range(B):
        u, lam = path[:, b, :3], path[:, b, 3:]
        _, _, gamma = pmp_rhs(u, lam, cfg)
        d = u - ustar
        J = float(w @ (0.5 * (d * d).sum(1) + 0.5 * cfg.r * gamma**2))
        out.append(PmpSolution(t=t, u=u, lam=lam, gamma=gamma, J_star=J,
                               residual_norm=float(np.abs(lam[-1]).max()), iterations=iters))
    return out


def solve_bvp(u0, cfg: OcpConfig = OcpConfig(), tol: float = 1e-8, steps: int = 2000,
              max_iter: int = 50, fd_step: float = 1e-7) -> PmpSolution:
    return solve_many(np.asarray(u0, dtype=float)[None], cfg, tol, steps, max_iter, fd_step)[0]
