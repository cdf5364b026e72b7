"""ADAM and the full-batch training loop shared by every experiment."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np

log = logging.getLogger(__name__)


class DivergenceError(FloatingPointError):
    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


@dataclass(frozen=True)
class AdamConfig:
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    def __post_init__(self):
        if not self.lr > 0:
            raise ValueError(f"learning rate must be positive, got {self.lr}")
        for name in ("beta1", "beta2"):
            v = getattr(self, name)
            if not 0 <= v < 1:
                raise ValueError(f"{name} must lie in [0, 1), got {v}")
        if not self.eps > 0:
            raise ValueError(f"eps must be positive, got {self.eps}")


@dataclass
class AdamState:
    m: np.ndarray
    v: np.ndarray
    t: int = 0

    @classmethod
    def zeros(cls, size: int) -> "AdamState":
        return cls(np.zeros(size), np.zeros(size), 0)


def adam_step(params, grads, state: AdamState, cfg: AdamConfig, t: int | None = None):
    """One bias-corrected ADAM update. Returns ``(new_params, new_state)``.

    ``t`` defaults to ``state.t + 1``. Inputs are not modified.
    """
    params = np.asarray(params, dtype=float)
    grads = np.asarray(grads, dtype=float)
    if not (params.shape == grads.shape == state.m.shape):
        raise ValueError(f"shape mismatch: params {params.shape}, grads {grads.shape}, "
                         f"state {state.m.shape}")
    bad = np.flatnonzero(~np.isfinite(grads))
    if bad.size:
        raise DivergenceError(f"non-finite gradient at parameter {bad[0]}", index=int(bad[0]))
    t = state.t + 1 if t is None else t
    if t < 1:
        raise ValueError(f"step index must be >= 1, got {t}")
    m = cfg.beta1 * state.m + (1.0 - cfg.beta1) * grads
    v = cfg.beta2 * state.v + (1.0 - cfg.beta2) * grads * grads
    mhat = m / (1.0 - cfg.beta1 ** t)
    vhat = v / (1.0 - cfg.beta2 ** t)
    new = params - cfg.lr * mhat / (np.sqrt(vhat) + cfg.eps)
    return new, AdamState(m, v, t)


@dataclass(frozen=True)
class TrainConfig:
    max_epochs: int = 10_000
    loss_tol: float = 1e-4
    seed: int | None = None
    log_every: int = 100

    def __post_init__(self):
        if self.max_epochs < 1:
            raise ValueError(f"max_epochs must be >= 1, got {self.max_epochs}")
        if not self.loss_tol >= 0:
            raise ValueError(f"loss_tol must be >= 0, got {self.loss_tol}")
        if self.log_every < 1:
            raise ValueError(f"log_every must be >= 1, got {self.log_every}")


@dataclass
class TrainReport:
    epochs_run: int
    final_loss: float
    stop_reason: str  # "tol" | "epoch-cap" | "divergence"
    loss_curve: list = field(default_factory=list)
    seed: int | None = None
    state: AdamState | None = field(default=None, repr=False)


def train(loss_and_grad, model, adam: AdamConfig, cfg: TrainConfig,
          state: AdamState | None = None) -> TrainReport:
    """Minimise ``loss_and_grad()`` over ``model.params`` with full-batch ADAM.

    ``loss_and_grad`` takes no arguments and reads the current ``model.params``.
    Each epoch evaluates the loss, stops if it is at or below ``loss_tol``,
    and otherwise takes one ADAM step; ``epochs_run`` counts these epochs.
    A non-finite loss or gradient restores the last finite parameters.
    ``state`` carries ADAM moments over from an earlier call.
    """
    theta = model.params
    if state is None:
        state = AdamState.zeros(theta.size)
    curve = []
    reason = "epoch-cap"
    last_good = theta.copy()
    loss = math.nan
    epoch = 0
    for epoch in range(1, cfg.max_epochs + 1):
        loss, grad = loss_and_grad()
        loss = float(loss)
        if not math.isfinite(loss):
            reason = "divergence"
            model.params = last_good
            loss = curve[-1][1] if curve else loss
            break
        last_good = model.params
        if epoch == 1 or epoch % cfg.log_every == 0:
            curve.append((epoch, loss))
        if loss <= cfg.loss_tol:
            reason = "tol"
            break
        try:
            new, state = adam_step(last_good, grad, state, adam)
        except DivergenceError as exc:
            log.warning("stopping: %s", exc)
            reason = "divergence"
            break
        model.params = new
    else:
        loss, _ = loss_and_grad()
        loss = float(loss)
        if not math.isfinite(loss):
            reason = "divergence"
            model.params = last_good
            loss = curve[-1][1]

    if not curve or curve[-1] != (epoch, loss):
        if curve and curve[-1][0] == epoch:
            curve[-1] = (epoch, loss)
        else:
            curve.append((epoch, loss))
    log.debug("train stop=%s epochs=%d loss=%.3e", reason, epoch, loss)
    return TrainReport(epochs_run=epoch, final_loss=loss, stop_reason=reason,
                       loss_curve=curve, seed=cfg.seed, state=state)


def train_two_phase(loss_and_grad, model, adam: AdamConfig,
                    phase1: TrainConfig = TrainConfig(10_000, 1e-4),
                    phase2: TrainConfig = TrainConfig(30_000, 1e-8),
                    reset_state: bool = False):
    """Coarse run to ``phase1.loss_tol``, then continue to ``phase2.loss_tol``.

    ADAM moments carry into the second phase unless ``reset_state``.
    Returns both reports.
    """
    r1 = train(loss_and_grad, model, adam, phase1)
    if r1.stop_reason == "divergence":
        return r1, None
    carry = None if reset_state else r1.state
    if phase2.seed is None:
        phase2 = replace(phase2, seed=phase1.seed)
    r2 = train(loss_and_grad, model, adam, phase2, state=carry)
    return r1, r2
