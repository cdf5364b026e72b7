import math

import numpy as np
import pytest

from flm.optim import (AdamConfig, AdamState, DivergenceError, TrainConfig, adam_step, train,
                       train_two_phase)


class Quadratic:
    """Loss ||theta||^2 / 2 with a mutable parameter vector."""

    def __init__(self, theta):
        self.params = np.asarray(theta, dtype=float)

    def __call__(self):
        return 0.5 * float(self.params @ self.params), self.params.copy()


def test_zero_gradient_leaves_params():
    p = np.array([1.0, -2.0])
    new, st = adam_step(p, np.zeros(2), AdamState.zeros(2), AdamConfig())
    assert np.array_equal(new, p)
    assert st.t == 1


def test_first_step_size():
    new, _ = adam_step(np.array([0.0]), np.array([1.0]), AdamState.zeros(1), AdamConfig(lr=1e-3))
    assert new[0] == pytest.approx(-1e-3, abs=1e-6)


def test_elementwise_independence():
    new, _ = adam_step(np.array([0.3, 0.3]), np.array([0.7, 0.7]), AdamState.zeros(2), AdamConfig())
    assert new[0] == new[1]


def test_nonfinite_gradient_reports_index():
    with pytest.raises(DivergenceError) as info:
        adam_step(np.zeros(3), np.array([0.0, np.nan, 1.0]), AdamState.zeros(3), AdamConfig())
    assert info.value.index == 1


@pytest.mark.parametrize("kw", [dict(lr=0), dict(beta1=1.0), dict(beta2=-0.1), dict(eps=0)])
def test_config_validation(kw):
    with pytest.raises(ValueError):
        AdamConfig(**kw)


def test_train_config_validation():
    with pytest.raises(ValueError):
        TrainConfig(max_epochs=0)
    with pytest.raises(ValueError):
        TrainConfig(loss_tol=-1)


def test_convex_quadratic_converges():
    q = Quadratic(np.ones(4))
    rep = train(q, q, AdamConfig(lr=0.1), TrainConfig(10_000, 1e-8, log_every=10))
    assert rep.stop_reason == "tol"
    assert rep.final_loss <= 1e-8
    assert rep.final_loss == rep.loss_curve[-1][1]
    assert rep.epochs_run < 10_000


@pytest.mark.parametrize("lr", [1e-3, 1e-2, 0.1])
def test_loss_decreases(lr):
    q = Quadratic(np.ones(3))
    rep = train(q, q, AdamConfig(lr=lr), TrainConfig(200, 0.0))
    assert rep.final_loss < 1.5


def test_infinite_tolerance_stops_immediately():
    q = Quadratic(np.ones(2))
    rep = train(q, q, AdamConfig(), TrainConfig(100, math.inf))
    assert (rep.epochs_run, rep.stop_reason) == (1, "tol")
    assert np.array_equal(q.params, np.ones(2))


def test_single_epoch_takes_one_step():
    q = Quadratic(np.ones(2))
    rep = train(q, q, AdamConfig(lr=1e-3), TrainConfig(1, 0.0))
    assert rep.epochs_run == 1 and rep.stop_reason == "epoch-cap"
    assert rep.state.t == 1
    assert np.allclose(q.params, 1 - 1e-3, atol=1e-9)


def test_divergence_restores_last_finite_state():
    q = Quadratic(np.ones(2))
    calls = {"n": 0}

    def blow_up():
        calls["n"] += 1
        return (math.nan, None) if calls["n"] == 4 else q()

    rep = train(blow_up, q, AdamConfig(), TrainConfig(10, 0.0))
    assert rep.stop_reason == "divergence"
    assert np.isfinite(q.params).all()
    assert math.isfinite(rep.final_loss)


def test_deterministic_curves():
    curves = []
    for _ in range(2):
        q = Quadratic(np.linspace(-1, 1, 5))
        curves.append(train(q, q, AdamConfig(lr=0.05), TrainConfig(300, 0.0, log_every=7)).loss_curve)
    assert curves[0] == curves[1]


def test_two_phase_keeps_moments():
    q = Quadratic(np.ones(3))
    r1, r2 = train_two_phase(q, q, AdamConfig(lr=0.05), TrainConfig(50, 1e-2), TrainConfig(500, 1e-10))
    assert r1.stop_reason == "tol" and r1.final_loss <= 1e-2
    assert r2.state.t == r1.state.t + r2.epochs_run - (r2.stop_reason == "tol")
    assert r2.final_loss < r1.final_loss


def test_two_phase_reset_flag():
    q = Quadratic(np.ones(3))
    r1, r2 = train_two_phase(q, q, AdamConfig(lr=0.05), TrainConfig(20, 0.0), TrainConfig(5, 0.0),
                             reset_state=True)
    assert r2.state.t == 5
