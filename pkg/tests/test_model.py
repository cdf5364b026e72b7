import json
import math

import numpy as np
import pytest

from conftest import random_model
from fdcheck import derivative_errors, rel_err
from flm.model import (CheckpointError, FlmModel, SubNetwork, init_model, lattice_frequencies,
                       load, save)
from flm.xlate import eval_separable, to_separable_md


def test_init_two_inputs_four_subnets():
    model = init_model(2, 4, seed=0)
    assert model.n.tolist() == [[0, 0], [0, 1], [1, 0], [1, 1]]
    assert not model.A.any()


def test_init_one_input():
    assert init_model(1, 3, seed=5).n.ravel().tolist() == [0, 1, 2]


def test_init_is_deterministic():
    assert init_model(3, 27, seed=7) == init_model(3, 27, seed=7)
    assert init_model(3, 27, seed=7) != init_model(3, 27, seed=8)


@pytest.mark.parametrize("m,N,k", [(2, 16, 4), (2, 25, 5), (3, 27, 3), (2, 49, 7)])
def test_lattice_fills_square_blocks(m, N, k):
    pts = lattice_frequencies(m, N)
    assert pts.shape == (N, m)
    assert pts.max() == k - 1
    assert len({tuple(p) for p in pts}) == N


def test_bias_spread_matches_pi_over_three():
    b = init_model(2, 400, seed=3).b.ravel()
    assert abs(b.std() - math.pi / 3) < 0.06
    assert abs(b.mean()) < 0.08


def test_parameter_count():
    for m in range(1, 5):
        model = init_model(m, 3, seed=0)
        assert model.n_params == 3 * (m + 2 ** m)
        assert model.params.shape == (model.n_params,)


def test_constant_model():
    model = FlmModel([[0.0, 0.0, 0.0]], [[1.0, 0, 0, 0]], [[0.0, 0, 0, 0]])
    X = np.random.default_rng(0).normal(size=(10, 3))
    assert np.allclose(model(X), 1.0)
    b = model.eval_bundle(X)
    assert not b.grad_x.any() and not b.diag_hess_x.any()


def test_phase_shift_gives_sine():
    model = FlmModel([[2.0]], [[1.0]], [[math.pi / 2]])
    assert model(np.array([math.pi / 4])) == pytest.approx(1.0, abs=1e-15)
    x = np.linspace(-3, 3, 50)[:, None]
    assert np.allclose(model(x), np.sin(2 * x[:, 0]), atol=1e-14)


def test_dimension_mismatch(rng):
    model = random_model(rng, 2, 3)
    with pytest.raises(ValueError):
        model(np.zeros(3))
    with pytest.raises(ValueError):
        FlmModel(np.zeros((2, 2)), np.zeros((2, 3)), np.zeros((2, 2)))


def test_matches_separable_expansion(rng):
    model = random_model(rng, 2, 5)
    X = rng.uniform(-4, 4, (1000, 2))
    sep = sum(eval_separable(to_separable_md(s), X) for s in model.subnets)
    assert np.abs(model(X) - sep).max() <= 1e-12


@pytest.mark.parametrize("m", [1, 2, 3])
def test_derivatives_against_finite_differences(rng, m):
    for _ in range(5):
        model = random_model(rng, m, 2)
        errs = derivative_errors(model, rng.uniform(-2, 2, m))
        assert max(errs.values()) <= 1e-5, errs


def test_vjp_matches_bundle_contraction(rng):
    model = random_model(rng, 2, 3)
    X = rng.uniform(-1, 1, (7, 2))
    g0, g1, g2 = rng.normal(size=7), rng.normal(size=(7, 2)), rng.normal(size=(7, 2))
    pg = model.eval_bundle(X).param_grads
    ref = (g0 @ pg["value"] + np.einsum("pj,pjk->k", g1, pg["grad_x"])
           + np.einsum("pj,pjk->k", g2, pg["diag_hess_x"]))
    assert rel_err(model.vjp(X, g0, g1, g2), ref) <= 1e-12


def test_grid_path_matches_point_path(rng):
    model = random_model(rng, 3, 4)
    t = np.linspace(0, 6, 11)
    Z = rng.uniform(0, 1, (5, 2))
    value, dt = model.grid_forward(model.grid_cache(t, Z))
    X = np.array([[ti, *z] for z in Z for ti in t])
    v, g, _ = model.derivatives(X)
    assert np.allclose(value.ravel(), v, atol=1e-13)
    assert np.allclose(dt.ravel(), g[:, 0], atol=1e-13)


def test_periodic_for_integer_frequencies(rng):
    model = FlmModel(rng.integers(-3, 4, (4, 2)).astype(float), rng.normal(size=(4, 2)),
                     rng.normal(size=(4, 2)))
    X = rng.uniform(-3, 3, (200, 2))
    for j in range(2):
        shift = np.zeros(2)
        shift[j] = 2 * math.pi
        assert np.abs(model(X) - model(X + shift)).max() <= 1e-10


def test_subnet_validation():
    with pytest.raises(ValueError):
        SubNetwork([1.0, 2.0], [1.0], [0.0, 0.0])


def test_checkpoint_round_trip(tmp_path, rng):
    model = random_model(rng, 3, 4)
    save(model, tmp_path / "m.json")
    back = load(tmp_path / "m.json")
    assert back == model
    assert np.array_equal(back.params, model.params)


def test_truncated_checkpoint_names_section(tmp_path, rng):
    path = tmp_path / "m.json"
    save(random_model(rng, 2, 2), path)
    text = path.read_text()
    path.write_text(text[: text.index('"subnets"') + 20])
    with pytest.raises(CheckpointError, match="subnets"):
        load(path)
    path.write_text('{"m": 2, "N": 1')
    with pytest.raises(CheckpointError, match="subnets"):
        load(path)


def test_checkpoint_with_wrong_amplitude_count(tmp_path):
    bad = {"m": 2, "N": 1, "subnets": [{"n": [0, 1], "A": [1, 2, 3], "b": [0, 0]}]}
    (tmp_path / "bad.json").write_text(json.dumps(bad))
    with pytest.raises(CheckpointError, match="2\\^\\(m-1\\)"):
        load(tmp_path / "bad.json")


def test_checkpoint_missing_key(tmp_path):
    (tmp_path / "bad.json").write_text(json.dumps({"m": 2, "subnets": []}))
    with pytest.raises(CheckpointError, match="'N'"):
        load(tmp_path / "bad.json")
