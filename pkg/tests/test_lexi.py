import itertools

import numpy as np
import pytest

from flm.lexi import MAX_DIM, index_set, sign_factor, sign_factors, sign_matrix, sine_masks


def test_sign_matrix_m3_rows():
    S = sign_matrix(3)
    assert S.rows.tolist() == [[1, 1, 1], [1, 1, -1], [1, -1, 1], [1, -1, -1]]
    assert S.l == 4


def test_small_dimensions():
    assert sign_matrix(2).rows.tolist() == [[1, 1], [1, -1]]
    assert sign_matrix(1).rows.tolist() == [[1]]


@pytest.mark.parametrize("m", range(1, 7))
def test_rows_enumerate_all_positive_leading_vectors(m):
    S = sign_matrix(m)
    expected = [(1, *tail) for tail in itertools.product((1, -1), repeat=m - 1)]
    assert [tuple(r) for r in S.rows.tolist()] == expected
    assert S.rows.shape == (2 ** (m - 1), m)
    assert S.rows.dtype == np.int8


@pytest.mark.parametrize("m", [0, -1, MAX_DIM + 1])
def test_invalid_dimension(m):
    with pytest.raises(ValueError):
        sign_matrix(m)


def test_index_sets_two_inputs():
    assert index_set(1, 2).sine_set == frozenset()
    assert index_set(2, 2).sine_set == {2}
    assert index_set(4, 2).sine_set == {1, 2}
    assert index_set(2, 2).cosine_set == {1}


@pytest.mark.parametrize("k", [0, 9])
def test_index_out_of_range(k):
    with pytest.raises(IndexError):
        index_set(k, 3)


@pytest.mark.parametrize("m", range(1, 6))
def test_index_set_is_a_bijection(m):
    seen = {index_set(k, m).sine_set for k in range(1, 2 ** m + 1)}
    assert len(seen) == 2 ** m
    for k in range(1, 2 ** m + 1):
        b = index_set(k, m)
        assert b.sine_set | b.cosine_set == set(range(1, m + 1))
        assert not b.sine_set & b.cosine_set
    assert index_set(2 ** m, m).sine_set == set(range(1, m + 1))


def test_sign_factor_examples():
    S = sign_matrix(2)
    assert sign_factor(S, 1, 4) == 1
    assert sign_factor(S, 2, 4) == -1
    for m in range(1, 5):
        Sm = sign_matrix(m)
        assert all(sign_factor(Sm, i, 1) == 1 for i in range(1, Sm.l + 1))


@pytest.mark.parametrize("m", range(1, 6))
def test_vectorised_tables_match_scalar_versions(m):
    S = sign_matrix(m)
    table = sign_factors(S)
    masks = sine_masks(m)
    for k in range(1, 2 ** m + 1):
        assert set(np.flatnonzero(masks[k - 1]) + 1) == index_set(k, m).sine_set
        for i in range(1, S.l + 1):
            assert table[i - 1, k - 1] == sign_factor(S, i, k)
    assert set(np.unique(table)) <= {-1, 1}


def test_sign_factor_bounds():
    S = sign_matrix(2)
    with pytest.raises(IndexError):
        sign_factor(S, 3, 1)
