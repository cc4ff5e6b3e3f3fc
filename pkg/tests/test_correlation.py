from fractions import Fraction

import networkx as nx
import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from bootmst.correlation import (
    CorrelationMatrix,
    pearson,
    read_matrix,
    shrink_to_psd,
    spectrum,
    to_distance,
    write_matrix,
)
from bootmst.data import ReturnsPanel
from bootmst.exceptions import PanelError
from bootmst.filtering import mst

from conftest import random_correlation


def corr2(x, y):
    return pearson(np.array([x, y], dtype=float)).values[0, 1]


def test_pearson_identical_and_reversed():
    assert corr2([1, 2, 3], [1, 2, 3]) == pytest.approx(1.0, abs=1e-15)
    assert corr2([1, 2, 3], [3, 2, 1]) == pytest.approx(-1.0, abs=1e-15)


def test_pearson_hand_value():
    # dx = dy-permuted (-1.5,-.5,.5,1.5): sxy = 4, sxx = syy = 5
    assert corr2([1, 2, 3, 4], [1, 3, 2, 4]) == pytest.approx(0.8, abs=1e-15)


def test_pearson_matches_numpy_and_structure():
    rng = np.random.default_rng(0)
    X = rng.standard_normal((7, 30))
    C = pearson(ReturnsPanel(tuple("abcdefg"), X)).values
    np.testing.assert_allclose(C, np.corrcoef(X), atol=1e-13)
    assert np.array_equal(C, C.T)
    assert np.all(np.diag(C) == 1.0)


def test_pearson_zero_variance_is_error():
    with pytest.raises(PanelError):
        pearson(np.array([[1.0, 1.0, 1.0], [1.0, 2.0, 3.0]]))


@pytest.mark.parametrize("rho, d", [(1.0, 0.0), (-1.0, 2.0), (0.0, np.sqrt(2.0))])
def test_distance_values(rho, d):
    C = np.array([[1.0, rho], [rho, 1.0]])
    D = to_distance(C)
    assert D[0, 1] == pytest.approx(d, abs=1e-15)
    assert D[0, 0] == 0.0


@given(st.floats(-1, 1), st.floats(-1, 1))
def test_distance_strictly_decreasing(a, b):
    da, db = to_distance(np.array([[1.0, a], [a, 1.0]]))[0, 1], to_distance(np.array([[1.0, b], [b, 1.0]]))[0, 1]
    if a < b:
        assert da >= db
    assert 0.0 <= da <= 2.0


def test_mst_on_distance_is_max_spanning_tree_on_correlation():
    rng = np.random.default_rng(12)
    for _ in range(50):
        C = random_correlation(rng, 12).values
        g = nx.Graph()
        for i in range(12):
            for j in range(i + 1, 12):
                g.add_edge(i, j, weight=C[i, j])
        expected = {tuple(sorted(e)) for e in nx.maximum_spanning_tree(g).edges()}
        assert set(mst(to_distance(C)).edges) == expected


def test_spectrum_examples():
    np.testing.assert_allclose(spectrum(np.eye(3)).eigenvalues, [1, 1, 1], atol=1e-14)
    np.testing.assert_allclose(spectrum(np.array([[1, 0.5], [0.5, 1]])).eigenvalues, [0.5, 1.5], atol=1e-14)


def test_spectrum_three_by_three_characteristic_polynomial():
    A = [[1, Fraction(9, 10), Fraction(9, 10)], [Fraction(9, 10), 1, Fraction(-9, 10)], [Fraction(9, 10), Fraction(-9, 10), 1]]
    expected = [Fraction(-4, 5), Fraction(19, 10), Fraction(19, 10)]

    def det3(M):
        return (M[0][0] * (M[1][1] * M[2][2] - M[1][2] * M[2][1])
                - M[0][1] * (M[1][0] * M[2][2] - M[1][2] * M[2][0])
                + M[0][2] * (M[1][0] * M[2][1] - M[1][1] * M[2][0]))

    for lam in expected:
        assert det3([[A[i][j] - (lam if i == j else 0) for j in range(3)] for i in range(3)]) == 0
    got = spectrum(np.array(A, dtype=float)).eigenvalues
    np.testing.assert_allclose(got, [float(x) for x in expected], atol=1e-12)


@pytest.mark.parametrize("n", [5, 60, 500])
def test_spectrum_against_reference_solver(n):
    C = random_correlation(np.random.default_rng(n), n, T=n // 2 + 3).values
    ours = spectrum(C).eigenvalues
    ref = scipy.linalg.eigh(C, eigvals_only=True, driver="ev")
    np.testing.assert_allclose(ours, np.sort(ref), atol=1e-8)
    assert np.all(np.diff(ours) >= 0)
    assert abs(ours.sum() - n) <= 1e-8 * n


def test_shrink_psd_input_untouched():
    C = random_correlation(np.random.default_rng(1), 6)
    out, alpha = shrink_to_psd(C, 0.0)
    assert alpha == 0.0
    np.testing.assert_array_equal(out.values, C.values)


def test_shrink_identity():
    for floor in (0.0, 0.5, 1.0):
        out, alpha = shrink_to_psd(np.eye(4), floor)
        assert alpha == 0.0


def test_shrink_closed_form_alpha():
    A = np.array([[1, 0.9, 0.9], [0.9, 1, -0.9], [0.9, -0.9, 1]])
    out, alpha = shrink_to_psd(A, 0.0)
    assert alpha == pytest.approx(0.8 / 1.8, rel=1e-12)
    assert np.all(np.diag(out.values) == 1.0)
    lam = spectrum(out).min
    assert 0.0 <= lam <= 1e-10


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from([0.0, 1e-10, 1e-3, 0.05]))
def test_shrink_lands_on_floor(seed, floor):
    rng = np.random.default_rng(seed)
    n = 8
    B = rng.uniform(-1, 1, (n, n))
    S = np.triu(B, 1)
    S = S + S.T
    np.fill_diagonal(S, 1.0)
    out, alpha = shrink_to_psd(S, floor)
    lam = spectrum(out).min
    if alpha > 0:
        assert floor - 1e-12 <= lam <= floor + 1e-10
    else:
        assert lam >= floor
    assert out.psd_checked


def test_correlation_matrix_validation():
    with pytest.raises(ValueError):
        CorrelationMatrix(np.array([[1.0, 0.2], [0.3, 1.0]]))
    with pytest.raises(ValueError):
        CorrelationMatrix(np.array([[2.0, 0.2], [0.2, 1.0]]))


def test_matrix_dump_round_trip(tmp_path):
    C = random_correlation(np.random.default_rng(5), 4)
    write_matrix(C, tmp_path / "c.csv", ["a", "b", "c", "d"])
    labels, values = read_matrix(tmp_path / "c.csv")
    assert labels == ["a", "b", "c", "d"]
    np.testing.assert_array_equal(values, C.values)
