import numpy as np
import pytest

from helpers import brute_force_dtw
from vibsig import distance_matrix, dtw_distance, dtw_path
from vibsig.errors import EmptyInput


def test_identity():
    assert dtw_distance([1.0, 2.0, 3.0], [1.0, 2.0, 3.0]) == 0.0


def test_warping_absorbs_repeated_value():
    assert dtw_distance([0.0, 0.0, 1.0, 0.0], [0.0, 1.0, 0.0]) == 0.0


def test_constant_offset():
    assert dtw_distance([1.0, 1.0, 1.0], [2.0, 2.0, 2.0]) == pytest.approx(3.0)
    assert brute_force_dtw([1, 1, 1], [2, 2, 2]) == pytest.approx(3.0)


def test_agrees_with_exhaustive_enumeration(rng):
    for _ in range(300):
        a = rng.normal(size=int(rng.integers(1, 7)))
        b = rng.normal(size=int(rng.integers(1, 7)))
        assert dtw_distance(a, b) == pytest.approx(brute_force_dtw(a, b), rel=1e-12)


def test_symmetry_and_nonnegativity(rng):
    for _ in range(200):
        a = rng.normal(size=int(rng.integers(1, 40)))
        b = rng.normal(size=int(rng.integers(1, 40)))
        d = dtw_distance(a, b)
        assert d >= 0.0
        assert d == pytest.approx(dtw_distance(b, a), rel=1e-12)


def test_warping_beats_rigid_alignment(rng):
    for _ in range(200):
        n = int(rng.integers(1, 50))
        a = rng.normal(size=n)
        b = rng.normal(size=n)
        rigid = float(np.sum(np.abs(a - b)))
        assert dtw_distance(a, b) <= rigid + 1e-9 * max(rigid, 1.0)


def test_squared_cost_variant():
    assert dtw_distance([1.0], [3.0], squared=True) == pytest.approx(4.0)
    assert dtw_distance([1.0], [3.0]) == pytest.approx(2.0)


def test_band_zero_equals_rigid_cost(rng):
    for _ in range(50):
        n = int(rng.integers(1, 30))
        a = rng.normal(size=n)
        b = rng.normal(size=n)
        rigid = float(np.sum(np.abs(a - b)))
        assert dtw_distance(a, b, band=0) == pytest.approx(rigid, rel=1e-12)


def test_wide_band_matches_unbanded(rng):
    for _ in range(50):
        a = rng.normal(size=int(rng.integers(1, 25)))
        b = rng.normal(size=int(rng.integers(1, 25)))
        assert dtw_distance(a, b, band=100) == pytest.approx(dtw_distance(a, b), rel=1e-12)


def test_empty_inputs():
    with pytest.raises(EmptyInput):
        dtw_distance([], [1.0])
    with pytest.raises(EmptyInput):
        dtw_path([1.0], [])
    with pytest.raises(EmptyInput):
        distance_matrix([])


# -- paths ---------------------------------------------------------------------

def check_path_invariants(path, a, b):
    pairs = path.pairs
    assert pairs[0] == (0, 0)
    assert pairs[-1] == (len(a) - 1, len(b) - 1)
    for (i0, j0), (i1, j1) in zip(pairs[:-1], pairs[1:]):
        assert (i1 - i0, j1 - j0) in {(1, 0), (0, 1), (1, 1)}
    cost = sum(abs(a[i] - b[j]) for i, j in pairs)
    assert cost == pytest.approx(path.cost, rel=1e-12, abs=1e-12)


def test_path_equal_sequences_is_diagonal():
    a = [0.5, 1.0, -0.25, 0.0]
    path = dtw_path(a, a)
    assert path.pairs == tuple((i, i) for i in range(4))
    assert path.cost == 0.0


def test_path_single_element_expansion():
    path = dtw_path([0.0], [0.0, 0.0, 0.0])
    assert path.pairs == ((0, 0), (0, 1), (0, 2))
    assert path.cost == 0.0


def test_path_cost_matches_distance_and_oracle(rng):
    for _ in range(200):
        a = rng.normal(size=int(rng.integers(1, 7)))
        b = rng.normal(size=int(rng.integers(1, 7)))
        path = dtw_path(a, b)
        check_path_invariants(path, a, b)
        assert path.cost == pytest.approx(dtw_distance(a, b), rel=1e-12)
        assert path.cost == pytest.approx(brute_force_dtw(a, b), rel=1e-12)


# -- distance_matrix --------------------------------------------------------------

def test_path_respects_band(rng):
    a = rng.normal(size=12)
    b = rng.normal(size=9)
    path = dtw_path(a, b, band=3)
    check_path_invariants(path, a, b)
    assert path.cost == pytest.approx(dtw_distance(a, b, band=3), rel=1e-12)
    assert all(abs(i - j) <= max(3, 12 - 9) for i, j in path.pairs)


def test_distance_matrix_single():
    np.testing.assert_array_equal(distance_matrix([np.array([1.0, 2.0])]), [[0.0]])


def test_distance_matrix_duplicate():
    s = np.array([0.1, 0.9, 0.4])
    np.testing.assert_array_equal(distance_matrix([s, s]), np.zeros((2, 2)))


def test_distance_matrix_symmetric_zero_diagonal(rng):
    sigs = [rng.normal(size=int(rng.integers(5, 30))) for _ in range(6)]
    m = distance_matrix(sigs)
    assert np.array_equal(m, m.T)
    assert np.all(np.diag(m) == 0.0)
    assert m[0, 1] == pytest.approx(dtw_distance(sigs[0], sigs[1]))


def test_distance_matrix_two_class_structure(five_class_samples):
    # 12 + 12 signatures from two distinct surfaces: within-class mean
    # distance must sit below between-class mean distance
    a = [sig for label, sig in five_class_samples if label == "surface0"][:12]
    b = [sig for label, sig in five_class_samples if label == "surface3"][:12]
    m = distance_matrix(a + b)
    within = np.concatenate([m[:12, :12][np.triu_indices(12, 1)],
                             m[12:, 12:][np.triu_indices(12, 1)]])
    between = m[:12, 12:].ravel()
    assert within.mean() < between.mean()


def test_two_row_kernel_handles_long_sequences(rng):
    # a full cost matrix at this size would need ~3 GB; the two-row kernel
    # must run it comfortably
    a = rng.normal(size=20000)
    b = rng.normal(size=20000)
    d = dtw_distance(a, b)
    assert np.isfinite(d) and d >= 0.0
