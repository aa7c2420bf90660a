import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from conftest import random_samples
from ssrlsc.datamodel import SampleSet
from ssrlsc.graph import build_neighbors, squared_distances


def _as_lists(nbrs):
    return [list(map(int, w)) for w in nbrs.within], [list(map(int, b)) for b in nbrs.between]


def test_line_fixture(line_samples):
    nbrs = build_neighbors(line_samples, 1, 1)
    within, between = _as_lists(nbrs)
    assert within == [[1], [0], [3], [2]]
    assert between == [[2], [2], [1], [1]]


def test_clipping_to_class_size(line_samples):
    nbrs = build_neighbors(line_samples, 5, 5)
    within, between = _as_lists(nbrs)
    assert within == [[1], [0], [3], [2]]
    assert between == [[2, 3], [2, 3], [1, 0], [1, 0]]
    assert nbrs.k_w == 5 and len(nbrs) == 4


def test_ties_go_to_lower_index():
    s = SampleSet([[0.0], [1.0], [1.0], [-1.0], [5.0]], [1, 1, 1, 1, 2], [[0, k] for k in range(5)])
    within, between = _as_lists(build_neighbors(s, 2, 1))
    # From 0, samples 1, 2 and 3 all sit at distance 1.
    assert within[0] == [1, 2]
    assert within[1] == [2, 0]
    assert between[0] == [4]


def test_singleton_class_has_empty_within_list():
    s = SampleSet([[0.0], [1.0], [3.0]], [1, 1, 2], [[0, 0], [0, 1], [0, 2]])
    nbrs = build_neighbors(s, 3, 3)
    assert len(nbrs.within[2]) == 0
    assert list(nbrs.between[2]) == [1, 0]


def test_invalid_k(line_samples):
    with pytest.raises(ValueError):
        build_neighbors(line_samples, 0, 1)


def test_squared_distances_symmetric(rng):
    x = rng.normal(size=(15, 4))
    d = squared_distances(x)
    # (a - b)^2 == (b - a)^2 exactly, so the table is exactly symmetric.
    assert np.array_equal(d, d.T)
    assert np.all(np.diag(d) == 0)


@pytest.mark.parametrize("n, dim, classes, k", [(30, 3, 2, 4), (120, 10, 5, 7), (200, 20, 4, 9), (25, 2, 6, 7)])
def test_matches_bruteforce_oracle(rng, n, dim, classes, k):
    s = random_samples(rng, n, dim, classes)
    within, between = _as_lists(build_neighbors(s, k, k))
    ref_w, ref_b = oracles.knn_lists(s.features, s.labels, k, k)
    assert within == ref_w
    assert between == ref_b


def test_list_lengths_and_class_constraints(rng):
    s = random_samples(rng, 37, 5, 4)
    nbrs = build_neighbors(s, 7, 7)
    lab = s.labels
    for i in range(len(s)):
        n_c = int(np.sum(lab == lab[i]))
        assert len(nbrs.within[i]) == min(7, n_c - 1)
        assert len(nbrs.between[i]) == min(7, len(s) - n_c)
        assert i not in nbrs.within[i]
        assert np.all(lab[nbrs.within[i]] == lab[i])
        assert np.all(lab[nbrs.between[i]] != lab[i])
        d = np.sum((s.features[nbrs.within[i]] - s.features[i]) ** 2, axis=1)
        assert np.all(np.diff(d) >= 0)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.integers(8, 40), st.integers(2, 4))
def test_permutation_invariance(seed, n, classes):
    r = np.random.default_rng(seed)
    # Continuous random features make distance ties vanishingly unlikely.
    s = random_samples(r, n, 3, classes)
    perm = r.permutation(n)
    shuffled = SampleSet(s.features[perm], s.labels[perm], s.positions[perm])
    a = build_neighbors(s, 3, 4)
    b = build_neighbors(shuffled, 3, 4)
    for new, old in enumerate(perm):
        assert [int(perm[j]) for j in b.within[new]] == list(map(int, a.within[old]))
        assert [int(perm[j]) for j in b.between[new]] == list(map(int, a.between[old]))
