import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cfchannel.model import (Alphabet, Partition, RatingInstance, effective_stats,
                             generate_instance, has_identical_clusters, lemma1_bound,
                             uniform_partition)


def test_uniform_partition_blocks():
    p = uniform_partition(6, 2)
    assert p.n_clusters == 3
    assert p.assignment.tolist() == [0, 0, 1, 1, 2, 2]
    assert uniform_partition(4, 4).assignment.tolist() == [0, 0, 0, 0]
    with pytest.raises(ValueError):
        uniform_partition(10, 3)


def test_partition_validation():
    with pytest.raises(ValueError):
        Partition(np.array([0, -1]), (1, 1))
    with pytest.raises(ValueError):
        Partition(np.array([0, 2]), (1, 1))
    with pytest.raises(ValueError):
        Partition.from_sizes([2, 0])
    with pytest.raises(ValueError):
        Alphabet(1)
    p = Partition.from_labels([5, 5, 2, 7])
    assert p.assignment.tolist() == [0, 0, 1, 2]
    assert p.cluster_sizes == (2, 1, 1)
    assert p == Partition.from_labels([1, 1, 0, 2])


def test_generate_is_deterministic():
    rows, cols = uniform_partition(20, 4), uniform_partition(30, 5)
    a = generate_instance(rows, cols, 2, seed=11)
    b = generate_instance(rows, cols, 2, seed=11)
    assert np.array_equal(a.matrix, b.matrix)
    assert a.matrix.tobytes() == b.matrix.tobytes()
    assert not np.array_equal(a.matrix, generate_instance(rows, cols, 2, seed=12).matrix)


def test_generate_binary_balance():
    inst = generate_instance(uniform_partition(100, 1), uniform_partition(100, 1), 2, seed=3)
    frac = inst.cluster_values.mean()
    assert 0.485 <= frac <= 0.515


def test_generate_quaternary_balance():
    inst = generate_instance(uniform_partition(100, 1), uniform_partition(100, 1), 4, seed=4)
    freq = np.bincount(inst.cluster_values.ravel(), minlength=4) / 10**4
    sigma = np.sqrt(0.25 * 0.75 / 10**4)
    assert np.all(np.abs(freq - 0.25) <= 3 * sigma)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(1, 4), min_size=1, max_size=6),
       st.lists(st.integers(1, 4), min_size=1, max_size=6),
       st.integers(2, 5), st.integers(0, 2**64 - 1))
def test_matrix_is_block_constant(row_sizes, col_sizes, k, seed):
    rows, cols = Partition.from_sizes(row_sizes), Partition.from_sizes(col_sizes)
    inst = generate_instance(rows, cols, k, seed)
    x, v = inst.matrix, inst.cluster_values
    for a in range(rows.dim):
        for b in range(cols.dim):
            assert x[a, b] == v[rows.assignment[a], cols.assignment[b]]
    assert 0 <= x.min() and x.max() < k


def test_effective_stats_without_merges():
    rows, cols = uniform_partition(4, 2), uniform_partition(4, 2)
    inst = RatingInstance.from_values(rows, cols, [[0, 1], [1, 1]])
    s = effective_stats(inst)
    assert (s.s_star, s.s_low, s.merged) == (4, 4, False)


def test_effective_stats_forced_merge():
    rows, cols = uniform_partition(4, 2), uniform_partition(4, 2)
    inst = RatingInstance.from_values(rows, cols, [[0, 1], [0, 1]])
    s = effective_stats(inst)
    assert s.s_star == 8
    assert s.merged and has_identical_clusters(inst)


def test_effective_stats_nonuniform_distinct():
    rows, cols = Partition.from_sizes([1, 3]), Partition.from_sizes([2, 5])
    inst = RatingInstance.from_values(rows, cols, [[0, 1], [1, 1]])
    s = effective_stats(inst)
    assert (s.s_low, s.s_star) == (1 * 2, 3 * 5)


def test_lemma1_bound_values():
    assert lemma1_bound(1024, 30) == pytest.approx(2.0**-10, rel=1e-12)
    vals = [lemma1_bound(2, t) for t in range(1, 80)]
    assert all(b <= a for a, b in zip(vals, vals[1:]))
    assert vals[-1] < 1e-20
    assert lemma1_bound(5, 1) == 1.0
    with pytest.raises(ValueError):
        lemma1_bound(1, 3)


@pytest.mark.slow
def test_no_row_merges_at_t40():
    # bound m^2/2^t = 2^-20, so zero merges over 10^4 trials is expected
    rows, cols = uniform_partition(1024, 1), uniform_partition(40, 1)
    merges = sum(has_identical_clusters_rows(generate_instance(rows, cols, 2, s))
                 for s in range(10**4))
    assert merges == 0


def has_identical_clusters_rows(inst):
    v = inst.cluster_values
    return len({r.tobytes() for r in v}) < v.shape[0]


def test_merge_frequency_within_lemma1_bound():
    m, t, trials = 8, 10, 3000
    rows, cols = uniform_partition(m, 1), uniform_partition(t, 1)
    hits = sum(has_identical_clusters_rows(generate_instance(rows, cols, 2, s))
               for s in range(trials))
    bound = lemma1_bound(m, t)
    assert hits / trials <= bound + 3 * np.sqrt(bound / trials)
