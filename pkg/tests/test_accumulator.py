import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ocucb.accumulator import DenominatorAccumulator, FenwickTree, naive_denominator


def test_fenwick_prefix_sums():
    values = [3.0, 1.5, -2.0, 4.0, 0.25]
    tree = FenwickTree(values)
    for stop in range(len(values) + 1):
        assert tree.prefix_sum(stop) == pytest.approx(sum(values[:stop]))
    tree.add(2, 5.0)
    assert tree.prefix_sum(3) == pytest.approx(7.5)


def test_incremental_matches_naive_over_random_observes():
    rng = np.random.default_rng(0)
    for rho in (0.0, 0.5, 0.75, 1.0):
        acc = DenominatorAccumulator(12, rho)
        counts = [0] * 12
        for step in range(10_000):
            arm = int(rng.integers(12))
            acc.increment(arm)
            counts[arm] += 1
            if step % 500 == 0 or step == 9_999:
                for i in range(12):
                    if counts[i]:
                        assert acc.query(i) == pytest.approx(naive_denominator(counts, i, rho), rel=1e-9)
        assert acc.counts == counts


def test_query_all_matches_query():
    rng = np.random.default_rng(1)
    counts = rng.integers(1, 500, size=40).tolist()
    acc = DenominatorAccumulator(40, 0.6, counts)
    full = acc.query_all()
    for i in range(40):
        assert full[i] == pytest.approx(acc.query(i), rel=1e-12)


def test_construction_from_counts_equals_increments():
    counts = [3, 1, 4, 1, 5, 9, 2, 6]
    built = DenominatorAccumulator(8, 0.5, counts)
    grown = DenominatorAccumulator(8, 0.5)
    for arm, c in enumerate(counts):
        for _ in range(c):
            grown.increment(arm)
    for i in range(8):
        assert built.query(i) == pytest.approx(grown.query(i), rel=1e-12)


def test_rho_zero_is_k_times_count():
    acc = DenominatorAccumulator(5, 0.0, [1, 7, 3, 3, 20])
    for i, c in enumerate([1, 7, 3, 3, 20]):
        assert acc.query(i) == 5 * c


def test_invalid_arguments():
    with pytest.raises(ValueError):
        DenominatorAccumulator(0, 0.5)
    with pytest.raises(ValueError):
        DenominatorAccumulator(3, 1.5)
    with pytest.raises(ValueError):
        DenominatorAccumulator(3, 0.5, [1, 2])


@settings(max_examples=200, deadline=None)
@given(
    st.lists(st.integers(1, 10_000), min_size=1, max_size=32),
    st.sampled_from([0.0, 0.5, 0.75, 1.0]),
    st.data(),
)
def test_denominator_oracle_property(counts, rho, data):
    acc = DenominatorAccumulator(len(counts), rho, counts)
    i = data.draw(st.integers(0, len(counts) - 1))
    assert acc.query(i) == pytest.approx(naive_denominator(counts, i, rho), rel=1e-9)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(0, 7), min_size=1, max_size=200), st.floats(0.0, 1.0))
def test_increment_sequences_keep_sorted_invariant(arms, rho):
    acc = DenominatorAccumulator(8, rho)
    counts = [0] * 8
    for a in arms:
        acc.increment(a)
        counts[a] += 1
    assert acc.counts == counts
    assert acc._sorted == sorted(counts)
    for i in range(8):
        if counts[i]:
            assert acc.query(i) == pytest.approx(naive_denominator(counts, i, rho), rel=1e-9)
