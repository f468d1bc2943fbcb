"""Incremental evaluation of the cross-arm sum inside the OCUCB-n confidence level.

For arm ``i`` the quantity is::

    sum_j min(T_i, T_j**rho * T_i**(1 - rho)) = T_i**(1 - rho) * sum_j min(T_i**rho, T_j**rho)

Because ``x -> x**rho`` is monotone, the inner sum splits at the rank of
``T_i`` among the sorted counts: arms with smaller counts contribute their own
``T_j**rho`` (a prefix sum), all others contribute ``T_i**rho``.

Pull counts only ever grow by one. Incrementing an arm whose count is ``c``
is done by first swapping it with the *last* arm of count ``c`` in sorted
order (a no-op on the sorted values), then bumping that slot. The sorted order
is preserved, so a single Fenwick point update keeps the prefix sums current.
"""

from __future__ import annotations

from bisect import bisect_left, bisect_right
from typing import List

import numpy as np


class FenwickTree:
    """Prefix sums over a fixed-length array of floats, O(log n) per operation."""

    def __init__(self, values) -> None:
        self._tree: List[float] = [float(v) for v in values]
        n = len(self._tree)
        for idx in range(1, n + 1):
            parent = idx + (idx & -idx)
            if parent <= n:
                self._tree[parent - 1] += self._tree[idx - 1]

    def __len__(self) -> int:
        return len(self._tree)

    def add(self, idx: int, delta: float) -> None:
        idx += 1
        n = len(self._tree)
        while idx <= n:
            self._tree[idx - 1] += delta
            idx += idx & -idx

    def prefix_sum(self, stop: int) -> float:
        """Sum of the first ``stop`` entries."""
        total = 0.0
        while stop > 0:
            total += self._tree[stop - 1]
            stop &= stop - 1
        return total


def count_power(count: float, rho: float) -> float:
    # 0**0 == 1 (pow convention); x**1 and x**0 are exact, which keeps the
    # rho in {0, 1} reductions exact.
    return float(count) ** rho


class DenominatorAccumulator:
    """Sorted multiset of pull counts with prefix sums of ``T_j**rho``.

    ``increment`` and ``query`` both cost O(log K). ``query_all`` evaluates
    every arm at once in O(K log K) with numpy.
    """

    def __init__(self, num_arms: int, rho: float, counts=None) -> None:
        if num_arms < 1:
            raise ValueError("num_arms must be positive")
        if not 0.0 <= rho <= 1.0:
            raise ValueError("rho must lie in [0, 1]")
        self.num_arms = int(num_arms)
        self.rho = float(rho)
        initial = [0] * self.num_arms if counts is None else [int(c) for c in counts]
        if len(initial) != self.num_arms or min(initial) < 0:
            raise ValueError("counts must be one nonnegative integer per arm")
        self._counts = initial
        order = sorted(range(self.num_arms), key=lambda a: initial[a])
        self._arm_at = order
        self._pos_of = [0] * self.num_arms
        for pos, arm in enumerate(order):
            self._pos_of[arm] = pos
        self._sorted = [initial[a] for a in order]
        self._powers = np.array([count_power(c, rho) for c in self._sorted])
        self._fenwick = FenwickTree(self._powers)

    @property
    def counts(self) -> List[int]:
        return list(self._counts)

    def increment(self, arm: int) -> None:
        count = self._counts[arm]
        pos = self._pos_of[arm]
        last = bisect_right(self._sorted, count) - 1
        if last != pos:
            other = self._arm_at[last]
            self._arm_at[pos], self._arm_at[last] = other, arm
            self._pos_of[other], self._pos_of[arm] = pos, last
        new_power = count_power(count + 1, self.rho)
        self._fenwick.add(last, new_power - self._powers[last])
        self._powers[last] = new_power
        self._sorted[last] = count + 1
        self._counts[arm] = count + 1

    def query(self, arm: int) -> float:
        count = self._counts[arm]
        below = bisect_left(self._sorted, count)
        inner = self._fenwick.prefix_sum(below) + count_power(count, self.rho) * (self.num_arms - below)
        return count_power(count, 1.0 - self.rho) * inner

    def query_all(self) -> np.ndarray:
        counts = np.asarray(self._counts, dtype=np.float64)
        sorted_counts = np.asarray(self._sorted, dtype=np.float64)
        below = np.searchsorted(sorted_counts, counts, side="left")
        prefix = np.concatenate(([0.0], np.cumsum(self._powers)))
        inner = prefix[below] + counts**self.rho * (self.num_arms - below)
        return counts ** (1.0 - self.rho) * inner


def naive_denominator(counts, arm: int, rho: float) -> float:
    """Direct O(K) evaluation of the sum, used as a reference."""
    ti = float(counts[arm])
    return sum(min(ti, float(tj) ** rho * ti ** (1.0 - rho)) for tj in counts)
