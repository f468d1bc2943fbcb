"""Instance difficulty and closed-form regret envelopes.

Covers the gaps, the effective number of arms ``k_{i,rho}``, the confidence
level ``b_i``, the finite-time upper envelope of OCUCB-n (up to its unknown
constant), the near-matching lower envelope and the asymptotic log-slope.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from .policies import IndexParams


@dataclass(frozen=True)
class GapProfile:
    gaps: np.ndarray
    min_positive: Optional[float]
    max_gap: float

    @property
    def num_arms(self) -> int:
        return len(self.gaps)

    @property
    def suboptimal(self) -> np.ndarray:
        return np.flatnonzero(self.gaps > 0)


@dataclass(frozen=True)
class BoundReport:
    """Per-arm contributions of one envelope; optimal arms contribute 0."""

    kind: str
    contributions: np.ndarray
    total: float
    constant: float
    slope: Optional[float] = None
    violations: Tuple[int, ...] = field(default_factory=tuple)

    @property
    def hypothesis_holds(self) -> bool:
        return not self.violations


def gaps(means: Sequence[float]) -> GapProfile:
    values = np.asarray(means, dtype=np.float64)
    if values.ndim != 1 or len(values) < 2:
        raise ValueError("need at least 2 arm means")
    g = values.max() - values
    positive = g[g > 0]
    return GapProfile(
        gaps=g,
        min_positive=float(positive.min()) if positive.size else None,
        max_gap=float(g.max()),
    )


def _profile(values: Union[GapProfile, Sequence[float]], *, are_gaps: bool) -> GapProfile:
    if isinstance(values, GapProfile):
        return values
    if are_gaps:
        g = np.asarray(values, dtype=np.float64)
        positive = g[g > 0]
        return GapProfile(g, float(positive.min()) if positive.size else None, float(g.max()))
    return gaps(values)


def effective_arms(gap_profile: Union[GapProfile, Sequence[float]], i: int, rho: float) -> float:
    """``k_{i,rho} = sum_j min{1, (Delta_i / Delta_j)**(2 rho)}``.

    A zero gap ``Delta_j`` makes the ratio infinite, so its term is 1.
    """
    profile = _profile(gap_profile, are_gaps=True)
    g = profile.gaps
    di = float(g[i])
    if di <= 0:
        raise ValueError(f"arm {i} is optimal; k_(i,rho) is defined for suboptimal arms only")
    if rho == 0:
        return float(len(g))
    terms = np.ones_like(g)
    larger = g > di
    terms[larger] = (di / g[larger]) ** (2.0 * rho)
    return float(terms.sum())


def confidence_levels(means: Sequence[float], n: int, rho: float) -> np.ndarray:
    """``b_i = max{n Delta_i^2 log(n) / k_{i,rho}, log n, e}`` per arm (NaN for optimal arms)."""
    profile = gaps(means)
    log_n = math.log(n)
    out = np.full(profile.num_arms, np.nan)
    for i in profile.suboptimal:
        k = effective_arms(profile, int(i), rho)
        out[i] = max(n * profile.gaps[i] ** 2 * log_n / k, log_n, math.e)
    return out


def asymptotic_slope(means: Sequence[float], eta: float) -> float:
    """``sum_{i: Delta_i > 0} 2 eta / Delta_i``."""
    profile = gaps(means)
    if profile.min_positive is None:
        raise ValueError("all arms are optimal; the slope is undefined")
    positive = profile.gaps[profile.suboptimal]
    return float(np.sum(2.0 * eta / positive))


def upper_envelope(
    means: Sequence[float], n: int, params: IndexParams, C: float = 1.0
) -> BoundReport:
    """Upper envelope ``C * sum_i (Delta_i + log(b_i) / Delta_i)``.

    The constant depends only on eta and is not known in closed form, so the
    caller supplies it.
    """
    if n < 2:
        raise ValueError("horizon must be at least 2")
    if not C > 0:
        raise ValueError("C must be positive")
    profile = gaps(means)
    levels = confidence_levels(means, n, params.rho)
    contributions = np.zeros(profile.num_arms)
    for i in profile.suboptimal:
        d = profile.gaps[i]
        contributions[i] = C * (d + math.log(levels[i]) / d)
    slope = asymptotic_slope(means, params.eta) if profile.min_positive is not None else None
    return BoundReport("upper", contributions, float(contributions.sum()), float(C), slope)


def lower_envelope(means: Sequence[float], n: int) -> BoundReport:
    """Lower envelope ``1/4 sum_i log(n Delta_i^2 / (k_{i,1/2} log n)) / Delta_i``.

    Only valid when every log argument is at least 1; arms breaking that are
    listed in ``violations`` and their term is clamped at 0.
    """
    if n < 2:
        raise ValueError("horizon must be at least 2")
    profile = gaps(means)
    log_n = math.log(n)
    contributions = np.zeros(profile.num_arms)
    violations = []
    for i in profile.suboptimal:
        d = profile.gaps[i]
        ratio = n * d**2 / (effective_arms(profile, int(i), 0.5) * log_n)
        if ratio < 1.0:
            violations.append(int(i))
        contributions[i] = 0.25 * math.log(ratio) / d if ratio > 1.0 else 0.0
    return BoundReport("lower", contributions, float(contributions.sum()), 0.25, None, tuple(violations))


# names used by the operation list
theorem1_upper = upper_envelope
appendixA_lower = lower_envelope
appendix_a_lower = lower_envelope
