"""Index policies: OCUCB-n, KL-UCB+, UCB1 and MOSS (OCUCB-n with rho = 0).

This is the per-episode reference implementation built around a mutable
:class:`PolicyState`. The Monte Carlo engine in :mod:`ocucb.sim` evaluates
the same formulas on whole batches of episodes at once.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import List, Optional, Union

from .accumulator import DenominatorAccumulator


class PolicyKind(str, Enum):
    OCUCB = "ocucb"
    KLUCB_PLUS = "klucb+"
    UCB1 = "ucb1"
    MOSS = "moss"

    @classmethod
    def parse(cls, value: Union[str, "PolicyKind"]) -> "PolicyKind":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("_", "-")
        aliases = {"ocucb-n": "ocucb", "klucb-plus": "klucb+", "kl-ucb+": "klucb+", "ucb": "ucb1"}
        key = aliases.get(key, key)
        try:
            return cls(key)
        except ValueError:
            names = ", ".join(k.value for k in cls)
            raise ValueError(f"unknown policy kind {value!r} (expected one of: {names})") from None


class OutsideTheoremWarning(UserWarning):
    """rho is admissible for the algorithm but outside [1/2, 1] where the finite-time bound is proven."""


@dataclass(frozen=True)
class IndexParams:
    eta: float = 2.0
    rho: float = 0.5
    drop_log_factors: bool = False

    def __post_init__(self) -> None:
        if not self.eta > 1.0:
            raise ValueError("eta must exceed 1")
        if not 0.0 <= self.rho <= 1.0:
            raise ValueError("rho must lie in [0, 1]")

    @property
    def within_theorem(self) -> bool:
        return 0.5 <= self.rho <= 1.0


@dataclass
class PolicyState:
    """Sufficient statistics of one episode.

    ``t`` is the round about to be played (1-based), so ``sum(pulls) == t - 1``.
    """

    num_arms: int
    rho: float = 0.5
    t: int = 1
    pulls: List[int] = field(default_factory=list)
    reward_sums: List[float] = field(default_factory=list)
    accumulator: Optional[DenominatorAccumulator] = None

    def __post_init__(self) -> None:
        if self.num_arms < 1:
            raise ValueError("num_arms must be positive")
        if not self.pulls:
            self.pulls = [0] * self.num_arms
        if not self.reward_sums:
            self.reward_sums = [0.0] * self.num_arms
        if len(self.pulls) != self.num_arms or len(self.reward_sums) != self.num_arms:
            raise ValueError("pulls and reward_sums need one entry per arm")
        if self.accumulator is None:
            self.accumulator = DenominatorAccumulator(self.num_arms, self.rho, self.pulls)

    @classmethod
    def fresh(cls, num_arms: int, rho: float = 0.5) -> "PolicyState":
        return cls(num_arms=num_arms, rho=rho)

    def empirical_mean(self, arm: int) -> float:
        if self.pulls[arm] < 1:
            raise ValueError(f"arm {arm} has not been pulled yet")
        return self.reward_sums[arm] / self.pulls[arm]


def observe(state: PolicyState, arm: int, reward: float) -> PolicyState:
    """Record a reward for ``arm`` and advance the round counter (in place)."""
    if not 0 <= arm < state.num_arms:
        raise ValueError(f"arm {arm} out of range for {state.num_arms} arms")
    state.pulls[arm] += 1
    state.reward_sums[arm] += reward
    state.accumulator.increment(arm)
    state.t += 1
    return state


def ocucb_denominator(state: PolicyState, i: int, rho: Optional[float] = None) -> float:
    """``sum_j min(T_i, T_j**rho * T_i**(1-rho))`` for arm ``i``."""
    if rho is None or rho == state.accumulator.rho:
        return state.accumulator.query(i)
    return DenominatorAccumulator(state.num_arms, rho, state.pulls).query(i)


def confidence_level(t: float, denominator: float, drop_log_factors: bool = False) -> float:
    """``max{e, log t, t log t / denominator}``, or ``max{e, t / denominator}`` with the logs dropped."""
    if drop_log_factors:
        return max(math.e, t / denominator)
    log_t = math.log(t)
    return max(math.e, log_t, t * log_t / denominator)


def ocucb_B(state: PolicyState, i: int, params: IndexParams) -> float:
    return confidence_level(state.t, ocucb_denominator(state, i, params.rho), params.drop_log_factors)


def ocucb_index(state: PolicyState, i: int, params: IndexParams) -> float:
    level = ocucb_B(state, i, params)
    return state.empirical_mean(i) + math.sqrt(2.0 * params.eta * math.log(level) / state.pulls[i])


def klucb_plus_index(state: PolicyState, i: int, eta: float) -> float:
    pulls = state.pulls[i]
    # log(t / T_i) is clamped at 0 so the index is defined when T_i == t.
    log_ratio = max(0.0, math.log(state.t / pulls))
    return state.empirical_mean(i) + math.sqrt(2.0 * eta / pulls * log_ratio)


def ucb1_index(state: PolicyState, i: int, eta: float) -> float:
    return state.empirical_mean(i) + math.sqrt(2.0 * eta * math.log(state.t) / state.pulls[i])


def moss_index(state: PolicyState, i: int, eta: float) -> float:
    return ocucb_index(state, i, IndexParams(eta=eta, rho=0.0))


def policy_index(state: PolicyState, i: int, params: IndexParams, policy: PolicyKind) -> float:
    if policy is PolicyKind.OCUCB:
        return ocucb_index(state, i, params)
    if policy is PolicyKind.KLUCB_PLUS:
        return klucb_plus_index(state, i, params.eta)
    if policy is PolicyKind.UCB1:
        return ucb1_index(state, i, params.eta)
    if policy is PolicyKind.MOSS:
        return moss_index(state, i, params.eta)
    raise ValueError(f"unsupported policy: {policy!r}")


def select_arm(state: PolicyState, params: IndexParams, policy: Union[str, PolicyKind]) -> int:
    """Arm to play in round ``state.t``.

    Rounds ``t <= K`` play arm ``t - 1``; afterwards the argmax of the index,
    ties going to the lowest arm.
    """
    policy = PolicyKind.parse(policy)
    if state.t <= state.num_arms:
        return state.t - 1
    best_arm, best_value = 0, -math.inf
    for arm in range(state.num_arms):
        value = policy_index(state, arm, params, policy)
        if value > best_value:
            best_arm, best_value = arm, value
    return best_arm


def resolve_params(policy: PolicyKind, params: IndexParams) -> IndexParams:
    """MOSS is OCUCB-n pinned at rho = 0; warn when OCUCB-n leaves [1/2, 1]."""
    if policy is PolicyKind.MOSS:
        return replace(params, rho=0.0)
    if policy is PolicyKind.OCUCB and not params.within_theorem:
        warnings.warn(
            f"rho={params.rho} is outside [1/2, 1]; the finite-time regret bound does not apply",
            OutsideTheoremWarning,
            stacklevel=2,
        )
    return params
