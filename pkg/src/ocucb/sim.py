"""Seeded Monte Carlo episodes and pseudo-regret aggregation.

Episodes are simulated in batches: all replications in a chunk advance one
round together and every per-round quantity is a numpy array over
``(replication, arm)``. Each replication still owns its own random stream,
consumed one noise draw per round in fixed-size blocks, so a replication's
trajectory does not depend on which chunk or worker ran it. Chunks have a
fixed size, which makes results independent of the worker count.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .env import BanditInstance, NoiseKind, RngState, derive_stream, draw_noise
from .policies import IndexParams, PolicyKind, resolve_params

NOISE_BLOCK = 1024
CHUNK_SIZE = 250
# Above this arm count the denominator is evaluated by sorting instead of the
# O(K^2) broadcast.
SORTED_DENOMINATOR_MIN_ARMS = 48


class ConfigError(ValueError):
    """Invalid experiment configuration; ``field`` names the offending entry."""

    def __init__(self, field_name: str, message: str) -> None:
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


@dataclass
class RegretTrajectory:
    checkpoints: np.ndarray
    regret: np.ndarray
    seed: int
    stream: int
    actions: Optional[np.ndarray] = None


@dataclass
class SummaryStats:
    checkpoints: np.ndarray
    mean: np.ndarray
    stderr: np.ndarray
    replications: int
    samples: np.ndarray = field(repr=False)

    @classmethod
    def from_samples(cls, checkpoints: np.ndarray, samples: np.ndarray) -> "SummaryStats":
        samples = np.asarray(samples, dtype=np.float64)
        count = samples.shape[0]
        mean = samples.mean(axis=0)
        if count > 1:
            stderr = samples.std(axis=0, ddof=1) / math.sqrt(count)
        else:
            stderr = np.zeros_like(mean)
        return cls(np.asarray(checkpoints), mean, stderr, count, samples)


@dataclass(frozen=True)
class PolicySpec:
    name: str
    kind: PolicyKind
    params: IndexParams = IndexParams()


@dataclass(frozen=True)
class ExperimentConfig:
    """A Monte Carlo comparison: one instance, several policies, ``replications`` episodes each.

    The instance is given either by explicit ``means`` or by the template
    ``arms``/``gap`` (one arm at 0, the rest at ``-gap``).
    """

    horizon: int
    replications: int
    policies: Tuple[PolicySpec, ...]
    means: Optional[Tuple[float, ...]] = None
    arms: Optional[int] = None
    gap: Optional[float] = None
    noise: NoiseKind = NoiseKind.GAUSSIAN
    checkpoints: Optional[Tuple[int, ...]] = None
    seed: int = 0

    def instance(self) -> BanditInstance:
        if self.means is not None:
            return BanditInstance(self.means, self.noise)
        return BanditInstance.from_gap(self.arms, self.gap, self.noise)

    def checkpoint_array(self) -> np.ndarray:
        if self.checkpoints is None:
            return default_checkpoints(self.horizon)
        return np.asarray(self.checkpoints, dtype=np.int64)

    def validate(self) -> None:
        if self.means is not None:
            if self.arms is not None or self.gap is not None:
                raise ConfigError("means", "give either means or arms/gap, not both")
            if len(self.means) < 2:
                raise ConfigError("means", "need at least 2 arms")
            if not all(math.isfinite(m) for m in self.means):
                raise ConfigError("means", "all means must be finite")
        else:
            if self.arms is None or self.gap is None:
                raise ConfigError("means", "give explicit means or both arms and gap")
            if self.arms < 2:
                raise ConfigError("arms", "need at least 2 arms")
            if not (math.isfinite(self.gap) and self.gap >= 0):
                raise ConfigError("gap", "gap must be a finite nonnegative number")
        num_arms = len(self.means) if self.means is not None else self.arms
        if self.horizon < num_arms:
            raise ConfigError("horizon", f"horizon {self.horizon} is below the arm count {num_arms}")
        if self.replications < 1:
            raise ConfigError("replications", "need at least one replication")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed", "seed must be an unsigned 64-bit integer")
        if self.checkpoints is not None:
            cps = list(self.checkpoints)
            if not cps:
                raise ConfigError("checkpoints", "empty checkpoint list")
            if any(b <= a for a, b in zip(cps, cps[1:])):
                raise ConfigError("checkpoints", "checkpoints must be strictly increasing")
            if cps[0] < 1 or cps[-1] > self.horizon:
                raise ConfigError("checkpoints", f"checkpoints must lie in [1, {self.horizon}]")
        if not self.policies:
            raise ConfigError("policies", "no policies configured")
        names = [p.name for p in self.policies]
        if len(set(names)) != len(names):
            raise ConfigError("policies", "policy names must be unique")


def default_checkpoints(horizon: int) -> np.ndarray:
    """Geometric grid ``ceil(n**(k/20))`` for k = 0..20, plus ``n``."""
    points = {min(horizon, math.ceil(horizon ** (k / 20))) for k in range(21)}
    points.add(horizon)
    return np.array(sorted(points), dtype=np.int64)


def replication_rng(seed: int, policy_name: str, replication: int) -> RngState:
    return RngState(seed, derive_stream(policy_name, replication))


def _denominators(pulls: np.ndarray, rho: float) -> np.ndarray:
    """Row-wise ``T_i**(1-rho) * sum_j min(T_i**rho, T_j**rho)`` for a (R, K) count matrix."""
    powers = pulls**rho
    num_arms = pulls.shape[1]
    if num_arms < SORTED_DENOMINATOR_MIN_ARMS:
        inner = np.minimum(powers[:, :, None], powers[:, None, :]).sum(axis=2)
    else:
        order = np.argsort(pulls, axis=1, kind="stable")
        sorted_counts = np.take_along_axis(pulls, order, axis=1)
        sorted_powers = np.take_along_axis(powers, order, axis=1)
        prefix = np.concatenate(
            [np.zeros((pulls.shape[0], 1)), np.cumsum(sorted_powers, axis=1)], axis=1
        )
        positions = np.broadcast_to(np.arange(num_arms), pulls.shape)
        starts = np.zeros(pulls.shape, dtype=np.int64)
        starts[:, 1:] = np.where(sorted_counts[:, 1:] != sorted_counts[:, :-1], positions[:, 1:], 0)
        first = np.maximum.accumulate(starts, axis=1)
        inner_sorted = np.take_along_axis(prefix, first, axis=1) + sorted_powers * (num_arms - first)
        inner = np.empty_like(inner_sorted)
        np.put_along_axis(inner, order, inner_sorted, axis=1)
    return pulls ** (1.0 - rho) * inner


def batch_indices(
    kind: PolicyKind, params: IndexParams, pulls: np.ndarray, sums: np.ndarray, t: int
) -> np.ndarray:
    """Index of every arm in every episode at round ``t`` (all pulls >= 1)."""
    means = sums / pulls
    if kind is PolicyKind.OCUCB or kind is PolicyKind.MOSS:
        rho = 0.0 if kind is PolicyKind.MOSS else params.rho
        den = _denominators(pulls, rho)
        if params.drop_log_factors:
            level = np.maximum(math.e, t / den)
        else:
            log_t = math.log(t)
            level = np.maximum(max(math.e, log_t), t * log_t / den)
        return means + np.sqrt(2.0 * params.eta * np.log(level) / pulls)
    if kind is PolicyKind.KLUCB_PLUS:
        log_ratio = np.maximum(0.0, np.log(t / pulls))
        return means + np.sqrt(2.0 * params.eta / pulls * log_ratio)
    if kind is PolicyKind.UCB1:
        return means + np.sqrt(2.0 * params.eta * math.log(t) / pulls)
    raise ValueError(f"unsupported policy: {kind!r}")


def simulate_batch(
    kind: PolicyKind,
    params: IndexParams,
    instance: BanditInstance,
    horizon: int,
    rngs: Sequence[RngState],
    checkpoints: np.ndarray,
    record_actions: bool = False,
) -> Tuple[np.ndarray, Optional[np.ndarray]]:
    """Run ``len(rngs)`` episodes in lockstep.

    Returns the (R, C) pseudo-regret at each checkpoint and, optionally, the
    (R, n) action matrix.
    """
    kind = PolicyKind.parse(kind)
    if kind is PolicyKind.MOSS:
        params = IndexParams(eta=params.eta, rho=0.0, drop_log_factors=params.drop_log_factors)
    means = instance.mean_array
    gaps = instance.gap_array
    num_arms = instance.num_arms
    if horizon < num_arms:
        raise ValueError("horizon must be at least the number of arms")
    reps = len(rngs)
    rows = np.arange(reps)
    pulls = np.zeros((reps, num_arms))
    sums = np.zeros((reps, num_arms))
    regret = np.zeros(reps)
    checkpoints = np.asarray(checkpoints, dtype=np.int64)
    out = np.empty((reps, len(checkpoints)))
    actions = np.empty((reps, horizon), dtype=np.int64) if record_actions else None
    noise = np.empty((reps, NOISE_BLOCK))
    next_cp = 0
    for t in range(1, horizon + 1):
        slot = (t - 1) % NOISE_BLOCK
        if slot == 0:
            for r, rng in enumerate(rngs):
                noise[r] = draw_noise(rng.generator, instance.noise, NOISE_BLOCK)
        if t <= num_arms:
            arms = np.full(reps, t - 1, dtype=np.int64)
        else:
            arms = batch_indices(kind, params, pulls, sums, t).argmax(axis=1)
        pulls[rows, arms] += 1.0
        sums[rows, arms] += means[arms] + noise[:, slot]
        regret += gaps[arms]
        if record_actions:
            actions[:, t - 1] = arms
        while next_cp < len(checkpoints) and checkpoints[next_cp] == t:
            out[:, next_cp] = regret
            next_cp += 1
    return out, actions


def run_episode(
    policy,
    params: IndexParams,
    instance: BanditInstance,
    n: int,
    rng: RngState,
    checkpoints: Optional[Sequence[int]] = None,
    record_actions: bool = False,
) -> RegretTrajectory:
    """Play one episode of ``n`` rounds and return its pseudo-regret trajectory."""
    kind = PolicyKind.parse(policy)
    params = resolve_params(kind, params)
    cps = default_checkpoints(n) if checkpoints is None else np.asarray(checkpoints, dtype=np.int64)
    regret, actions = simulate_batch(kind, params, instance, n, [rng], cps, record_actions)
    return RegretTrajectory(
        cps, regret[0], rng.seed, rng.stream, None if actions is None else actions[0]
    )


def _run_chunk(args) -> np.ndarray:
    kind, params, instance, horizon, seed, name, start, stop, cps = args
    rngs = [replication_rng(seed, name, r) for r in range(start, stop)]
    regret, _ = simulate_batch(kind, params, instance, horizon, rngs, cps)
    return regret


def worker_count(requested: Optional[int] = None) -> int:
    if requested is not None:
        return max(1, int(requested))
    env = os.environ.get("OCUCB_THREADS")
    return max(1, int(env)) if env else 1


def run_experiment(
    config: ExperimentConfig, workers: Optional[int] = None
) -> Dict[str, SummaryStats]:
    """Run every configured policy for ``config.replications`` seeded episodes.

    Replication ``r`` of policy ``p`` draws from stream ``hash(p, r)`` under the
    master seed. Chunks of ``CHUNK_SIZE`` replications may run in parallel
    processes; results are reassembled in replication order, so output is
    identical for any worker count.
    """
    config.validate()
    instance = config.instance()
    cps = config.checkpoint_array()
    n_workers = worker_count(workers)
    tasks: List[tuple] = []
    owners: List[str] = []
    for spec in config.policies:
        params = resolve_params(spec.kind, spec.params)
        for start in range(0, config.replications, CHUNK_SIZE):
            stop = min(config.replications, start + CHUNK_SIZE)
            tasks.append((spec.kind, params, instance, config.horizon, config.seed, spec.name, start, stop, cps))
            owners.append(spec.name)
    if n_workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            chunks = list(pool.map(_run_chunk, tasks))
    else:
        chunks = [_run_chunk(task) for task in tasks]
    results: Dict[str, SummaryStats] = {}
    for spec in config.policies:
        parts = [c for c, owner in zip(chunks, owners) if owner == spec.name]
        results[spec.name] = SummaryStats.from_samples(cps, np.concatenate(parts, axis=0))
    return results
