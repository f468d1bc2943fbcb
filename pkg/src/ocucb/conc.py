"""Monte Carlo checks of the concentration inequalities behind the regret analysis.

Each check simulates random walks ``S_n = X_1 + ... + X_n`` of i.i.d.
zero-mean 1-subgaussian steps, estimates the probability or moment that an
inequality controls, and compares it with the closed-form envelope.

Events over an infinite horizon are handled by truncation plus a drift
certificate: a walk simulated to length ``N`` is accepted once its empirical
mean sits at least ``CERTIFICATE_SDS`` standard deviations (``1/sqrt(N)``)
inside the safe region. Uncertified walks are extended (doubling their length)
rather than redrawn, which keeps the estimates unbiased; the fraction that
needed extending is reported.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from .env import NoiseKind, RngState, derive_stream, draw_noise

CERTIFICATE_SDS = 6.0
MAX_DOUBLINGS = 8
BISECTION_TOL = 1e-12


@dataclass(frozen=True)
class WalkConfig:
    """Monte Carlo settings shared by the checks.

    ``horizon`` is the walk length for finite-horizon events and a minimum
    truncation length for the infinite-horizon ones.
    """

    walks: int = 10_000
    horizon: int = 1_000
    noise: NoiseKind = NoiseKind.GAUSSIAN
    seed: int = 0
    chunk_elements: int = 2_000_000

    def __post_init__(self) -> None:
        if self.walks < 1 or self.horizon < 1:
            raise ValueError("walks and horizon must be positive")
        object.__setattr__(self, "noise", NoiseKind.parse(self.noise))


@dataclass
class BoundCheck:
    """An empirical estimate against an analytic bound.

    With ``sense == "le"`` the check passes when
    ``estimate <= bound + slack * stderr``; ``"ge"`` mirrors it.
    """

    name: str
    estimate: float
    bound: float
    stderr: float
    sense: str = "le"
    slack: float = 4.0
    details: Dict[str, float] = field(default_factory=dict)

    @property
    def verdict(self) -> bool:
        if self.sense == "le":
            return self.estimate <= self.bound + self.slack * self.stderr
        return self.estimate >= self.bound - self.slack * self.stderr


def _chunks(cfg: WalkConfig, length: int, label: str) -> Iterator[Tuple[int, np.ndarray]]:
    """Yield ``(chunk_index, steps)`` blocks covering ``cfg.walks`` walks of ``length`` steps."""
    per_chunk = max(1, cfg.chunk_elements // length)
    for index, start in enumerate(range(0, cfg.walks, per_chunk)):
        rows = min(per_chunk, cfg.walks - start)
        rng = RngState(cfg.seed, derive_stream(label, index))
        yield index, draw_noise(rng.generator, cfg.noise, (rows, length))


def _proportion_stderr(p: float, m: int) -> float:
    return math.sqrt(max(p * (1.0 - p), 0.0) / m)


# -- maximal inequality ---------------------------------------------------------


def maximal_bound(n: int, epsilon: float) -> float:
    return math.exp(-(epsilon**2) / (2.0 * n))


def check_maximal_grid(n: int, epsilons: Sequence[float], cfg: WalkConfig) -> List[BoundCheck]:
    """``P{exists t <= n: S_t >= eps} <= exp(-eps^2 / 2n)`` for several eps on shared walks."""
    eps = np.asarray(epsilons, dtype=np.float64)
    if np.any(eps <= 0):
        raise ValueError("epsilon must be positive")
    hits = np.zeros(len(eps), dtype=np.int64)
    for _, steps in _chunks(cfg, n, f"maximal/{n}"):
        np.cumsum(steps, axis=1, out=steps)
        peak = steps.max(axis=1)
        hits += (peak[:, None] >= eps[None, :]).sum(axis=0)
    checks = []
    for e, h in zip(eps, hits):
        p = h / cfg.walks
        checks.append(
            BoundCheck(
                f"maximal n={n} eps={e:.6g} noise={cfg.noise.value}",
                float(p),
                maximal_bound(n, float(e)),
                _proportion_stderr(p, cfg.walks),
                details={"n": n, "epsilon": float(e)},
            )
        )
    return checks


def check_maximal(n: int, epsilon: float, cfg: WalkConfig) -> BoundCheck:
    return check_maximal_grid(n, [epsilon], cfg)[0]


# -- iterated-logarithm boundary ------------------------------------------------


def lil_boundary(n, eta: float):
    """``sqrt(2 eta n log max{e, log n})``."""
    n = np.asarray(n, dtype=np.float64)
    inner = np.maximum(math.e, np.log(n))
    out = np.sqrt(2.0 * eta * n * np.log(inner))
    return float(out) if out.ndim == 0 else out


def lil_survival(etas: Sequence[float], cfg: WalkConfig) -> Dict[float, Tuple[float, float]]:
    """Fraction of walks with ``S_n <= lil_boundary(n, eta)`` for all ``n <= cfg.horizon``.

    All etas are evaluated on the same walks: a walk survives at ``eta`` iff
    ``max_n max(S_n, 0)^2 / (2 n log max{e, log n}) <= eta``.
    Returns ``eta -> (estimate, stderr)``.
    """
    etas = [float(e) for e in etas]
    if any(e <= 1.0 for e in etas):
        raise ValueError("eta must exceed 1")
    n = np.arange(1, cfg.horizon + 1, dtype=np.float64)
    scale = 1.0 / (2.0 * n * np.log(np.maximum(math.e, np.log(n))))
    worst_parts = []
    for _, steps in _chunks(cfg, cfg.horizon, "lil"):
        np.cumsum(steps, axis=1, out=steps)
        np.maximum(steps, 0.0, out=steps)
        steps *= steps
        steps *= scale
        worst_parts.append(steps.max(axis=1))
    worst = np.concatenate(worst_parts)
    out = {}
    for eta in etas:
        p = float(np.mean(worst <= eta))
        out[eta] = (p, _proportion_stderr(p, cfg.walks))
    return out


def estimate_lil_survival(eta: float, cfg: WalkConfig, floor: float = 0.01) -> BoundCheck:
    p, se = lil_survival([eta], cfg)[eta]
    return BoundCheck(f"lil survival eta={eta:g}", p, floor, se, sense="ge", details={"eta": eta})


def check_lil(etas: Sequence[float], cfg: WalkConfig, floor: float = 0.01) -> List[BoundCheck]:
    """Survival floor at every eta, plus non-decrease between consecutive etas."""
    etas = sorted(float(e) for e in etas)
    survival = lil_survival(etas, cfg)
    checks = [
        BoundCheck(f"lil survival eta={e:g}", survival[e][0], floor, survival[e][1], sense="ge", details={"eta": e})
        for e in etas
    ]
    for lo, hi in zip(etas, etas[1:]):
        (p_lo, se_lo), (p_hi, se_hi) = survival[lo], survival[hi]
        checks.append(
            BoundCheck(
                f"lil monotone eta={lo:g}->{hi:g}",
                p_lo - p_hi,
                0.0,
                math.hypot(se_lo, se_hi),
                details={"eta_low": lo, "eta_high": hi},
            )
        )
    return checks


# -- last exit time of a shrinking confidence tube --------------------------------


def log_plus(x: float) -> float:
    return max(1.0, math.log(x))


@dataclass
class TauEstimate:
    taus: np.ndarray
    extension_rate: float

    @property
    def mean(self) -> float:
        return float(self.taus.mean())

    @property
    def rms(self) -> float:
        return float(math.sqrt(np.mean(self.taus**2)))

    @property
    def rms_stderr(self) -> float:
        sq = self.taus**2
        if len(sq) < 2:
            return 0.0
        se_sq = float(sq.std(ddof=1)) / math.sqrt(len(sq))
        return se_sq / (2.0 * self.rms)


def tau_envelope(delta: float, b: float) -> float:
    """Shape ``1 + log_+(b) / Delta^2`` of the bound on the tube exit time."""
    return 1.0 + log_plus(b) / delta**2


def tau_samples(delta: float, b: float, eta: float, cfg: WalkConfig) -> TauEstimate:
    """Samples of ``tau = min{n : sup_{t >= n} mu_t + sqrt(2 eta log(b) / t) < Delta}``."""
    if not (b > 1 and delta > 0 and eta > 1):
        raise ValueError("need b > 1, Delta > 0 and eta > 1")
    radius_sq = 2.0 * eta * math.log(b)
    t0 = math.ceil(8.0 * eta * log_plus(b) / delta**2)
    length = max(cfg.horizon, 8 * t0)
    label = f"tau/{delta!r}/{b!r}/{eta!r}"
    taus = []
    extended = 0
    for index, steps in _chunks(cfg, length, label):
        sums = np.cumsum(steps, axis=1)
        t = np.arange(1, length + 1, dtype=np.float64)
        inside = sums / t + np.sqrt(radius_sq / t) >= delta
        last = np.where(inside.any(axis=1), length - np.argmax(inside[:, ::-1], axis=1), 0)
        current = sums[:, -1].copy()
        pending = _uncertified_upper(current, length, delta, radius_sq)
        ext_rng = RngState(cfg.seed, derive_stream(label, "extend", index))
        span, total = length, length
        rounds = 0
        extended += int(pending.sum())
        while pending.any():
            if rounds == MAX_DOUBLINGS:
                raise RuntimeError(
                    f"tube exit time not certified after {total} steps for {int(pending.sum())} walks; "
                    "increase the truncation horizon"
                )
            idx = np.flatnonzero(pending)
            more = np.cumsum(draw_noise(ext_rng.generator, cfg.noise, (len(idx), span)), axis=1)
            more += current[idx, None]
            tt = np.arange(total + 1, total + span + 1, dtype=np.float64)
            hit = more / tt + np.sqrt(radius_sq / tt) >= delta
            has = hit.any(axis=1)
            last_new = total + span - np.argmax(hit[:, ::-1], axis=1)
            last[idx[has]] = last_new[has]
            current[idx] = more[:, -1]
            total += span
            span *= 2
            rounds += 1
            pending[idx] = _uncertified_upper(current[idx], total, delta, radius_sq)
        taus.append(last + 1)
    return TauEstimate(np.concatenate(taus).astype(np.float64), extended / cfg.walks)


def _uncertified_upper(sums: np.ndarray, n: int, delta: float, radius_sq: float) -> np.ndarray:
    margin = delta - math.sqrt(radius_sq / n) - sums / n
    return margin < CERTIFICATE_SDS / math.sqrt(n)


def estimate_tau_moments(
    delta: float, b: float, eta: float, cfg: WalkConfig, c_fit: Optional[float] = None
) -> BoundCheck:
    """Compare ``sqrt(E[tau^2])`` with ``c_fit * (1 + log_+(b) / Delta^2)``.

    Without ``c_fit`` the bound is the bare shape (constant 1). The details
    carry both moments and whether ``E[tau] <= sqrt(E[tau^2])`` held.
    """
    est = tau_samples(delta, b, eta, cfg)
    shape = tau_envelope(delta, b)
    constant = 1.0 if c_fit is None else c_fit
    return BoundCheck(
        f"tau moments Delta={delta:g} log(b)={math.log(b):g}",
        est.rms,
        constant * shape,
        est.rms_stderr,
        details={
            "delta": delta,
            "b": b,
            "mean_tau": est.mean,
            "rms_tau": est.rms,
            "jensen": float(est.mean <= est.rms),
            "shape": shape,
            "extension_rate": est.extension_rate,
        },
    )


# -- optimism deficit alpha and its inverse beta ----------------------------------


def _log_denominator(s: np.ndarray, rho: float, lambdas: Sequence[float]) -> np.ndarray:
    """``log sum_i min{s, lambda_i^rho s^(1-rho)}``; an infinite lambda contributes ``s``."""
    total = np.zeros_like(s)
    for lam in lambdas:
        lam = float(lam)
        if lam < 1:
            raise ValueError("lambda entries must lie in [1, inf]")
        if math.isinf(lam):
            total += s
        else:
            total += np.minimum(s, lam**rho * s ** (1.0 - rho))
    return np.log(total)


def log_alpha_from_sums(
    sums: np.ndarray, delta: float, rho: float, lambdas: Sequence[float], eta: float, start: int = 1
) -> np.ndarray:
    """Row-wise ``log alpha`` from partial sums ``S_s`` at ``s = start, start+1, ...``.

    ``alpha`` is the smallest value making every
    ``mu_s + sqrt((2 eta / s) log max{1, alpha / D(s)}) >= -Delta`` true,
    i.e. the max over ``s`` with ``mu_s < -Delta`` of
    ``D(s) exp(s (Delta + mu_s)^2 / (2 eta))``. ``-inf`` encodes ``alpha = 0``.
    """
    sums = np.atleast_2d(sums)
    s = np.arange(start, start + sums.shape[1], dtype=np.float64)
    log_den = _log_denominator(s, rho, lambdas)
    gap = sums / s + delta
    exponent = np.where(gap < 0, log_den + s * gap * gap / (2.0 * eta), -np.inf)
    return exponent.max(axis=1)


def alpha_from_means(
    empirical_means: Sequence[float], delta: float, rho: float, lambdas: Sequence[float], eta: float
) -> float:
    """``alpha`` for one fixed sequence ``mu_1, mu_2, ...`` of empirical means."""
    mu = np.asarray(empirical_means, dtype=np.float64)
    sums = mu * np.arange(1, len(mu) + 1)
    return float(np.exp(log_alpha_from_sums(sums, delta, rho, lambdas, eta)[0]))


def solve_beta(alpha):
    """Smallest ``beta >= 0`` with ``beta log beta = alpha``.

    ``alpha = 0`` gives 0. For ``alpha > 0`` the root is unique and lies in
    ``[1, max(e, alpha)]``; it is found by bisection to ``BISECTION_TOL``.
    """
    a = np.asarray(alpha, dtype=np.float64)
    if np.any(a < 0):
        raise ValueError("alpha must be nonnegative")
    flat = a.ravel()
    lo = np.ones_like(flat)
    hi = np.maximum(math.e, flat)
    active = flat > 0
    while True:
        mid = 0.5 * (lo + hi)
        open_ = active & (hi - lo > BISECTION_TOL) & (mid > lo) & (mid < hi)
        if not open_.any():
            break
        with np.errstate(invalid="ignore"):
            above = mid * np.log(mid) >= flat
        hi = np.where(open_ & above, mid, hi)
        lo = np.where(open_ & ~above, mid, lo)
    beta = np.where(active, 0.5 * (lo + hi), 0.0)
    beta = np.where(np.isinf(flat), np.inf, beta)
    beta = beta.reshape(a.shape)
    return float(beta) if beta.ndim == 0 else beta


def alpha_envelope(delta: float, lambdas: Sequence[float]) -> float:
    """``sum_i min{1/Delta, sqrt(lambda_i)}``."""
    return float(sum(min(1.0 / delta, math.sqrt(float(lam))) for lam in lambdas))


@dataclass
class AlphaBetaEstimate:
    alphas: np.ndarray
    betas: np.ndarray
    extension_rate: float


def alpha_beta_samples(
    delta: float,
    configs: Sequence[Tuple[float, Sequence[float]]],
    eta: float,
    cfg: WalkConfig,
) -> List[AlphaBetaEstimate]:
    """Samples of ``(alpha, beta)`` for several ``(rho, lambdas)`` on shared walks."""
    if not (delta > 0 and eta > 1):
        raise ValueError("need Delta > 0 and eta > 1")
    length = max(cfg.horizon, math.ceil(64.0 / delta**2))
    label = f"alpha/{delta!r}/{eta!r}"
    log_alphas: List[List[np.ndarray]] = [[] for _ in configs]
    extended = 0
    for index, steps in _chunks(cfg, length, label):
        sums = np.cumsum(steps, axis=1)
        best = [log_alpha_from_sums(sums, delta, rho, lams, eta) for rho, lams in configs]
        current = sums[:, -1].copy()
        total, span = length, length
        pending = current / total + delta < CERTIFICATE_SDS / math.sqrt(total)
        extended += int(pending.sum())
        ext_rng = RngState(cfg.seed, derive_stream(label, "extend", index))
        rounds = 0
        while pending.any():
            if rounds == MAX_DOUBLINGS:
                raise RuntimeError(
                    f"alpha not certified after {total} steps for {int(pending.sum())} walks; "
                    "increase the truncation horizon"
                )
            idx = np.flatnonzero(pending)
            more = np.cumsum(draw_noise(ext_rng.generator, cfg.noise, (len(idx), span)), axis=1)
            more += current[idx, None]
            for k, (rho, lams) in enumerate(configs):
                extra = log_alpha_from_sums(more, delta, rho, lams, eta, start=total + 1)
                best[k][idx] = np.maximum(best[k][idx], extra)
            current[idx] = more[:, -1]
            total += span
            span *= 2
            rounds += 1
            pending[idx] = current[idx] / total + delta < CERTIFICATE_SDS / math.sqrt(total)
        for k in range(len(configs)):
            log_alphas[k].append(best[k])
    out = []
    for k in range(len(configs)):
        alphas = np.exp(np.concatenate(log_alphas[k]))
        out.append(AlphaBetaEstimate(alphas, solve_beta(alphas), extended / cfg.walks))
    return out


def alpha_beta_checks(
    delta: float,
    rho: float,
    lambdas: Sequence[float],
    est: AlphaBetaEstimate,
    c_alpha: Optional[float] = None,
    c_beta: Optional[float] = None,
) -> List[BoundCheck]:
    """Checks ``Delta E[alpha] <= C sum_i min{1/Delta, sqrt(lambda_i)} / (2 rho - 1)`` (rho > 1/2)
    and ``Delta E[beta] <= C' sum_i min{1/Delta, sqrt(lambda_i)}`` (rho >= 1/2)."""
    envelope = alpha_envelope(delta, lambdas)
    m = len(est.alphas)
    tag = f"Delta={delta:g} rho={rho:g} lambdas={_lambda_label(lambdas)}"
    details = {"delta": delta, "rho": rho, "envelope": envelope, "extension_rate": est.extension_rate}
    checks = []
    if rho > 0.5:
        shape = envelope / (2.0 * rho - 1.0)
        checks.append(
            BoundCheck(
                f"alpha {tag}",
                delta * float(est.alphas.mean()),
                (1.0 if c_alpha is None else c_alpha) * shape,
                delta * float(est.alphas.std(ddof=1)) / math.sqrt(m) if m > 1 else 0.0,
                details={**details, "shape": shape},
            )
        )
    if rho >= 0.5:
        checks.append(
            BoundCheck(
                f"beta {tag}",
                delta * float(est.betas.mean()),
                (1.0 if c_beta is None else c_beta) * envelope,
                delta * float(est.betas.std(ddof=1)) / math.sqrt(m) if m > 1 else 0.0,
                details={**details, "shape": envelope},
            )
        )
    return checks


def estimate_alpha_beta(
    delta: float,
    rho: float,
    lambdas: Sequence[float],
    eta: float,
    cfg: WalkConfig,
    c_alpha: Optional[float] = None,
    c_beta: Optional[float] = None,
) -> List[BoundCheck]:
    est = alpha_beta_samples(delta, [(rho, lambdas)], eta, cfg)[0]
    return alpha_beta_checks(delta, rho, lambdas, est, c_alpha, c_beta)


def _lambda_label(lambdas: Sequence[float]) -> str:
    return "[" + ",".join("inf" if math.isinf(float(x)) else f"{float(x):g}" for x in lambdas) + "]"


def calibrate(check: BoundCheck, headroom: float) -> float:
    """Constant that makes the check's envelope ``headroom`` times its estimate."""
    shape = check.details.get("shape", check.bound)
    return headroom * check.estimate / shape
