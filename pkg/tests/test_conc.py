import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import lambertw

from ocucb import conc
from ocucb.conc import (
    BoundCheck,
    WalkConfig,
    alpha_envelope,
    alpha_from_means,
    check_lil,
    check_maximal,
    check_maximal_grid,
    estimate_alpha_beta,
    estimate_lil_survival,
    estimate_tau_moments,
    lil_boundary,
    maximal_bound,
    solve_beta,
    tau_samples,
)
from ocucb.env import NoiseKind


def test_maximal_bound_values():
    assert maximal_bound(50, 10) == pytest.approx(math.exp(-1))
    assert maximal_bound(50, 10) == pytest.approx(0.36788, abs=1e-5)
    assert maximal_bound(100, 30) == pytest.approx(0.01111, abs=1e-5)
    assert maximal_bound(100, 1e-9) == pytest.approx(1.0)


def test_maximal_empirical_n50():
    check = check_maximal(50, 10.0, WalkConfig(walks=100_000, horizon=50, seed=1))
    assert 0.0 <= check.estimate <= 1.0
    assert check.verdict


def test_maximal_tiny_epsilon_is_vacuous():
    check = check_maximal(100, 1e-6, WalkConfig(walks=500, horizon=100))
    assert check.bound == pytest.approx(1.0)
    assert check.verdict


@pytest.mark.parametrize("noise", list(NoiseKind))
def test_maximal_grid_small(noise):
    n = 200
    checks = check_maximal_grid(n, [0.5 * math.sqrt(n), math.sqrt(n), 2 * math.sqrt(n)], WalkConfig(walks=5000, horizon=n, noise=noise))
    assert [c.verdict for c in checks] == [True] * 3
    assert checks[0].estimate >= checks[1].estimate >= checks[2].estimate


def test_maximal_rejects_nonpositive_epsilon():
    with pytest.raises(ValueError):
        check_maximal(10, 0.0, WalkConfig(walks=10, horizon=10))


def test_lil_boundary_at_one():
    assert lil_boundary(1, 2.0) == pytest.approx(2.0)
    assert lil_boundary(1, 3.0) == pytest.approx(math.sqrt(6.0))
    n = 10**6
    assert lil_boundary(n, 2.0) == pytest.approx(math.sqrt(4 * n * math.log(math.log(n))))


def test_lil_survival_high_eta():
    check = estimate_lil_survival(10.0, WalkConfig(walks=2000, horizon=10_000, seed=3), floor=0.5)
    assert check.estimate >= 0.5
    assert check.verdict


def test_lil_monotone_in_eta():
    checks = check_lil([1.5, 4.0], WalkConfig(walks=2000, horizon=2000, seed=4))
    by_name = {c.name: c for c in checks}
    mono = by_name["lil monotone eta=1.5->4"]
    assert mono.verdict
    assert by_name["lil survival eta=4"].estimate >= by_name["lil survival eta=1.5"].estimate - 4 * mono.stderr


def test_lil_rejects_small_eta():
    with pytest.raises(ValueError):
        check_lil([1.0], WalkConfig(walks=10, horizon=10))


def test_tau_jensen_and_certified():
    est = tau_samples(1.0, math.e, 2.0, WalkConfig(walks=2000, horizon=1, seed=2))
    assert est.mean <= est.rms
    assert np.all(est.taus >= 1)
    assert est.extension_rate < 0.05


def test_tau_scaling_in_delta():
    cfg = WalkConfig(walks=4000, horizon=1, seed=7)
    wide = estimate_tau_moments(1.0, math.e, 2.0, cfg)
    narrow = estimate_tau_moments(0.5, math.e, 2.0, cfg)
    ratio = narrow.details["mean_tau"] / wide.details["mean_tau"]
    assert abs(ratio - 4.0) <= 0.25 * 4.0


def test_tau_grows_slower_than_envelope_in_b():
    cfg = WalkConfig(walks=2000, horizon=1, seed=9)
    pilot = estimate_tau_moments(1.0, math.e**2, 2.0, cfg)
    c_fit = conc.calibrate(pilot, 2.0)
    for b in (math.e**2, 2 * math.e**2, 4 * math.e**2):
        check = estimate_tau_moments(1.0, b, 2.0, cfg, c_fit=c_fit)
        assert check.verdict
        assert check.details["mean_tau"] <= check.bound


def test_tau_uncertified_raises(monkeypatch):
    monkeypatch.setattr(conc, "MAX_DOUBLINGS", 0)
    with pytest.raises(RuntimeError, match="increase the truncation horizon"):
        tau_samples(1.0, math.e, 2.0, WalkConfig(walks=20_000, horizon=1))


def test_tau_input_validation():
    with pytest.raises(ValueError):
        tau_samples(1.0, 1.0, 2.0, WalkConfig(walks=10, horizon=10))


# -- alpha / beta -------------------------------------------------------------


def test_alpha_zero_without_violation():
    means = np.full(50, 0.2)
    assert alpha_from_means(means, 1.0, 0.75, [math.inf, 1.0], 2.0) == 0.0
    assert solve_beta(0.0) == 0.0


def test_beta_at_e():
    assert solve_beta(math.e) == pytest.approx(math.e, rel=1e-12)


def test_single_infinite_lambda_envelope():
    for delta in (0.25, 0.5, 1.0, 2.0):
        assert alpha_envelope(delta, [math.inf]) / delta == pytest.approx(delta**-2)


def alpha_predicate(means, delta, rho, lambdas, eta, alpha):
    """True when every s satisfies the optimism condition at this alpha."""
    for s, mu in enumerate(means, start=1):
        den = sum(s if math.isinf(lam) else min(s, lam**rho * s ** (1 - rho)) for lam in lambdas)
        radius = math.sqrt(2 * eta / s * math.log(max(1.0, alpha / den))) if alpha > 0 else 0.0
        if mu + radius < -delta:
            return False
    return True


def brute_force_alpha(means, delta, rho, lambdas, eta):
    if alpha_predicate(means, delta, rho, lambdas, eta, 0.0):
        return 0.0
    grid = np.geomspace(1e-3, 1e12, 4001)
    ok = [alpha_predicate(means, delta, rho, lambdas, eta, a) for a in grid]
    k = ok.index(True)
    lo, hi = grid[k - 1], grid[k]
    while hi / lo - 1 > 1e-9:
        mid = math.sqrt(lo * hi)
        if alpha_predicate(means, delta, rho, lambdas, eta, mid):
            hi = mid
        else:
            lo = mid
    return hi


@pytest.mark.parametrize(
    "means, rho, lambdas",
    [
        ([-1.5, -0.9, -0.4, -1.2, 0.1, -0.2], 1.0, [math.inf]),
        ([-2.0, -1.8, -1.1, -0.3, -0.6, -1.05, 0.0], 0.75, [1.0, 4.0, math.inf]),
        ([-0.5, -3.0, -1.0, -1.0, -0.2], 0.5, [1.0, 1.0, 1.0, 1.0]),
        ([-1.3, -1.3, -1.3, -1.3], 0.0, [2.0, math.inf]),
    ],
)
def test_alpha_matches_dense_scan(means, rho, lambdas):
    exact = alpha_from_means(means, 1.0, rho, lambdas, 2.0)
    assert exact > 0
    assert exact == pytest.approx(brute_force_alpha(means, 1.0, rho, lambdas, 2.0), rel=1e-6)


@settings(max_examples=200, deadline=None)
@given(st.floats(1e-6, 1e12))
def test_beta_matches_lambert_w(alpha):
    beta = solve_beta(alpha)
    oracle = alpha / lambertw(alpha).real
    if alpha >= math.e:
        assert beta * math.log(beta) == pytest.approx(alpha, rel=1e-9)
        assert beta == pytest.approx(oracle, rel=1e-9)
    else:
        assert 1.0 <= beta <= math.e
        assert beta == pytest.approx(oracle, rel=1e-9, abs=1e-11)


def test_solve_beta_vectorized():
    alphas = np.array([0.0, 0.5, math.e, 100.0, np.inf])
    betas = solve_beta(alphas)
    assert betas[0] == 0.0 and betas[-1] == np.inf
    assert betas[2] == pytest.approx(math.e)
    with pytest.raises(ValueError):
        solve_beta(-1.0)


def test_alpha_beta_checks_by_rho():
    cfg = WalkConfig(walks=1000, horizon=1, seed=5)
    assert [c.name.split()[0] for c in estimate_alpha_beta(1.0, 1.0, [math.inf] * 2, 3.0, cfg)] == ["alpha", "beta"]
    assert [c.name.split()[0] for c in estimate_alpha_beta(1.0, 0.5, [math.inf] * 2, 3.0, cfg)] == ["beta"]
    assert estimate_alpha_beta(1.0, 0.25, [math.inf] * 2, 3.0, cfg) == []


def test_lambda_validation():
    with pytest.raises(ValueError):
        alpha_from_means([-2.0], 1.0, 0.5, [0.5], 2.0)


def test_checks_are_deterministic():
    cfg = WalkConfig(walks=500, horizon=1, seed=11)
    a = estimate_alpha_beta(1.0, 0.75, [1.0, math.inf], 3.0, cfg)
    b = estimate_alpha_beta(1.0, 0.75, [1.0, math.inf], 3.0, cfg)
    assert [(c.estimate, c.stderr) for c in a] == [(c.estimate, c.stderr) for c in b]


# -- BoundCheck ---------------------------------------------------------------


@settings(max_examples=200, deadline=None)
@given(st.floats(0, 1), st.floats(0, 2), st.floats(0, 0.1))
def test_boundcheck_verdict_rule(estimate, bound, stderr):
    check = BoundCheck("x", estimate, bound, stderr)
    assert check.verdict == (estimate <= bound + 4 * stderr)
    if bound >= 1:
        assert check.verdict
    mirrored = BoundCheck("x", estimate, bound, stderr, sense="ge")
    assert mirrored.verdict == (estimate >= bound - 4 * stderr)


def test_calibrate_uses_shape():
    check = BoundCheck("x", 3.0, 99.0, 0.1, details={"shape": 2.0})
    assert conc.calibrate(check, 2.0) == pytest.approx(3.0)


def test_walk_config_validation():
    with pytest.raises(ValueError):
        WalkConfig(walks=0)
    assert WalkConfig(noise="rademacher").noise is NoiseKind.RADEMACHER
