"""Turn ``[check]`` config sections into lists of :class:`~ocucb.conc.BoundCheck`.

Constants of the O(1)-type envelopes are calibrated once on a pilot point
(``headroom`` times the pilot estimate) and then frozen for the whole grid.
"""

from __future__ import annotations

import math
from typing import List

from . import conc
from .config import CheckSpec


def run_maximal(spec: CheckSpec) -> List[conc.BoundCheck]:
    out = []
    for noise in spec["noises"]:
        for n in spec["horizons"]:
            cfg = conc.WalkConfig(walks=spec["walks"], horizon=n, noise=noise, seed=spec["seed"])
            eps = [s * math.sqrt(n) for s in spec["eps_scales"]]
            out.extend(conc.check_maximal_grid(n, eps, cfg))
    return out


def run_lil(spec: CheckSpec) -> List[conc.BoundCheck]:
    cfg = conc.WalkConfig(
        walks=spec["walks"], horizon=spec["horizon"], noise=spec["noise"], seed=spec["seed"]
    )
    return conc.check_lil(spec["etas"], cfg, spec["floor"])


def run_tau(spec: CheckSpec) -> List[conc.BoundCheck]:
    cfg = conc.WalkConfig(
        walks=spec["walks"], horizon=spec["horizon"], noise=spec["noise"], seed=spec["seed"]
    )
    eta = spec["eta"]
    pilot = conc.estimate_tau_moments(spec["pilot_delta"], math.exp(spec["pilot_log_b"]), eta, cfg)
    c_fit = conc.calibrate(pilot, spec["headroom"])
    out = []
    for delta in spec["deltas"]:
        for log_b in spec["log_b"]:
            check = conc.estimate_tau_moments(delta, math.exp(log_b), eta, cfg, c_fit=c_fit)
            check.details["c_fit"] = c_fit
            d = check.details
            out.append(
                conc.BoundCheck(
                    f"tau jensen Delta={delta:g} log(b)={log_b:g}", d["mean_tau"], d["rms_tau"], 0.0, slack=0.0
                )
            )
            out.append(check)
    return out


def run_alpha_beta(spec: CheckSpec) -> List[conc.BoundCheck]:
    cfg = conc.WalkConfig(
        walks=spec["walks"], horizon=spec["horizon"], noise=spec["noise"], seed=spec["seed"]
    )
    eta = spec["eta"]
    patterns = spec["lambdas"]
    if not 0 <= spec["pilot_pattern"] < len(patterns):
        raise ValueError("pilot_pattern must index one of the lambda patterns")
    if not spec["pilot_rho"] > 0.5:
        raise ValueError("pilot_rho must exceed 1/2 so both constants can be calibrated")
    pilot_lams = patterns[spec["pilot_pattern"]]
    pilot_est = conc.alpha_beta_samples(spec["pilot_delta"], [(spec["pilot_rho"], pilot_lams)], eta, cfg)[0]
    alpha_pilot, beta_pilot = conc.alpha_beta_checks(spec["pilot_delta"], spec["pilot_rho"], pilot_lams, pilot_est)
    c_alpha = conc.calibrate(alpha_pilot, spec["headroom"])
    c_beta = conc.calibrate(beta_pilot, spec["headroom"])
    out = []
    for delta in spec["deltas"]:
        configs = [(rho, lams) for rho in spec["rhos"] for lams in patterns]
        estimates = conc.alpha_beta_samples(delta, configs, eta, cfg)
        for (rho, lams), est in zip(configs, estimates):
            for check in conc.alpha_beta_checks(delta, rho, lams, est, c_alpha, c_beta):
                check.details["c_alpha"] = c_alpha
                check.details["c_beta"] = c_beta
                out.append(check)
    return out


RUNNERS = {
    "maximal": run_maximal,
    "lil": run_lil,
    "tau": run_tau,
    "alpha_beta": run_alpha_beta,
}


def run_check(spec: CheckSpec) -> List[conc.BoundCheck]:
    return RUNNERS[spec.kind](spec)
