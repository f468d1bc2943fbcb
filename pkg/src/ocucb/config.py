"""Run configuration files.

Grammar (INI-style, parsed with :mod:`configparser`)::

    [experiment]                 ; optional
    horizon = 10000
    replications = 1000
    seed = 1
    noise = gaussian             ; gaussian | uniform | rademacher
    arms = 10                    ; either arms + gap ...
    gap = 0.3
    means = 0, -0.3, -0.1        ; ... or explicit means
    checkpoints = 1000, 10000    ; optional, default geometric grid

    [policy NAME]                ; one section per policy, at least one
    kind = ocucb                 ; ocucb | klucb+ | ucb1 | moss
    eta = 2
    rho = 0.5
    drop_log_factors = false

    [check NAME]                 ; optional concentration checks
    kind = maximal               ; maximal | lil | tau | alpha_beta
    ...                          ; kind-specific keys, see CHECK_KEYS

Lists are comma separated; ``lambdas`` patterns are separated by ``|``.
Comments start with ``;`` or ``#``.
"""

from __future__ import annotations

import configparser
import hashlib
import math
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Dict, List, Mapping, Optional, Tuple

from .env import NoiseKind
from .policies import IndexParams, PolicyKind
from .sim import ConfigError, ExperimentConfig, PolicySpec


def _float(text: str) -> float:
    return float(text.strip())


def _int(text: str) -> int:
    try:
        return int(text.strip())
    except ValueError:
        pass
    # accepts "1e4"-style integers
    value = float(text.strip())
    if not value.is_integer():
        raise ValueError(f"expected an integer, got {text.strip()!r}")
    return int(value)


def _bool(text: str) -> bool:
    key = text.strip().lower()
    if key in {"1", "true", "yes", "on"}:
        return True
    if key in {"0", "false", "no", "off"}:
        return False
    raise ValueError(f"expected a boolean, got {text.strip()!r}")


def _list(item: Callable[[str], Any]) -> Callable[[str], Tuple[Any, ...]]:
    def parse(text: str) -> Tuple[Any, ...]:
        parts = [p for p in (s.strip() for s in text.split(",")) if p]
        if not parts:
            raise ValueError("empty list")
        return tuple(item(p) for p in parts)

    return parse


def _patterns(text: str) -> Tuple[Tuple[float, ...], ...]:
    return tuple(_list(_float)(chunk) for chunk in text.split("|"))


def _noise(text: str) -> NoiseKind:
    return NoiseKind.parse(text)


def _fmt(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, NoiseKind):
        return value.value
    if isinstance(value, float):
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return repr(value)
    if isinstance(value, tuple):
        if value and isinstance(value[0], tuple):
            return " | ".join(_fmt(v) for v in value)
        return ", ".join(_fmt(v) for v in value)
    return str(value)


# key -> (parser, default); a default of None marks a required key.
CHECK_KEYS: Dict[str, Dict[str, Tuple[Callable[[str], Any], Any]]] = {
    "maximal": {
        "horizons": (_list(_int), (100, 1000, 10000)),
        "eps_scales": (_list(_float), (0.5, 1.0, 2.0)),
        "noises": (_list(_noise), (NoiseKind.GAUSSIAN, NoiseKind.SCALED_UNIFORM, NoiseKind.RADEMACHER)),
        "walks": (_int, 100_000),
        "seed": (_int, 0),
    },
    "lil": {
        "etas": (_list(_float), (1.5, 2.0, 4.0, 10.0)),
        "horizon": (_int, 10_000),
        "walks": (_int, 10_000),
        "noise": (_noise, NoiseKind.GAUSSIAN),
        "floor": (_float, 0.01),
        "seed": (_int, 0),
    },
    "tau": {
        "deltas": (_list(_float), (0.25, 0.5, 1.0, 2.0)),
        "log_b": (_list(_float), (1.0, 2.0, 4.0)),
        "eta": (_float, 2.0),
        "walks": (_int, 4000),
        "horizon": (_int, 1),
        "noise": (_noise, NoiseKind.GAUSSIAN),
        "pilot_delta": (_float, 1.0),
        "pilot_log_b": (_float, 2.0),
        "headroom": (_float, 2.0),
        "seed": (_int, 0),
    },
    "alpha_beta": {
        "deltas": (_list(_float), (0.25, 1.0)),
        "rhos": (_list(_float), (0.5, 0.75, 1.0)),
        "lambdas": (
            _patterns,
            ((math.inf,) * 4, (1.0,) * 4, (1.0, 4.0, 16.0, math.inf)),
        ),
        "eta": (_float, 3.0),
        "walks": (_int, 10_000),
        "horizon": (_int, 1),
        "noise": (_noise, NoiseKind.GAUSSIAN),
        "pilot_delta": (_float, 1.0),
        "pilot_rho": (_float, 1.0),
        "pilot_pattern": (_int, 0),
        "headroom": (_float, 2.0),
        "seed": (_int, 0),
    },
}

EXPERIMENT_KEYS = {
    "horizon": _int,
    "replications": _int,
    "seed": _int,
    "noise": _noise,
    "arms": _int,
    "gap": _float,
    "means": _list(_float),
    "checkpoints": _list(_int),
}
POLICY_KEYS = {"kind", "eta", "rho", "drop_log_factors"}


@dataclass(frozen=True)
class CheckSpec:
    name: str
    kind: str
    options: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.kind not in CHECK_KEYS:
            raise ConfigError(f"[check {self.name}] kind", f"unknown check kind {self.kind!r}")
        merged = {key: default for key, (_, default) in CHECK_KEYS[self.kind].items()}
        unknown = set(self.options) - set(merged)
        if unknown:
            raise ConfigError(f"[check {self.name}] {sorted(unknown)[0]}", "unknown key")
        merged.update(self.options)
        object.__setattr__(self, "options", merged)

    def __getitem__(self, key: str) -> Any:
        return self.options[key]


@dataclass(frozen=True)
class RunConfig:
    experiment: Optional[ExperimentConfig] = None
    checks: Tuple[CheckSpec, ...] = ()

    def with_seed(self, seed: int) -> "RunConfig":
        experiment = None if self.experiment is None else replace(self.experiment, seed=seed)
        checks = tuple(CheckSpec(c.name, c.kind, {**c.options, "seed": seed}) for c in self.checks)
        return RunConfig(experiment, checks)

    def digest(self) -> str:
        return hashlib.sha256(serialize(self).encode("utf-8")).hexdigest()


class ConfigFileError(ValueError):
    """A config file problem, located by line where possible."""


def _line_of(text: str, section: str, key: Optional[str] = None) -> Optional[int]:
    current = None
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1].strip()
            if key is None and current == section:
                return number
            continue
        if key is not None and current == section and "=" in line:
            if line.split("=", 1)[0].strip().lower() == key:
                return number
    return None


def parse(text: str, source: str = "<config>") -> RunConfig:
    parser = configparser.ConfigParser(
        inline_comment_prefixes=(";", "#"), interpolation=None, default_section="__defaults__"
    )
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigFileError(f"{source}: {exc}") from None

    def fail(section: str, key: Optional[str], message: str) -> ConfigFileError:
        line = _line_of(text, section, key)
        where = f"{source}:{line}" if line else source
        label = f"[{section}]" + (f" {key}" if key else "")
        return ConfigFileError(f"{where}: {label}: {message}")

    experiment_values: Dict[str, Any] = {}
    policies: List[PolicySpec] = []
    checks: List[CheckSpec] = []
    for section in parser.sections():
        head, _, name = section.partition(" ")
        name = name.strip()
        items = dict(parser.items(section))
        if head == "experiment" and not name:
            for key, raw in items.items():
                if key not in EXPERIMENT_KEYS:
                    raise fail(section, key, "unknown key")
                try:
                    experiment_values[key] = EXPERIMENT_KEYS[key](raw)
                except ValueError as exc:
                    raise fail(section, key, str(exc)) from None
        elif head == "policy" and name:
            for key in items:
                if key not in POLICY_KEYS:
                    raise fail(section, key, "unknown key")
            if "kind" not in items:
                raise fail(section, None, "missing key 'kind'")
            try:
                kind = PolicyKind.parse(items["kind"])
            except ValueError as exc:
                raise fail(section, "kind", str(exc)) from None
            values = {}
            for key, conv in (("eta", _float), ("rho", _float), ("drop_log_factors", _bool)):
                if key in items:
                    try:
                        values[key] = conv(items[key])
                    except ValueError as exc:
                        raise fail(section, key, str(exc)) from None
            try:
                params = IndexParams(**values)
            except ValueError as exc:
                message = str(exc)
                key = "eta" if "eta" in message else "rho"
                raise fail(section, key, message) from None
            policies.append(PolicySpec(name, kind, params))
        elif head == "check" and name:
            kind = items.pop("kind", None)
            if kind is None:
                raise fail(section, None, "missing key 'kind'")
            kind = kind.strip().lower()
            if kind not in CHECK_KEYS:
                raise fail(section, "kind", f"unknown check kind {kind!r}")
            options = {}
            for key, raw in items.items():
                if key not in CHECK_KEYS[kind]:
                    raise fail(section, key, "unknown key")
                try:
                    options[key] = CHECK_KEYS[kind][key][0](raw)
                except ValueError as exc:
                    raise fail(section, key, str(exc)) from None
            checks.append(CheckSpec(name, kind, options))
        else:
            raise fail(section, None, "unknown section (expected [experiment], [policy NAME] or [check NAME])")

    experiment = None
    if experiment_values or policies:
        if not experiment_values:
            raise ConfigFileError(f"{source}: policies given without an [experiment] section")
        for key in ("horizon", "replications"):
            if key not in experiment_values:
                raise fail("experiment", None, f"missing key {key!r}")
        means = experiment_values.pop("means", None)
        checkpoints = experiment_values.pop("checkpoints", None)
        experiment = ExperimentConfig(
            policies=tuple(policies),
            means=means,
            checkpoints=checkpoints,
            **experiment_values,
        )
        try:
            experiment.validate()
        except ConfigError as exc:
            section = "experiment"
            key = exc.field if exc.field in EXPERIMENT_KEYS else None
            if exc.field == "policies":
                raise ConfigFileError(f"{source}: {exc}") from None
            raise fail(section, key, str(exc).split(": ", 1)[-1]) from None
    if experiment is None and not checks:
        raise ConfigFileError(f"{source}: nothing to run (no [experiment] and no [check] sections)")
    return RunConfig(experiment, tuple(checks))


def load(path) -> RunConfig:
    with open(path, encoding="utf-8") as handle:
        return parse(handle.read(), source=str(path))


def serialize(config: RunConfig) -> str:
    """Canonical text form; ``parse(serialize(c)) == c``."""
    lines: List[str] = []
    exp = config.experiment
    if exp is not None:
        lines.append("[experiment]")
        lines.append(f"horizon = {exp.horizon}")
        lines.append(f"replications = {exp.replications}")
        lines.append(f"seed = {exp.seed}")
        lines.append(f"noise = {exp.noise.value}")
        if exp.means is not None:
            lines.append(f"means = {_fmt(tuple(float(m) for m in exp.means))}")
        else:
            lines.append(f"arms = {exp.arms}")
            lines.append(f"gap = {_fmt(float(exp.gap))}")
        if exp.checkpoints is not None:
            lines.append(f"checkpoints = {_fmt(tuple(exp.checkpoints))}")
        lines.append("")
        for spec in exp.policies:
            lines.append(f"[policy {spec.name}]")
            lines.append(f"kind = {spec.kind.value}")
            lines.append(f"eta = {_fmt(float(spec.params.eta))}")
            lines.append(f"rho = {_fmt(float(spec.params.rho))}")
            lines.append(f"drop_log_factors = {_fmt(spec.params.drop_log_factors)}")
            lines.append("")
    for check in config.checks:
        lines.append(f"[check {check.name}]")
        lines.append(f"kind = {check.kind}")
        for key in CHECK_KEYS[check.kind]:
            lines.append(f"{key} = {_fmt(check.options[key])}")
        lines.append("")
    return "\n".join(lines)
