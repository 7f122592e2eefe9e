"""Experiment configuration: flat key-value files plus environment overrides.

A config file holds `key = value` lines; dots namespace the sections
(`protocol.k_outer = 10`). Environment variables override file values:
prefix STACKSURE_, uppercase the key and replace dots with underscores
(STACKSURE_PROTOCOL_K_OUTER=5). See docs/config.md for the key table.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

from .errors import ConfigError
from .learners import LEARNER_KINDS, LearnerSpec
from .combiners import COMBINER_METHODS
from .synth import GeneratorConfig
from .validation import ESTIMATOR_NAMES, ProtocolConfig

__all__ = ["ExperimentConfig", "load_config", "config_from_mapping", "parse_config_text"]

# requested estimator names; new_data expands to the two training fractions
REQUESTABLE_ESTIMATORS = (
    "training_set",
    "independent_cv",
    "bbc_sl",
    "nested_cv",
    "new_data",
    "new_data_100",
    "new_data_90",
)


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything one experiment run needs, validated at construction."""

    mode: str = "synthetic"
    generator: GeneratorConfig = field(default_factory=GeneratorConfig)
    n_obs: int = 100
    n_new: int = 2000
    fresh_params: bool = False
    data_path: str | None = None
    protocol: ProtocolConfig = field(default_factory=ProtocolConfig)
    estimators: tuple[str, ...] = ("training_set", "independent_cv", "bbc_sl", "nested_cv")
    repeats: int = 100
    master_seed: int = 0
    output_dir: str = "out"
    worker_count: int = 1

    def __post_init__(self):
        if self.mode not in ("synthetic", "csv"):
            raise ConfigError(f"mode must be 'synthetic' or 'csv', got {self.mode!r}")
        if self.repeats < 1:
            raise ConfigError("repeats must be at least 1")
        if self.worker_count < 1:
            raise ConfigError("worker_count must be at least 1")
        if self.n_obs < 2:
            raise ConfigError("synthetic.n_obs must be at least 2")
        if self.n_new < 2:
            raise ConfigError("synthetic.n_new must be at least 2")
        estimators = tuple(self.estimators)
        if not estimators:
            raise ConfigError("estimators must not be empty")
        unknown = set(estimators) - set(REQUESTABLE_ESTIMATORS)
        if unknown:
            raise ConfigError(f"unknown estimators: {sorted(unknown)}")
        if self.mode == "csv":
            if not self.data_path:
                raise ConfigError("csv mode requires csv.path")
            bad = [e for e in estimators if e.startswith("new_data")]
            if bad:
                raise ConfigError(
                    f"estimators {bad} need a synthetic generator and are invalid in csv mode"
                )
        if not self.protocol.learners:
            raise ConfigError("at least one learner is required")
        if not self.protocol.combiners:
            raise ConfigError("at least one combiner is required")
        object.__setattr__(self, "estimators", estimators)

    @property
    def expanded_estimators(self) -> tuple[str, ...]:
        """Record labels this config produces, in canonical order."""
        chosen = set()
        for name in self.estimators:
            if name == "new_data":
                chosen.update(("new_data_100", "new_data_90"))
            else:
                chosen.add(name)
        return tuple(e for e in ESTIMATOR_NAMES if e in chosen)


def parse_config_text(text: str, origin: str = "<config>") -> dict[str, str]:
    """Parse `key = value` lines; '#' starts a comment, blanks are skipped."""
    out: dict[str, str] = {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{origin}:{line_no}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        key = key.strip().lower()
        if not key:
            raise ConfigError(f"{origin}:{line_no}: empty key")
        if key in out:
            raise ConfigError(f"{origin}:{line_no}: duplicate key {key!r}")
        out[key] = value.strip()
    return out


def _parse_bool(value: str, key: str) -> bool:
    low = value.lower()
    if low in ("true", "yes", "1", "on"):
        return True
    if low in ("false", "no", "0", "off"):
        return False
    raise ConfigError(f"{key}: expected a boolean, got {value!r}")


def _parse_int(value: str, key: str) -> int:
    try:
        return int(value)
    except ValueError:
        raise ConfigError(f"{key}: expected an integer, got {value!r}") from None


def _parse_float(value: str, key: str) -> float:
    try:
        return float(value)
    except ValueError:
        raise ConfigError(f"{key}: expected a number, got {value!r}") from None


def _parse_list(value: str) -> tuple[str, ...]:
    return tuple(part.strip() for part in value.split(",") if part.strip())


_KNOWN_KEYS = (
    "mode",
    "repeats",
    "master_seed",
    "output_dir",
    "worker_count",
    "estimators",
    "combiners",
    "learners",
    "csv.path",
    "synthetic.n_obs",
    "synthetic.n_new",
    "synthetic.fresh_params",
    "generator.p",
    "generator.signal_dims",
    "generator.mean_gap",
    "generator.correlation_strength",
    "generator.seed",
    "protocol.k_outer",
    "protocol.k_inner",
    "protocol.bootstrap",
    "protocol.feature_m",
    "protocol.stratified",
    "protocol.bbc_pooled",
)


def _apply_env_overrides(values: dict[str, str], env: dict[str, str]) -> dict[str, str]:
    by_env_name = {key.upper().replace(".", "_"): key for key in _KNOWN_KEYS}
    out = dict(values)
    for name, value in env.items():
        if not name.startswith("STACKSURE_"):
            continue
        suffix = name[len("STACKSURE_"):]
        key = by_env_name.get(suffix)
        if key is None:
            raise ConfigError(f"environment variable {name} matches no config key")
        out[key] = value
    return out


def config_from_mapping(values: dict[str, str]) -> ExperimentConfig:
    """Build and validate a config from raw string key-values."""
    unknown = set(values) - set(_KNOWN_KEYS)
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")

    def get(key, default=None):
        return values.get(key, default)

    try:
        generator = GeneratorConfig(
            p=_parse_int(get("generator.p", "200"), "generator.p"),
            signal_dims=_parse_int(get("generator.signal_dims", "10"), "generator.signal_dims"),
            mean_gap=_parse_float(get("generator.mean_gap", "0.6"), "generator.mean_gap"),
            correlation_strength=_parse_float(
                get("generator.correlation_strength", "0.3"), "generator.correlation_strength"
            ),
            seed=(
                _parse_int(values["generator.seed"], "generator.seed")
                if "generator.seed" in values
                else None
            ),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    learner_names = _parse_list(get("learners", ",".join(LEARNER_KINDS)))
    for name in learner_names:
        if name not in LEARNER_KINDS:
            raise ConfigError(f"unknown learner {name!r}; expected one of {sorted(LEARNER_KINDS)}")
    combiners = _parse_list(get("combiners", ",".join(COMBINER_METHODS)))

    try:
        protocol = ProtocolConfig(
            k_outer=_parse_int(get("protocol.k_outer", "10"), "protocol.k_outer"),
            k_inner=_parse_int(get("protocol.k_inner", "10"), "protocol.k_inner"),
            n_boot=_parse_int(get("protocol.bootstrap", "100"), "protocol.bootstrap"),
            feature_m=_parse_int(get("protocol.feature_m", "100"), "protocol.feature_m"),
            stratified=_parse_bool(get("protocol.stratified", "true"), "protocol.stratified"),
            bbc_pooled=_parse_bool(get("protocol.bbc_pooled", "false"), "protocol.bbc_pooled"),
            combiners=combiners,
            learners=tuple(LearnerSpec(name) for name in learner_names),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    estimators = _parse_list(
        get("estimators", "training_set, independent_cv, bbc_sl, nested_cv")
    )
    return ExperimentConfig(
        mode=get("mode", "synthetic"),
        generator=generator,
        n_obs=_parse_int(get("synthetic.n_obs", "100"), "synthetic.n_obs"),
        n_new=_parse_int(get("synthetic.n_new", "2000"), "synthetic.n_new"),
        fresh_params=_parse_bool(get("synthetic.fresh_params", "false"), "synthetic.fresh_params"),
        data_path=get("csv.path"),
        protocol=protocol,
        estimators=estimators,
        repeats=_parse_int(get("repeats", "100"), "repeats"),
        master_seed=_parse_int(get("master_seed", "0"), "master_seed"),
        output_dir=get("output_dir", "out"),
        worker_count=_parse_int(get("worker_count", "1"), "worker_count"),
    )


def load_config(path, env: dict[str, str] | None = None, overrides: dict[str, str] | None = None) -> ExperimentConfig:
    """Read a config file; apply env then explicit overrides on top."""
    with open(path) as fh:
        values = parse_config_text(fh.read(), origin=str(path))
    values = _apply_env_overrides(values, os.environ if env is None else env)
    if overrides:
        values.update({k: str(v) for k, v in overrides.items() if v is not None})
    return config_from_mapping(values)


def config_to_mapping(cfg: ExperimentConfig) -> dict[str, str]:
    """Flatten a config back to its key-value form (report round-trip)."""
    out = {
        "mode": cfg.mode,
        "repeats": str(cfg.repeats),
        "master_seed": str(cfg.master_seed),
        "output_dir": cfg.output_dir,
        "worker_count": str(cfg.worker_count),
        "estimators": ", ".join(cfg.estimators),
        "combiners": ", ".join(cfg.protocol.combiners),
        "learners": ", ".join(s.kind for s in cfg.protocol.learners),
        "synthetic.n_obs": str(cfg.n_obs),
        "synthetic.n_new": str(cfg.n_new),
        "synthetic.fresh_params": str(cfg.fresh_params).lower(),
        "generator.p": str(cfg.generator.p),
        "generator.signal_dims": str(cfg.generator.signal_dims),
        "generator.mean_gap": repr(cfg.generator.mean_gap),
        "generator.correlation_strength": repr(cfg.generator.correlation_strength),
        "protocol.k_outer": str(cfg.protocol.k_outer),
        "protocol.k_inner": str(cfg.protocol.k_inner),
        "protocol.bootstrap": str(cfg.protocol.n_boot),
        "protocol.feature_m": str(cfg.protocol.feature_m),
        "protocol.stratified": str(cfg.protocol.stratified).lower(),
        "protocol.bbc_pooled": str(cfg.protocol.bbc_pooled).lower(),
    }
    if cfg.generator.seed is not None:
        out["generator.seed"] = str(cfg.generator.seed)
    if cfg.data_path is not None:
        out["csv.path"] = cfg.data_path
    return out
