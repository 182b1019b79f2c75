"""Run configuration: defaults, config files, and flag overrides.

Precedence is flags > config file > built-in defaults.  The effective
configuration is echoed verbatim into every report so a run can be
reproduced from its output alone.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path

from .errors import ConfigError

CONFIG_FORMAT = "distdescribe-config-v1"

BACKEND_CHOICES = ("http", "rule")  # plus "replay:<path>"


@dataclass(frozen=True)
class EndpointConfig:
    """Where and how to reach one OpenAI-compatible endpoint."""

    base_url: str = "http://localhost:8000/v1"
    route: str = "completions"  # or "chat"
    model: str = "default"
    credential_env: str = ""
    timeout_s: float = 30.0
    retries: int = 3
    backoff_s: float = 0.5

    def __post_init__(self) -> None:
        if self.route not in ("completions", "chat"):
            raise ConfigError(f"route must be 'completions' or 'chat', got {self.route!r}")
        if self.retries < 1:
            raise ConfigError(f"retries must be >= 1, got {self.retries}")


@dataclass(frozen=True)
class RunConfig:
    seed: int = 0
    pair_seed: int | None = None
    prompt_seed: int | None = None
    n_pairs: int = 400
    top_k: int = 5
    percentiles: tuple[int, ...] = (5, 20, 100)
    samples_per_side: int = 5
    sets_per_percentile: int = 10
    completions_per_set: int = 2
    temperature: float = 0.7
    max_completion_tokens: int = 32
    stop_sequences: tuple[str, ...] = (",", ".", "\n")
    forbidden_tokens: tuple[str, ...] = ("group", "Group")
    in_flight: int = 4
    epochs: int = 5
    learning_rate: float = 0.1
    proposer_backend: str = "rule"
    verifier_backend: str = "rule"
    cache_path: str | None = None
    out_path: str | None = None
    proposer_endpoint: EndpointConfig = field(default_factory=EndpointConfig)
    verifier_endpoint: EndpointConfig = field(default_factory=EndpointConfig)

    def __post_init__(self) -> None:
        if self.n_pairs < 1:
            raise ConfigError(f"n_pairs must be >= 1, got {self.n_pairs}")
        if self.top_k < 1:
            raise ConfigError(f"top_k must be >= 1, got {self.top_k}")
        if not self.percentiles:
            raise ConfigError("percentiles must be non-empty")
        for p in self.percentiles:
            if not 1 <= p <= 100:
                raise ConfigError(f"percentile out of range: {p}")
        if self.in_flight < 1:
            raise ConfigError(f"in_flight must be >= 1, got {self.in_flight}")
        for name in ("proposer_backend", "verifier_backend"):
            selector = getattr(self, name)
            if selector not in BACKEND_CHOICES and not selector.startswith("replay:"):
                raise ConfigError(
                    f"{name} must be one of {BACKEND_CHOICES} or replay:<path>, "
                    f"got {selector!r}"
                )

    @property
    def effective_pair_seed(self) -> int:
        return self.seed if self.pair_seed is None else self.pair_seed

    @property
    def effective_prompt_seed(self) -> int:
        return self.seed if self.prompt_seed is None else self.prompt_seed

    def echo(self) -> dict:
        """Full effective configuration as a plain serializable mapping."""

        def endpoint(e: EndpointConfig) -> dict:
            return {
                "base_url": e.base_url,
                "route": e.route,
                "model": e.model,
                "credential_env": e.credential_env,
                "timeout_s": e.timeout_s,
                "retries": e.retries,
                "backoff_s": e.backoff_s,
            }

        return {
            "seed": self.seed,
            "pair_seed": self.effective_pair_seed,
            "prompt_seed": self.effective_prompt_seed,
            "n_pairs": self.n_pairs,
            "top_k": self.top_k,
            "percentiles": list(self.percentiles),
            "samples_per_side": self.samples_per_side,
            "sets_per_percentile": self.sets_per_percentile,
            "completions_per_set": self.completions_per_set,
            "temperature": self.temperature,
            "max_completion_tokens": self.max_completion_tokens,
            "stop_sequences": list(self.stop_sequences),
            "forbidden_tokens": list(self.forbidden_tokens),
            "in_flight": self.in_flight,
            "epochs": self.epochs,
            "learning_rate": self.learning_rate,
            "proposer_backend": self.proposer_backend,
            "verifier_backend": self.verifier_backend,
            "cache_path": self.cache_path,
            "out_path": self.out_path,
            "proposer_endpoint": endpoint(self.proposer_endpoint),
            "verifier_endpoint": endpoint(self.verifier_endpoint),
        }


def _parse_int(key: str, value: str) -> int:
    try:
        return int(value)
    except ValueError:
        raise ConfigError(f"{key}: expected an integer, got {value!r}") from None


def _parse_float(key: str, value: str) -> float:
    try:
        return float(value)
    except ValueError:
        raise ConfigError(f"{key}: expected a number, got {value!r}") from None


def _parse_int_list(key: str, value: str) -> tuple[int, ...]:
    try:
        return tuple(int(part.strip()) for part in value.split(",") if part.strip())
    except ValueError:
        raise ConfigError(f"{key}: expected comma-separated integers, got {value!r}") from None


def _parse_str_list(key: str, value: str) -> tuple[str, ...]:
    # JSON array syntax so separators and escapes (a literal comma, "\n")
    # can appear inside the items themselves.
    try:
        parsed = json.loads(value)
    except json.JSONDecodeError:
        raise ConfigError(f"{key}: expected a JSON array of strings, got {value!r}") from None
    if not isinstance(parsed, list) or not all(isinstance(x, str) for x in parsed):
        raise ConfigError(f"{key}: expected a JSON array of strings, got {value!r}")
    return tuple(parsed)


_SCALAR_KEYS = {
    "seed": _parse_int,
    "pair_seed": _parse_int,
    "prompt_seed": _parse_int,
    "n_pairs": _parse_int,
    "top_k": _parse_int,
    "percentiles": _parse_int_list,
    "samples_per_side": _parse_int,
    "sets_per_percentile": _parse_int,
    "completions_per_set": _parse_int,
    "temperature": _parse_float,
    "max_completion_tokens": _parse_int,
    "stop_sequences": _parse_str_list,
    "forbidden_tokens": _parse_str_list,
    "in_flight": _parse_int,
    "epochs": _parse_int,
    "learning_rate": _parse_float,
    "proposer_backend": lambda k, v: v,
    "verifier_backend": lambda k, v: v,
    "cache_path": lambda k, v: v,
    "out_path": lambda k, v: v,
}

_ENDPOINT_KEYS = {
    "base_url": lambda k, v: v,
    "route": lambda k, v: v,
    "model": lambda k, v: v,
    "credential_env": lambda k, v: v,
    "timeout_s": _parse_float,
    "retries": _parse_int,
    "backoff_s": _parse_float,
}


def parse_config_file(path: str | Path) -> dict:
    """Read a key=value config file into a typed mapping.

    The first non-blank line must be the format header.  Endpoint settings
    use dotted keys ("proposer.base_url"); unknown keys are errors so typos
    fail loudly instead of silently using defaults.
    """
    path = Path(path)
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None

    values: dict = {}
    saw_header = False
    for lineno, line in enumerate(lines, start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if not saw_header:
            if stripped != CONFIG_FORMAT:
                raise ConfigError(
                    f"{path}:{lineno}: first line must be {CONFIG_FORMAT!r}"
                )
            saw_header = True
            continue
        if "=" not in stripped:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, _, value = stripped.partition("=")
        key = key.strip()
        value = value.strip()
        if key in _SCALAR_KEYS:
            values[key] = _SCALAR_KEYS[key](key, value)
        elif "." in key:
            prefix, _, sub = key.partition(".")
            if prefix not in ("proposer", "verifier") or sub not in _ENDPOINT_KEYS:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            values.setdefault(f"{prefix}_endpoint", {})[sub] = _ENDPOINT_KEYS[sub](key, value)
        else:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
    if not saw_header:
        raise ConfigError(f"{path}: missing {CONFIG_FORMAT!r} header")
    return values


def build_config(file_values: dict | None = None, flag_values: dict | None = None) -> RunConfig:
    """Merge defaults, config-file values, and flag overrides (in that order)."""
    merged: dict = {}
    endpoints: dict[str, dict] = {"proposer_endpoint": {}, "verifier_endpoint": {}}
    for source in (file_values or {}), (flag_values or {}):
        for key, value in source.items():
            if value is None:
                continue
            if key in ("proposer_endpoint", "verifier_endpoint"):
                endpoints[key].update(value)
            else:
                merged[key] = value
    for key, overrides in endpoints.items():
        if overrides:
            merged[key] = EndpointConfig(**overrides)
    unknown = set(merged) - set(RunConfig.__dataclass_fields__)
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    return RunConfig(**merged)


def with_overrides(config: RunConfig, **overrides) -> RunConfig:
    return replace(config, **overrides)
