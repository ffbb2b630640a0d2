"""Flat key=value experiment configuration with strict key checking.

One line per setting, `key = value`, `#` comments.  Keys cover the physical
parameters, the lattice geometry/schedule and output options; anything else
is rejected so typos cannot silently fall back to defaults.  Precedence is
command-line flag > config file > built-in default.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .lattice import LatticeConfig
from .model import ModelParams


class ConfigError(ValueError):
    """Malformed config file or unknown/invalid key."""


def _to_bool(s):
    low = str(s).strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {s!r}")


def _opt_float(s):
    if s is None or str(s).strip().lower() in ("none", ""):
        return None
    return float(s)


# key -> (parser, which dataclass field it feeds)
PARAM_KEYS = {
    "kappa": float, "omega": float, "gamma": float, "b": float,
    "lambda": float, "tau": float, "n_p": float, "d_t": float, "r_fac": float,
}
LATTICE_KEYS = {
    "d": int, "l": int, "dx": float, "dt": float, "t_max": float,
    "record_every": float, "snapshot_every": _opt_float, "seed": int,
    "init_rho": float, "init_n": float, "noise": _to_bool,
}
OUTPUT_KEYS = {"outdir": str}
KNOWN_KEYS = {**PARAM_KEYS, **LATTICE_KEYS, **OUTPUT_KEYS}

_FIELD_ALIASES = {"lambda": "lam"}   # config key -> ModelParams field


def parse_config_text(text: str, source: str = "<config>") -> dict:
    """Parse `key = value` lines into a {key: parsed value} dict."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key not in KNOWN_KEYS:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        if key in out:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        try:
            out[key] = KNOWN_KEYS[key](value)
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"{source}:{lineno}: bad value for {key!r}: {exc}") from exc
    return out


def parse_config_file(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        return parse_config_text(fh.read(), source=str(path))


@dataclass
class ExperimentConfig:
    """Effective, fully-resolved configuration of one run."""

    params: ModelParams = field(default_factory=ModelParams)
    lattice: LatticeConfig = field(default_factory=LatticeConfig)
    outdir: str = "."

    def as_dict(self) -> dict:
        d = {k: getattr(self.params, _FIELD_ALIASES.get(k, k)) for k in PARAM_KEYS}
        d.update({k: getattr(self.lattice, k) for k in LATTICE_KEYS})
        d["outdir"] = self.outdir
        return d


def resolve(file_values: dict | None = None, overrides: dict | None = None) -> ExperimentConfig:
    """Merge defaults <- config file <- CLI overrides into an ExperimentConfig.

    `overrides` uses the same key names; None values there mean "not given".
    """
    merged = {}
    for layer in (file_values or {}), (overrides or {}):
        for k, v in layer.items():
            if k not in KNOWN_KEYS:
                raise ConfigError(f"unknown key {k!r}")
            if v is not None:
                merged[k] = v
    pkw = {_FIELD_ALIASES.get(k, k): merged[k] for k in PARAM_KEYS if k in merged}
    lkw = {k: merged[k] for k in LATTICE_KEYS if k in merged}
    try:
        return ExperimentConfig(params=ModelParams(**pkw),
                                lattice=LatticeConfig(**lkw),
                                outdir=merged.get("outdir", "."))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
