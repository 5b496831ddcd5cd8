"""Flat dotted-key run configuration with layered overrides.

A configuration is a plain ``dict[str, object]`` whose keys are dotted
paths like ``propsim.lam``.  Values come from four layers, later layers
winning: built-in defaults, an optional config file, ``--set key=value``
overrides, and dedicated command line flags.  Every key has a fixed type
taken from its default; parsing a value that does not fit that type
raises :class:`~kgextend.errors.ConfigError` naming the key.

The file format is one ``key = value`` pair per line.  Blank lines and
lines starting with ``#`` are ignored.  Values are bare words, never
quoted; trailing whitespace is stripped.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

from .errors import ConfigError, IoError

DEFAULTS: dict[str, object] = {
    "paths.ref": "",
    "paths.cand": "",
    "paths.stopwords": "",
    "paths.embeddings": "",
    "paths.taxonomy": "",
    "paths.out": "",
    "propsim.lam": 0.5,
    "propsim.theta": 0.0,
    "propsim.counts": "schema",
    "matcher.tau": 0.8,
    "matcher.ps_threshold": 0.3,
    "recognizer.kind": "schema",
    "model.kind": "logreg",
    "model.cutoff": 0.5,
    "model.lr": 0.1,
    "model.epochs": 500,
    "model.l2": 1e-4,
    "model.rounds": 100,
    "model.depth": 3,
    "model.shrinkage": 0.1,
    "model.max_depth": 6,
    "model.min_leaf": 5,
    "model.feature": "sim_h",
    "model.value": 0.5,
    "train.balance": False,
    "train.balance_ratio": 0.1,
    "assess.eta": 1.0,
    "assess.mu": 1.0,
    "assess.query": "",
    "assess.alpha": 0.6,
    "assess.beta": 0.4,
    "extend.conflicts": "rename",
    "extend.keep_unaligned_etypes": False,
    "seed": 0,
    "threads": 1,
}


def parse_value(key: str, raw: str) -> object:
    """Convert ``raw`` to the type of ``DEFAULTS[key]``.

    Booleans accept exactly ``true`` and ``false``.  Integer keys reject
    values with a fractional part rather than truncating them.
    """
    if key not in DEFAULTS:
        raise ConfigError(f"unknown configuration key {key!r}")
    default = DEFAULTS[key]
    if isinstance(default, bool):
        if raw == "true":
            return True
        if raw == "false":
            return False
        raise ConfigError(f"{key}: expected 'true' or 'false', got {raw!r}")
    if isinstance(default, int):
        try:
            return int(raw)
        except ValueError:
            raise ConfigError(f"{key}: expected an integer, got {raw!r}") from None
    if isinstance(default, float):
        try:
            return float(raw)
        except ValueError:
            raise ConfigError(f"{key}: expected a number, got {raw!r}") from None
    return raw


def parse_config_text(text: str) -> dict[str, object]:
    """Parse ``key = value`` lines into a typed override mapping."""
    out: dict[str, object] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {stripped!r}")
        key, _, raw = stripped.partition("=")
        out[key.strip()] = parse_value(key.strip(), raw.strip())
    return out


def load_config(path: str) -> dict[str, object]:
    try:
        with open(path, encoding="utf-8") as fh:
            return parse_config_text(fh.read())
    except OSError as exc:
        raise IoError(f"cannot read {path!r}: {exc}") from exc


def parse_overrides(items: Iterable[str]) -> dict[str, object]:
    """Parse ``--set key=value`` arguments."""
    out: dict[str, object] = {}
    for item in items:
        if "=" not in item:
            raise ConfigError(f"--set needs key=value, got {item!r}")
        key, _, raw = item.partition("=")
        out[key.strip()] = parse_value(key.strip(), raw.strip())
    return out


@dataclass(frozen=True, slots=True)
class RunConfig:
    """Resolved configuration with typed accessors."""

    values: Mapping[str, object]

    def str_(self, key: str) -> str:
        return str(self.values[key])

    def int_(self, key: str) -> int:
        value = self.values[key]
        assert isinstance(value, int)
        return value

    def float_(self, key: str) -> float:
        value = self.values[key]
        assert isinstance(value, (int, float))
        return float(value)

    def bool_(self, key: str) -> bool:
        value = self.values[key]
        assert isinstance(value, bool)
        return value


def resolve(*layers: Mapping[str, object]) -> RunConfig:
    """Merge override layers onto the defaults, later layers winning."""
    merged = dict(DEFAULTS)
    for layer in layers:
        for key, value in layer.items():
            if key not in DEFAULTS:
                raise ConfigError(f"unknown configuration key {key!r}")
            merged[key] = value
    return RunConfig(merged)


def dump_config(cfg: RunConfig) -> str:
    """Render a configuration back to file syntax, keys sorted."""
    lines = []
    for key in sorted(cfg.values):
        value = cfg.values[key]
        if isinstance(value, bool):
            rendered = "true" if value else "false"
        else:
            rendered = str(value)
        lines.append(f"{key} = {rendered}")
    return "\n".join(lines) + "\n"
