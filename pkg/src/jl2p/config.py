"""Run configuration: built-in defaults < config file < JL2P_* environment < command line."""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import yaml

from .trainer import TrainConfig


class ConfigError(ValueError):
    pass


@dataclass
class ModelSection:
    word_dim: int = 64
    latent_dim: int = 32
    sentence_hidden: int = 128
    pose_hidden: int = 128
    decoder_hidden: int = 128
    seed: int = 0


@dataclass
class PathsSection:
    corpus: str | None = None
    embeddings: str | None = None
    checkpoint: str | None = None
    out_dir: str = "runs/default"


@dataclass
class RunConfig:
    model: ModelSection = field(default_factory=ModelSection)
    train: TrainConfig = field(default_factory=TrainConfig)
    paths: PathsSection = field(default_factory=PathsSection)

    def to_dict(self):
        return asdict(self)


SECTIONS = {"model": ModelSection, "train": TrainConfig, "paths": PathsSection}
ENV_PREFIX = "JL2P_"


def _coerce(value, default, key):
    if not isinstance(value, str):
        if isinstance(default, bool) and not isinstance(value, bool):
            raise ConfigError(f"{key}: expected a boolean, got {value!r}")
        if isinstance(default, float) and isinstance(value, int):
            return float(value)
        return value
    if isinstance(default, bool):
        low = value.strip().lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"{key}: expected a boolean, got {value!r}")
    try:
        if isinstance(default, int):
            return int(value)
        if isinstance(default, float):
            return float(value)
    except ValueError as e:
        raise ConfigError(f"{key}: {e}") from e
    if value.lower() in ("", "none", "null") and default is None:
        return None
    return value


def _apply(values: dict, overrides: dict, origin: str):
    for section, items in overrides.items():
        if section not in SECTIONS:
            raise ConfigError(f"{origin}: unknown section {section!r}")
        if not isinstance(items, dict):
            raise ConfigError(f"{origin}: section {section!r} must be a mapping")
        known = {f.name for f in fields(SECTIONS[section])}
        for key, val in items.items():
            if key not in known:
                raise ConfigError(f"{origin}: unknown key {section}.{key}")
            values[section][key] = _coerce(val, values[section][key], f"{section}.{key}")


def load_file(path) -> dict:
    text = Path(path).read_text()
    if str(path).endswith(".json"):
        doc = json.loads(text)
    else:
        doc = yaml.safe_load(text)
    if doc is None:
        return {}
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    return doc


def env_overrides(environ=None) -> dict:
    """``JL2P_TRAIN__LR=0.01`` -> ``{"train": {"lr": "0.01"}}``."""
    environ = os.environ if environ is None else environ
    out = {}
    for name, val in environ.items():
        if not name.startswith(ENV_PREFIX):
            continue
        rest = name[len(ENV_PREFIX):].lower()
        if "__" not in rest:
            raise ConfigError(f"environment variable {name} must look like "
                              f"{ENV_PREFIX}<SECTION>__<KEY>")
        section, key = rest.split("__", 1)
        out.setdefault(section, {})[key] = val
    return out


def parse_assignments(items) -> dict:
    """``["train.lr=0.01", ...]`` -> nested dict of strings."""
    out = {}
    for item in items or ():
        if "=" not in item or "." not in item.split("=", 1)[0]:
            raise ConfigError(f"override {item!r} must look like section.key=value")
        dotted, val = item.split("=", 1)
        section, key = dotted.split(".", 1)
        out.setdefault(section, {})[key] = val
    return out


def resolve(config_file=None, cli: dict | None = None, environ=None) -> RunConfig:
    values = {name: asdict(cls()) for name, cls in SECTIONS.items()}
    if config_file is not None:
        _apply(values, load_file(config_file), str(config_file))
    _apply(values, env_overrides(environ), "environment")
    if cli:
        _apply(values, cli, "command line")
    try:
        return RunConfig(ModelSection(**values["model"]), TrainConfig(**values["train"]),
                         PathsSection(**values["paths"]))
    except (TypeError, ValueError) as e:
        raise ConfigError(str(e)) from e
