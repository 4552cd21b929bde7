"""Declarative run configs: JSON documents with an include mechanism.

A config may name a parent via ``"include": "relative/path.json"``; the
parent is loaded first and the child's keys overlay it.  Unknown keys
are rejected against the per-command schemas below, so presets stay
auditable: the figure captions are encoded as data, not flags.
"""

from __future__ import annotations

import json
import os


class ConfigError(ValueError):
    """Schema violation or unreadable config document."""


# command -> {key: type or tuple of types}; lists are validated elementwise.
SCHEMAS = {
    "gen": {
        "command": str,
        "family": str,
        "count": int,
        "seed": int,
        "negativity_interval": list,
        "epsilon": (int, float),
        "werner_p": (int, float),
        "mix_terms_range": list,
        "out": str,
        "name": str,
    },
    "train": {
        "command": str,
        "datasets": list,
        "class_labels": list,
        "topology": str,
        "optimizer": str,
        "batch_size": int,
        "train_fraction": (int, float),
        "max_epochs": int,
        "patience": int,
        "seed": int,
        "out": str,
        "name": str,
    },
    "eval": {
        "command": str,
        "model": str,
        "datasets": list,
        "class_labels": list,
    },
    "repro": {
        "command": str,
        "experiment": str,
        "scale": str,
        "seed": int,
        "jobs": int,
        "repetitions": int,
        "max_epochs": int,
        "out": str,
    },
}


def load_config(path) -> dict:
    """Read a JSON config, resolving ``include`` chains relative to each file."""
    path = os.fspath(path)
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: config root must be an object")
    merged = {}
    if "include" in doc:
        parent = os.path.join(os.path.dirname(path), doc.pop("include"))
        merged.update(load_config(parent))
    merged.update(doc)
    return merged


def validate_config(cfg: dict, command: str) -> dict:
    """Reject unknown keys and wrong value types for the given command."""
    schema = SCHEMAS.get(command)
    if schema is None:
        raise ConfigError(f"unknown command {command!r}")
    out = {}
    for key, value in cfg.items():
        if key not in schema:
            raise ConfigError(f"unknown config key {key!r} for command {command!r}")
        expected = schema[key]
        if isinstance(expected, tuple):
            ok = isinstance(value, expected) and not isinstance(value, bool)
        else:
            ok = isinstance(value, expected) and not isinstance(value, bool)
        if not ok:
            raise ConfigError(
                f"config key {key!r} expects {expected}, got {type(value).__name__}"
            )
        out[key] = value
    declared = out.get("command")
    if declared is not None and declared != command:
        raise ConfigError(f"config declares command {declared!r}, invoked as {command!r}")
    return out
