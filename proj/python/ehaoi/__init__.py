"""Age-of-information MDP for energy-harvesting sensors with battery recovery."""

import json
import os

from ._core import Error, Model, find_amax as _find_amax, validate as _validate

__all__ = ["Error", "Model", "load", "validate", "find_amax"]


def _text(config):
    """Config as JSON text: a dict, a path to a JSON file, or JSON text."""
    if isinstance(config, dict):
        return json.dumps(config)
    if isinstance(config, (str, os.PathLike)) and os.path.exists(config):
        with open(config, encoding="utf-8") as f:
            return f.read()
    return str(config)


def load(config, overrides=(), state_cap=10_000_000, jobs=1):
    """Build a Model from a dict, file path or JSON text, with key=value overrides."""
    return Model(_text(config), list(overrides), state_cap, jobs)


def validate(config, overrides=()):
    """All (kind, message) violations of a configuration; empty when valid."""
    return _validate(_text(config), list(overrides))


def find_amax(config, overrides=(), **kwargs):
    """Smallest age cap whose optimal cap probability is at most epsilon."""
    return _find_amax(_text(config), list(overrides), **kwargs)
