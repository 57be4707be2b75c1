"""Published reference datasets, stored as their printed summary values."""

from __future__ import annotations

import json
from importlib import resources

import numpy as np

NAMES = ("synthetic", "vectorcardiogram", "heel")


def load(name):
    """Return the named fixture with every list converted to an array."""
    if name not in NAMES:
        raise KeyError(f"unknown fixture {name!r}; choose from {NAMES}")
    text = resources.files(__package__).joinpath("data", f"{name}.json").read_text()
    raw = json.loads(text)
    return {k: np.array(v, dtype=float) if isinstance(v, list) else v
            for k, v in raw.items()}
