"""Access to the versioned JSON schemas shipped with the package."""

from __future__ import annotations

import json
from importlib import resources

SCHEMA_NAMES = (
    "manifest",
    "analysis",
    "distinguish",
    "verdicts",
    "run_report",
    "markov",
    "ablation",
)


def load_schema(name: str) -> dict:
    if name not in SCHEMA_NAMES:
        raise KeyError(f"unknown schema {name!r}; available: {SCHEMA_NAMES}")
    text = resources.files("topoformer.schemas").joinpath(f"{name}.schema.json").read_text()
    return json.loads(text)
