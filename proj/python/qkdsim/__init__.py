"""Python front end to the qkdsim simulator.

Scenarios are given as YAML text, a path to a YAML file, or keyword
overrides on top of either:

    >>> import qkdsim
    >>> report = qkdsim.run(protocol="three_stage_auth", adversary={"kind": "mitm"})
    >>> report["abort_reason"]
    'integrity'
"""

import json
import os

from . import _core
from ._core import (
    REPORT_SCHEMA_VERSION,
    ConfigError,
    ConfigFileError,
    config_keys,
    csv_columns,
    pauli,
    rotation,
    sift,
)

__all__ = [
    "REPORT_SCHEMA_VERSION",
    "ConfigError",
    "ConfigFileError",
    "config_keys",
    "csv_columns",
    "explain",
    "pauli",
    "rotation",
    "run",
    "run_batch",
    "sift",
    "transcript",
]


def _flatten(prefix, value, out):
    if isinstance(value, dict):
        for k, v in value.items():
            _flatten(f"{prefix}.{k}" if prefix else k, v, out)
    elif isinstance(value, bool):
        out.append(f"{prefix}={'true' if value else 'false'}")
    else:
        out.append(f"{prefix}={value}")


def _source(config, overrides, options):
    yaml = ""
    if config is not None:
        if "\n" in config or (":" in config and not os.path.exists(config)):
            yaml = config
        else:
            with open(_core.resolve_config_path(config), encoding="utf-8") as f:
                yaml = f.read()
    flat = list(overrides or [])
    _flatten("", options, flat)
    return yaml, flat


def run(config=None, overrides=None, *, format="json", **options):
    """Run one scenario. Returns the report as a dict (json) or CSV text."""
    yaml, flat = _source(config, overrides, options)
    if format == "csv":
        return _core.run_scenario_csv(yaml, flat)
    if format != "json":
        raise ValueError("format must be 'json' or 'csv'")
    return json.loads(_core.run_scenario_json(yaml, flat))


def run_batch(config=None, trials=100, overrides=None, *, format="json", **options):
    """Run `trials` seeded trials and return aggregate statistics."""
    yaml, flat = _source(config, overrides, options)
    if format == "csv":
        return _core.run_batch_csv(yaml, trials, flat)
    if format != "json":
        raise ValueError("format must be 'json' or 'csv'")
    return json.loads(_core.run_batch_json(yaml, trials, flat))


def transcript(config=None, overrides=None, **options):
    """Channel events of one run, including payload amplitudes."""
    yaml, flat = _source(config, overrides, options)
    return [json.loads(line) for line in _core.run_transcript_jsonl(yaml, flat).splitlines()]


def explain(config=None, overrides=None, **options):
    """Canonical YAML of the fully resolved scenario."""
    yaml, flat = _source(config, overrides, options)
    return _core.canonical_yaml(yaml, flat)
