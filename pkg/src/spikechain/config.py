"""TOML experiment configuration: strict parsing (unknown keys are errors)
and a canonical serializer so parse -> serialize -> parse is the identity."""

from __future__ import annotations

import math
from typing import Any

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

import numpy as np

from .models import AgingDescriptor, ModelSpec, PhiDescriptor

__all__ = ["ConfigError", "parse_config", "serialize_config", "model_from_config"]


class ConfigError(ValueError):
    """Malformed configuration: unknown key, bad type, missing section."""


_SCHEMA = {
    "model": {"preset", "neurons", "weights", "neighborhoods"},
    "phi": {"family", "delta", "gamma", "age_a", "age_b"},
    "g": {"family", "C", "beta", "p", "values"},
    "graph": {"n", "theta"},
    "experiment": {
        "subcommand", "window_start", "window_end", "neurons", "horizon",
        "burnin", "reps", "budget", "k_max", "k", "l", "s_grid",
        "target_neuron", "min_spikes", "clans", "time",
    },
    "output": {"dir", "raster", "report"},
}


def parse_config(text: str) -> dict:
    """Parse and validate a configuration document."""
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"configuration does not parse: {exc}") from exc
    for section, body in doc.items():
        if section not in _SCHEMA:
            raise ConfigError(f"unknown section [{section}]")
        if not isinstance(body, dict):
            raise ConfigError(f"section [{section}] must be a table")
        for key in body:
            if key not in _SCHEMA[section]:
                raise ConfigError(f"unknown key {key!r} in section [{section}]")
    return doc


def _fmt_value(v: Any) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, float):
        if math.isinf(v) or math.isnan(v):
            raise ConfigError("non-finite numbers are not serializable")
        return repr(float(v))
    if isinstance(v, str):
        return '"' + v.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_fmt_value(x) for x in v) + "]"
    raise ConfigError(f"cannot serialize value of type {type(v).__name__}")


def serialize_config(doc: dict) -> str:
    """Canonical TOML rendering: fixed section order, sorted keys."""
    lines = []
    for section in _SCHEMA:
        if section not in doc:
            continue
        lines.append(f"[{section}]")
        for key in sorted(doc[section]):
            lines.append(f"{key} = {_fmt_value(doc[section][key])}")
        lines.append("")
    return "\n".join(lines)


_PRESETS = {
    "independent": "independent_preset",
    "two-neuron": "two_neuron_preset",
    "three-neuron": "three_neuron_preset",
    "exponential-memory": "exponential_memory_preset",
    "zd-window": "zd_window_preset",
}


def model_from_config(doc: dict) -> ModelSpec:
    """Build the model described by the [model]/[phi]/[g] sections."""
    from . import models as _models

    model = doc.get("model", {})
    phi_sec = doc.get("phi")
    g_sec = doc.get("g")
    if "preset" in model:
        name = model["preset"]
        if name not in _PRESETS:
            raise ConfigError(f"unknown preset {name!r}")
        kwargs = {}
        if phi_sec and "delta" in phi_sec:
            kwargs["delta"] = float(phi_sec["delta"])
        if phi_sec and "gamma" in phi_sec and name not in ("independent", "exponential-memory"):
            kwargs["gamma"] = float(phi_sec["gamma"])
        try:
            return getattr(_models, _PRESETS[name])(**kwargs)
        except TypeError as exc:
            raise ConfigError(f"preset {name!r} rejects the given parameters: {exc}") from exc
    if "weights" not in model:
        raise ConfigError("[model] needs either a preset or an explicit weights matrix")
    if phi_sec is None or g_sec is None:
        raise ConfigError("explicit models need [phi] and [g] sections")
    weights = np.asarray(model["weights"], dtype=float)
    phi_kwargs = {k: phi_sec[k] for k in ("gamma", "age_a", "age_b") if k in phi_sec}
    try:
        phi = PhiDescriptor(phi_sec["family"], delta=float(phi_sec["delta"]), **phi_kwargs)
        g_kwargs = {}
        if "values" in g_sec:
            g_kwargs["values"] = tuple(g_sec["values"])
        for k in ("C", "beta", "p"):
            if k in g_sec:
                g_kwargs[k] = float(g_sec[k])
        g = AgingDescriptor(g_sec["family"], **g_kwargs)
        neigh = None
        if "neighborhoods" in model:
            neigh = [[frozenset(v) for v in seq] for seq in model["neighborhoods"]]
        return ModelSpec(weights=weights, phi=phi, g=g, neighborhoods=neigh)
    except KeyError as exc:
        raise ConfigError(f"missing required field: {exc}") from exc
