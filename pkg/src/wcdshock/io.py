"""
Run manifests and CSV output
----------------------------

A run manifest is a JSON object::

    {
      "model": {"name": "cubic", "params": {"delta": 1.0}},
      "grid": {"x_min": 0.0, "x_max": 1.0, "n_cells": 4000,
               "bc": "outflow_extrapolation"},
      "initial": {"type": "riemann", "left": 2.0, "right": -2.0,
                  "jump_location": 0.3},
      "scheme": {"variant": "standard_wcd", "cfl": 0.45, "t_end": 0.04,
                 "snapshot_times": [0.02]},
      "wcd": {"tau": 0.1, "p": 4, "c": "adaptive", "safety_margin": 0.01},
      "output": {"dir": "out/cubic_uL2"}
    }

System states are given as two-element lists. Instead of Riemann data,
``"initial": {"type": "table", "x": [...], "values": [...]}`` interpolates
a piecewise-linear profile (``values`` is a list of two lists for systems).

.. autoclass:: RunManifest
.. autofunction:: load_manifest
.. autofunction:: write_field_csv
.. autofunction:: read_field_csv
"""

from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from wcdshock.models import MODEL_NAMES, Model, RiemannData, make_model
from wcdshock.scheme import (
    BOUNDARY_CONDITIONS, FieldState, GridSpec, RunConfig, SchemeVariant,
)
from wcdshock.wcd import DEFAULT_MARGIN, WcdConfig


class ManifestError(ValueError):
    """A manifest entry is missing or invalid; ``key`` names it."""

    def __init__(self, key: str, message: str):
        self.key = key
        super().__init__(f"{key}: {message}")


def fmt(value: float) -> str:
    """17 significant digits, enough to round-trip a double."""
    return f"{float(value):.17g}"


# {{{ manifests


def _get(d: Dict[str, Any], key: str, path: str, default: Any = ...):
    if not isinstance(d, dict):
        raise ManifestError(path, "expected an object")
    if key not in d:
        if default is ...:
            raise ManifestError(f"{path}.{key}" if path else key, "missing")
        return default
    return d[key]


def _number(value, key: str) -> float:
    try:
        out = float(value)
    except (TypeError, ValueError):
        raise ManifestError(key, f"expected a number, got {value!r}") from None
    if not np.isfinite(out):
        raise ManifestError(key, "must be finite")
    return out


def _state(value, model: Model, key: str):
    if model.n_components == 1:
        return _number(value, key)
    if not isinstance(value, (list, tuple)) or len(value) != model.n_components:
        raise ManifestError(key, f"expected a list of {model.n_components} numbers")
    return tuple(_number(v, f"{key}[{i}]") for i, v in enumerate(value))


def parse_model(spec) -> Model:
    name = _get(spec, "name", "model")
    if name not in MODEL_NAMES:
        raise ManifestError("model.name", f"unknown model {name!r}, expected one of {MODEL_NAMES}")
    params = _get(spec, "params", "model", {})
    try:
        return make_model(name, params)
    except ValueError as exc:
        raise ManifestError("model.params", str(exc)) from None


def parse_grid(spec) -> GridSpec:
    bc = _get(spec, "bc", "grid", "outflow_extrapolation")
    if bc not in BOUNDARY_CONDITIONS:
        raise ManifestError("grid.bc", f"expected one of {BOUNDARY_CONDITIONS}")
    n = _get(spec, "n_cells", "grid")
    if not isinstance(n, int) or n < 1:
        raise ManifestError("grid.n_cells", "expected a positive integer")
    x_min = _number(_get(spec, "x_min", "grid"), "grid.x_min")
    x_max = _number(_get(spec, "x_max", "grid"), "grid.x_max")
    if not x_max > x_min:
        raise ManifestError("grid.x_max", "must exceed grid.x_min")
    return GridSpec(x_min, x_max, n, bc)


def parse_initial(spec, model: Model):
    kind = _get(spec, "type", "initial")
    if kind == "riemann":
        return RiemannData(
            _state(_get(spec, "left", "initial"), model, "initial.left"),
            _state(_get(spec, "right", "initial"), model, "initial.right"),
            _number(_get(spec, "jump_location", "initial"), "initial.jump_location"))
    if kind == "table":
        xs = np.asarray(_get(spec, "x", "initial"), dtype=float)
        vals = np.asarray(_get(spec, "values", "initial"), dtype=float)
        if xs.ndim != 1 or xs.size < 2 or np.any(np.diff(xs) <= 0):
            raise ManifestError("initial.x", "expected an increasing list of at least two nodes")
        want = xs.shape if model.n_components == 1 else (model.n_components, xs.size)
        if vals.shape != want:
            raise ManifestError("initial.values", f"expected shape {want}, got {vals.shape}")

        def table(x):
            if vals.ndim == 1:
                return np.interp(x, xs, vals)
            return np.stack([np.interp(x, xs, row) for row in vals])

        return table
    raise ManifestError("initial.type", f"expected 'riemann' or 'table', got {kind!r}")


def parse_wcd(spec) -> WcdConfig:
    spec = spec or {}
    tau = _number(_get(spec, "tau", "wcd", 0.1), "wcd.tau")
    p = _get(spec, "p", "wcd", 4)
    if not isinstance(p, int) or p < 1:
        raise ManifestError("wcd.p", "expected a positive integer")
    margin = _number(_get(spec, "safety_margin", "wcd", DEFAULT_MARGIN), "wcd.safety_margin")
    c = _get(spec, "c", "wcd", "adaptive")
    try:
        if isinstance(c, (int, float)):
            return WcdConfig(tau=tau, p=p, mode="fixed", c_fixed=float(c), safety_margin=margin)
        return WcdConfig.parse_c(str(c), tau=tau, p=p, safety_margin=margin)
    except ValueError as exc:
        raise ManifestError("wcd", str(exc)) from None


@dataclass(frozen=True)
class RunManifest:
    config: RunConfig
    out_dir: str
    raw: Dict[str, Any]


def parse_manifest(raw: Dict[str, Any], out_dir: Optional[str] = None) -> RunManifest:
    model = parse_model(_get(raw, "model", ""))
    grid = parse_grid(_get(raw, "grid", ""))
    initial = parse_initial(_get(raw, "initial", ""), model)
    wcd = parse_wcd(raw.get("wcd"))

    scheme = _get(raw, "scheme", "")
    variant = _get(scheme, "variant", "scheme", "standard_wcd")
    try:
        variant = SchemeVariant(variant)
    except ValueError:
        raise ManifestError("scheme.variant",
                            f"expected one of {[v.value for v in SchemeVariant]}") from None
    t_end = _number(_get(scheme, "t_end", "scheme"), "scheme.t_end")
    cfl = _number(_get(scheme, "cfl", "scheme", 0.45), "scheme.cfl")
    snaps = tuple(_number(t, "scheme.snapshot_times")
                  for t in _get(scheme, "snapshot_times", "scheme", []))

    if out_dir is None:
        out_dir = _get(_get(raw, "output", "", {"dir": None}), "dir", "output", None)
    if not out_dir:
        raise ManifestError("output.dir", "missing (or pass --out)")

    try:
        config = RunConfig(model=model, grid=grid, initial=initial, wcd=wcd,
                           variant=variant, cfl=cfl, t_end=t_end, snapshot_times=snaps)
    except ValueError as exc:
        msg = str(exc)
        key = msg.split(":", 1)[0] if ":" in msg else "scheme"
        raise ManifestError(f"scheme.{key}" if "." not in key else key,
                            msg.split(":", 1)[-1].strip()) from None
    return RunManifest(config=config, out_dir=str(out_dir), raw=raw)


def load_json(path: str) -> Dict[str, Any]:
    try:
        with open(path) as f:
            return json.load(f)
    except json.JSONDecodeError as exc:
        raise ManifestError("<file>", f"{path} is not valid JSON: {exc}") from None


def load_manifest(path: str, out_dir: Optional[str] = None) -> RunManifest:
    return parse_manifest(load_json(path), out_dir)


# }}}


# {{{ CSV


def write_rows(path: str, header: Sequence[str], rows) -> None:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])


def write_field_csv(path: str, field: FieldState, component_names: Sequence[str]) -> None:
    x = field.grid.x
    vals = np.atleast_2d(field.values)
    write_rows(path, ["x", *component_names],
               ([fmt(x[i]), *(fmt(v) for v in vals[:, i])] for i in range(x.size)))


def read_field_csv(path: str):
    """Return ``(x, values, names)`` with ``values`` of shape ``(m, n)``."""
    with open(path) as f:
        reader = csv.reader(f)
        header = next(reader)
        data = np.array([[float(v) for v in row] for row in reader if row], dtype=float)
    if data.ndim != 2 or data.shape[1] < 2 or header[0] != "x":
        raise ValueError(f"{path}: expected columns x,<components>")
    return data[:, 0], data[:, 1:].T, header[1:]


def write_json(path: str, obj) -> None:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w") as f:
        json.dump(obj, f, indent=2, sort_keys=True)
        f.write("\n")


# }}}
