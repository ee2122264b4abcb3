"""Readers and writers for the on-disk formats: space JSON, measure and curve CSVs, result CSVs."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .curves import MetricOracle, SampledCurve
from .errors import ConfigError
from .mms import AnalyticSpace1D, FiniteWeightedSpace, IntervalSet
from .wasserstein import DiscreteMeasure


def _reject_constant(token):
    raise ConfigError(f"non-finite number {token!r} is not allowed")


def _finite_float(text):
    x = float(text)
    if not math.isfinite(x):
        raise ConfigError(f"number {text!r} overflows to a non-finite value")
    return x


def loads_strict(text: str):
    """``json.loads`` that rejects ``NaN`` / ``Infinity`` and overflowing literals."""
    try:
        return json.loads(text, parse_constant=_reject_constant, parse_float=_finite_float)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc}") from exc


def load_json(path) -> object:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    return loads_strict(text)


def space_from_dict(d: dict):
    if not isinstance(d, dict) or "type" not in d:
        raise ConfigError("space must be an object with a 'type' field")
    kind = d["type"]
    try:
        if kind == "finite":
            extra = set(d) - {"type", "m", "edges", "name"}
            if extra:
                raise ConfigError(f"unknown space keys {sorted(extra)}")
            edges = [(int(x), int(y), float(w)) for x, y, w in d["edges"]]
            return FiniteWeightedSpace.from_edges(d["m"], edges, name=d.get("name", "finite"))
        if kind == "analytic":
            extra = set(d) - {"type", "kind", "sigma"}
            if extra:
                raise ConfigError(f"unknown space keys {sorted(extra)}")
            return AnalyticSpace1D(d.get("kind", "reflecting_interval"), float(d.get("sigma", 1.0)))
    except ConfigError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid {kind} space: {exc}") from exc
    raise ConfigError(f"unknown space type {kind!r}")


def load_space(path):
    return space_from_dict(load_json(path))


def parse_set(space, spec):
    """Index list for finite spaces; an interval ``[a, b]`` or list of intervals otherwise."""
    try:
        if isinstance(space, FiniteWeightedSpace):
            idx = space.as_index([int(i) for i in spec])
            return idx
        return space.as_set(IntervalSet.coerce(spec))
    except (TypeError, ValueError, IndexError) as exc:
        raise ConfigError(f"invalid set {spec!r}: {exc}") from exc


def set_label(A) -> str:
    if isinstance(A, IntervalSet):
        return " ".join(f"[{a!r},{b!r}]" for a, b in A.intervals)
    return "{" + ",".join(str(int(i)) for i in np.atleast_1d(A)) + "}"


def _rows(path):
    try:
        with open(path, newline="") as fh:
            rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    if rows:
        try:
            float(rows[0][0])
        except ValueError:
            rows = rows[1:]  # header
    try:
        return np.array([[_finite_float(c) for c in r] for r in rows], dtype=float)
    except (ValueError, ConfigError) as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def load_measure_csv(path) -> DiscreteMeasure:
    """Rows of ``atom, weight``; an optional header line is skipped."""
    data = _rows(path)
    if data.ndim != 2 or data.shape[1] != 2:
        raise ConfigError(f"{path}: expected two columns (atom, weight)")
    try:
        return DiscreteMeasure.build(data[:, 0], data[:, 1])
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def load_curve_csv(path, metric: MetricOracle) -> SampledCurve:
    """Rows of ``t, point``, linearly interpolated."""
    data = _rows(path)
    if data.ndim != 2 or data.shape[1] != 2:
        raise ConfigError(f"{path}: expected two columns (t, point)")
    try:
        return SampledCurve.from_samples(data[:, 0], data[:, 1], metric, name=Path(path).stem)
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def fmt(x) -> str:
    """17 significant digits for floats so CSVs are reproducible byte for byte."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    if x is None:
        return ""
    return str(x)


def write_csv(path, columns, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([fmt(r.get(c)) for c in columns])
