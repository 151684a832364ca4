"""JSON file formats for tomograms, counts tables and run summaries.

Every document carries a ``"format"`` tag and is validated against its JSON
schema on both read and write. Floats are written with ``repr`` precision, so
reading a file back reproduces the arrays bit for bit. NaN and infinity are
rejected.
"""
from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Any

import jsonschema
import numpy as np

from .circuit.core import CountsTable
from .tomography import JointFieldTomogram, OpticalTomogram, QuadratureGrid, SpinTomogram
from .validation import InvariantViolation

TOMOGRAM_FORMAT = "tomoent.tomogram/1"
COUNTS_FORMAT = "tomoent.counts/1"
SUMMARY_FORMAT = "tomoent.summary/1"
INDICATORS_FORMAT = "tomoent.indicators/1"

# element types and shapes of the (possibly huge) value arrays are checked with numpy
_NESTED_NUMBERS = {"type": "array"}

_GRID = {
    "type": "object",
    "required": ["x_max", "n_points", "thetas"],
    "properties": {
        "x_max": {"type": "number", "exclusiveMinimum": 0},
        "n_points": {"type": "integer", "minimum": 64},
        "thetas": {"type": "array", "items": {"type": "number"}, "minItems": 1},
    },
    "additionalProperties": False,
}

TOMOGRAM_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "$defs": {"nested": _NESTED_NUMBERS, "grid": _GRID},
    "type": "object",
    "required": ["format", "kind", "labels", "values"],
    "properties": {
        "format": {"const": TOMOGRAM_FORMAT},
        "kind": {"enum": ["spin", "optical", "joint_optical"]},
        "labels": {"type": "array", "items": {"type": "string"}, "minItems": 1},
        "axes": {"type": "array", "items": {"enum": ["x", "y", "z"]}, "minItems": 1},
        "grid": {"$ref": "#/$defs/grid"},
        "values": {"$ref": "#/$defs/nested"},
        "shots": {"type": ["integer", "null"], "minimum": 1},
        "counts": {"$ref": "#/$defs/nested"},
    },
    "allOf": [
        {"if": {"properties": {"kind": {"const": "spin"}}}, "then": {"required": ["axes"]}},
        {"if": {"properties": {"kind": {"enum": ["optical", "joint_optical"]}}}, "then": {"required": ["grid"]}},
        {"if": {"required": ["counts"]}, "then": {"required": ["shots"]}},
    ],
    "additionalProperties": False,
}

COUNTS_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["format", "setting", "shots", "counts"],
    "properties": {
        "format": {"const": COUNTS_FORMAT},
        "setting": {"type": "array", "items": {"enum": ["x", "y", "z"]}},
        "qubits": {"type": "array", "items": {"type": "integer", "minimum": 0}},
        "shots": {"type": "integer", "minimum": 1},
        "counts": {
            "type": "object",
            "propertyNames": {"pattern": "^[01]+$"},
            "additionalProperties": {"type": "integer", "minimum": 0},
        },
        "seed": {"type": "integer"},
    },
    "additionalProperties": False,
}

SUMMARY_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["format", "source", "blocks", "runs"],
    "properties": {
        "format": {"const": SUMMARY_FORMAT},
        "source": {"type": "string"},
        "blocks": {"type": "array", "items": {"type": "array", "items": {"type": "string"}}},
        "shots": {"type": "integer", "minimum": 0},
        "runs": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["xi_tei", "xi_tei_prime"],
                "properties": {
                    "seed": {"type": ["integer", "null"]},
                    "xi_tei": {"type": "number"},
                    "xi_tei_prime": {"type": "number"},
                },
            },
        },
        "mean": {"type": "object"},
        "std": {"type": "object"},
    },
}

INDICATORS_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["format", "results"],
    "properties": {
        "format": {"const": INDICATORS_FORMAT},
        "results": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["sources", "blocks", "xi_tei", "xi_tei_prime", "settings"],
                "properties": {
                    "sources": {"type": "array", "items": {"type": "string"}},
                    "blocks": {"type": "array", "items": {"type": "array", "items": {"type": "string"}}},
                    "xi_tei": {"type": "number", "minimum": 0},
                    "xi_tei_prime": {"type": "number", "minimum": 0},
                    "settings": {
                        "type": "array",
                        "items": {
                            "type": "object",
                            "required": ["setting", "mi"],
                            "properties": {"setting": {"type": "array"}, "mi": {"type": "number"}},
                        },
                    },
                },
            },
        },
    },
}


class FormatError(ValueError):
    pass


_ARRAY_KEYS = ("values", "counts")


def _check_finite(obj: Any, where: str = "$") -> None:
    if isinstance(obj, float) and not math.isfinite(obj):
        raise InvariantViolation(f"non-finite number at {where}")
    if isinstance(obj, dict):
        for k, v in obj.items():
            if k not in _ARRAY_KEYS:
                _check_finite(v, f"{where}.{k}")
    elif isinstance(obj, list):
        for i, v in enumerate(obj):
            _check_finite(v, f"{where}[{i}]")


def _reject_constant(name: str):
    raise InvariantViolation(f"non-finite number {name} in input")


def _validate(doc: dict, schema: dict) -> None:
    _check_finite(doc)
    try:
        jsonschema.validate(doc, schema)
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise FormatError(f"{path}: {exc.message}") from None


def _dump(doc: dict, schema: dict, path: str | Path | None) -> str:
    _validate(doc, schema)
    try:
        text = json.dumps(doc, indent=1, allow_nan=False) + "\n"
    except ValueError as exc:
        raise InvariantViolation(f"refusing to write non-finite values ({exc})") from None
    if path is not None:
        Path(path).write_text(text)
    return text


def _load(source: str | Path | dict, schema: dict) -> dict:
    if isinstance(source, dict):
        doc = source
    else:
        try:
            doc = json.loads(Path(source).read_text(), parse_constant=_reject_constant)
        except json.JSONDecodeError as exc:
            raise FormatError(f"{source}: not valid JSON ({exc})") from None
    _validate(doc, schema)
    return doc


def _grid_doc(grid: QuadratureGrid) -> dict:
    return {"x_max": float(grid.x_max), "n_points": int(grid.n_points), "thetas": [float(t) for t in grid.thetas]}


def tomogram_to_dict(tomogram, counts: np.ndarray | None = None) -> dict:
    if isinstance(tomogram, SpinTomogram):
        doc = {"kind": "spin", "labels": list(tomogram.labels), "axes": list(tomogram.axes)}
        if tomogram.shots is not None:
            doc["shots"] = int(tomogram.shots)
    elif isinstance(tomogram, OpticalTomogram):
        doc = {"kind": "optical", "labels": [tomogram.label], "grid": _grid_doc(tomogram.grid)}
    elif isinstance(tomogram, JointFieldTomogram):
        doc = {"kind": "joint_optical", "labels": list(tomogram.labels), "grid": _grid_doc(tomogram.grid)}
    else:
        raise TypeError(f"cannot serialize {type(tomogram).__name__}")
    doc = {"format": TOMOGRAM_FORMAT, **doc, "values": np.asarray(tomogram.values, dtype=float).tolist()}
    if counts is not None:
        doc["counts"] = np.asarray(counts, dtype=int).tolist()
    return doc


def _array(values, shape: tuple[int, ...], what: str, integer: bool = False) -> np.ndarray:
    try:
        arr = np.array(values)
    except ValueError:
        raise FormatError(f"{what} must be a rectangular array") from None
    if arr.shape != shape:
        raise FormatError(f"{what} has shape {arr.shape}, expected {shape}")
    if arr.dtype.kind not in ("i", "f") or (integer and arr.dtype.kind != "i"):
        raise FormatError(f"{what} must contain {'integers' if integer else 'numbers'} only")
    arr = arr.astype(float)
    if not np.all(np.isfinite(arr)):
        raise InvariantViolation(f"{what} contains non-finite numbers")
    return arr


def tomogram_from_dict(doc: dict):
    _validate(doc, TOMOGRAM_SCHEMA)
    labels = tuple(doc["labels"])
    if doc["kind"] == "spin":
        axes = tuple(doc["axes"])
        k = len(labels)
        shape = (len(axes),) * k + (2,) * k
        values = _array(doc["values"], shape, "values")
        shots = doc.get("shots")
        if "counts" in doc:
            counts = _array(doc["counts"], shape, "counts", integer=True)
            per_setting = counts.reshape((len(axes),) * k + (-1,)).sum(axis=-1)
            if np.any(per_setting != shots):
                raise FormatError("every setting's counts must sum to shots")
            values = counts / shots
        return SpinTomogram(labels, axes, values, shots)
    grid = QuadratureGrid(**{**doc["grid"], "thetas": tuple(doc["grid"]["thetas"])})
    n_t, n_x = len(grid.thetas), grid.n_points
    if doc["kind"] == "optical":
        if len(labels) != 1:
            raise FormatError("an optical tomogram has exactly one label")
        return OpticalTomogram(grid, _array(doc["values"], (n_t, n_x), "values"), labels[0])
    if len(labels) != 2:
        raise FormatError("a joint optical tomogram has exactly two labels")
    return JointFieldTomogram(grid, _array(doc["values"], (n_t, n_t, n_x, n_x), "values"), labels)


def write_tomogram(tomogram, path: str | Path | None = None, counts: np.ndarray | None = None) -> str:
    return _dump(tomogram_to_dict(tomogram, counts), TOMOGRAM_SCHEMA, path)


def read_tomogram(source: str | Path | dict):
    return tomogram_from_dict(_load(source, TOMOGRAM_SCHEMA))


def counts_to_dict(table: CountsTable, seed: int | None = None) -> dict:
    doc = {"format": COUNTS_FORMAT, "setting": list(table.setting)}
    if table.qubits:
        doc["qubits"] = list(table.qubits)
    doc["shots"] = int(table.shots)
    doc["counts"] = {k: int(v) for k, v in sorted(table.counts.items())}
    if seed is not None:
        doc["seed"] = int(seed)
    return doc


def write_counts(table: CountsTable, path: str | Path | None = None, seed: int | None = None) -> str:
    return _dump(counts_to_dict(table, seed), COUNTS_SCHEMA, path)


def read_counts(source: str | Path | dict) -> CountsTable:
    doc = _load(source, COUNTS_SCHEMA)
    widths = {len(k) for k in doc["counts"]}
    if len(widths) > 1 or (widths and widths.pop() != len(doc["setting"])):
        raise FormatError("bitstring length must equal the number of measured qubits")
    try:
        return CountsTable(tuple(doc["setting"]), dict(doc["counts"]), doc["shots"], tuple(doc.get("qubits", ())))
    except ValueError as exc:
        raise FormatError(str(exc)) from None


def write_summary(doc: dict, path: str | Path | None = None) -> str:
    return _dump({"format": SUMMARY_FORMAT, **doc}, SUMMARY_SCHEMA, path)


def read_summary(source: str | Path | dict) -> dict:
    return _load(source, SUMMARY_SCHEMA)


def document_format(path: str | Path) -> str:
    """The ``"format"`` tag of a JSON document."""
    try:
        doc = json.loads(Path(path).read_text(), parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: not valid JSON ({exc})") from None
    if not isinstance(doc, dict) or "format" not in doc:
        raise FormatError(f"{path}: missing 'format' tag")
    return doc["format"]


def write_counts_tomogram(tomogram: SpinTomogram, path: str | Path | None = None) -> str:
    """Spin tomogram estimated from counts, stored together with the raw counts."""
    if tomogram.shots is None:
        raise ValueError("tomogram carries no shot count")
    counts = np.rint(tomogram.values * tomogram.shots).astype(int)
    return write_tomogram(tomogram, path, counts)


def write_indicators(results: list[dict], path: str | Path | None = None) -> str:
    return _dump({"format": INDICATORS_FORMAT, "results": results}, INDICATORS_SCHEMA, path)


def read_indicators(source: str | Path | dict) -> dict:
    return _load(source, INDICATORS_SCHEMA)
