"""JSON encodings shared by the library and the CLI.

Matrices are ``{"rows": r, "cols": c, "entries": [[re, im], ...]}`` in
row-major order; real vectors are ``{"values": [...]}``.
"""

from __future__ import annotations

import json
import math

import numpy as np

from .matrix_core import as_matrix


class SchemaError(ValueError):
    """Malformed JSON input; the message names the offending field."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


def matrix_to_json(m) -> dict:
    m = np.asarray(m, dtype=np.complex128)
    rows, cols = m.shape
    return {
        "rows": rows,
        "cols": cols,
        "entries": [[float(z.real), float(z.imag)] for z in m.ravel()],
    }


def matrix_from_json(doc, field: str = "matrix") -> np.ndarray:
    if not isinstance(doc, dict):
        raise SchemaError(field, "expected an object with rows/cols/entries")
    for key in ("rows", "cols", "entries"):
        if key not in doc:
            raise SchemaError(f"{field}.{key}", "missing")
    rows, cols, entries = doc["rows"], doc["cols"], doc["entries"]
    if not (isinstance(rows, int) and isinstance(cols, int)) or rows < 1 or cols < 1:
        raise SchemaError(f"{field}.rows", "rows and cols must be positive integers")
    if not isinstance(entries, list) or len(entries) != rows * cols:
        raise SchemaError(f"{field}.entries", f"expected {rows * cols} [re, im] pairs")
    flat = []
    for k, pair in enumerate(entries):
        if (
            not isinstance(pair, (list, tuple))
            or len(pair) != 2
            or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in pair)
        ):
            raise SchemaError(f"{field}.entries[{k}]", "expected [re, im] numbers")
        if not all(math.isfinite(x) for x in pair):
            raise SchemaError(f"{field}.entries[{k}]", "entries must be finite")
        flat.append(complex(pair[0], pair[1]))
    return as_matrix(np.array(flat, dtype=np.complex128).reshape(rows, cols))


def vector_to_json(values) -> dict:
    return {"values": [float(x) for x in values]}


def vector_from_json(doc, field: str = "vector") -> np.ndarray:
    """Accept ``{"values": [...]}`` or a bare list."""
    if isinstance(doc, dict):
        if "values" not in doc:
            raise SchemaError(f"{field}.values", "missing")
        doc = doc["values"]
    if not isinstance(doc, list) or not doc:
        raise SchemaError(field, "expected a non-empty list of numbers")
    for k, x in enumerate(doc):
        if not isinstance(x, (int, float)) or isinstance(x, bool) or not math.isfinite(x):
            raise SchemaError(f"{field}[{k}]", "expected a finite number")
    return np.array(doc, dtype=float)


def dumps(doc) -> str:
    # repr-based float output is the shortest string that round-trips exactly
    return json.dumps(doc, allow_nan=False)
