# utils/serialization.py

import csv
import json
import math
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from propagators.errors import FixtureError


def encode_matrix(matrix) -> dict:
    arr = np.asarray(matrix, dtype=complex)
    return {
        "dim": int(arr.shape[0]),
        "rows": [[[float(z.real), float(z.imag)] for z in row] for row in arr],
    }


def encode_vector(vector) -> dict:
    arr = np.asarray(vector, dtype=complex).reshape(-1)
    return {"dim": int(arr.shape[0]), "rows": [[float(z.real), float(z.imag)] for z in arr]}


def _complex_entry(value, location: str) -> complex:
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return complex(value, 0.0)
    if (
        isinstance(value, (list, tuple))
        and len(value) == 2
        and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value)
    ):
        return complex(value[0], value[1])
    raise FixtureError(f"expected [re, im], got {value!r}", location)


def _dim_of(obj, location: str) -> int:
    if not isinstance(obj, dict) or "rows" not in obj:
        raise FixtureError("expected an object with 'dim' and 'rows'", location)
    dim = obj.get("dim", len(obj["rows"]))
    if not isinstance(dim, int) or dim < 1:
        raise FixtureError(f"'dim' must be a positive integer, got {dim!r}", f"{location}.dim")
    if not isinstance(obj["rows"], list) or len(obj["rows"]) != dim:
        raise FixtureError(f"expected {dim} rows", f"{location}.rows")
    return dim


def decode_matrix(obj, location: str = "$") -> np.ndarray:
    dim = _dim_of(obj, location)
    out = np.empty((dim, dim), dtype=complex)
    for i, row in enumerate(obj["rows"]):
        where = f"{location}.rows[{i}]"
        if not isinstance(row, list) or len(row) != dim:
            raise FixtureError(f"expected {dim} entries", where)
        for j, value in enumerate(row):
            out[i, j] = _complex_entry(value, f"{where}[{j}]")
    if not np.all(np.isfinite(out)):
        raise FixtureError("non-finite entry", location)
    return out


def decode_vector(obj, location: str = "$") -> np.ndarray:
    dim = _dim_of(obj, location)
    out = np.array([_complex_entry(v, f"{location}.rows[{i}]") for i, v in enumerate(obj["rows"])], dtype=complex)
    if not np.all(np.isfinite(out)):
        raise FixtureError("non-finite entry", location)
    return out


def _plain(value):
    """Make numpy scalars, arrays and non-finite floats JSON-safe."""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return _plain(value.tolist())
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (np.floating, float)):
        value = float(value)
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return value
    if isinstance(value, complex):
        return [value.real, value.imag]
    return value


def dumps(data) -> str:
    return json.dumps(_plain(data), indent=2, sort_keys=True) + "\n"


def write_json(path, data) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(data), encoding="utf-8")
    return path


def read_json(path):
    path = Path(path)
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError as exc:
        raise FixtureError("file not found", str(path)) from exc
    except json.JSONDecodeError as exc:
        raise FixtureError(exc.msg, f"{path}:{exc.lineno}:{exc.colno}") from exc


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return path


def write_rule_csv(path, rule) -> Path:
    nodes, weights = rule.nodes, rule.weights
    header = [f"x{i + 1}" for i in range(nodes.shape[1])] + ["weight"]
    return write_csv(path, header, (list(node) + [w] for node, w in zip(nodes, weights)))


def write_field(path_stem, field, t: float, extra: Optional[dict] = None) -> Path:
    """Field samples as CSV (index, coordinates, real, imag) plus a JSON header beside it."""
    stem = Path(path_stem)
    coords = field.coordinates()
    values = field.values.reshape(-1)
    flat_coords = [c.reshape(-1) for c in coords]
    header = ["index"] + [f"x{i + 1}" for i in range(len(coords))] + ["re", "im"]
    rows = (
        [k] + [c[k] for c in flat_coords] + [float(values[k].real), float(values[k].imag)]
        for k in range(values.shape[0])
    )
    write_csv(stem.with_suffix(".csv"), header, rows)
    meta = {"dims": list(field.shape), "spacing": list(field.spacing), "lengths": list(field.lengths), "t": t}
    if extra:
        meta.update(extra)
    return write_json(stem.with_suffix(".json"), meta)
