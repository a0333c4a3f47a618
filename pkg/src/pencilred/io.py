"""Pencil files (JSON, Matrix Market) and canonical JSON output."""

from __future__ import annotations

import hashlib
import json
import math
from pathlib import Path

import numpy as np
import scipy.io

from .errors import InputError
from .pencil import Pencil

SCHEMA_VERSION = 1


# -- canonical serialization -------------------------------------------------

def _fmt_float(x: float) -> str:
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    text = "%.17g" % x
    if "." not in text and "e" not in text and "n" not in text:
        text += ".0"
    return text


def _plain(obj):
    """Reduce numpy and complex values to lists, floats, ints, strings and None."""
    if hasattr(obj, "to_dict"):
        return _plain(obj.to_dict())
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    return obj


def _emit(obj, out: list):
    if obj is None:
        out.append("null")
    elif obj is True:
        out.append("true")
    elif obj is False:
        out.append("false")
    elif isinstance(obj, int):
        out.append(str(obj))
    elif isinstance(obj, float):
        out.append(_fmt_float(obj))
    elif isinstance(obj, str):
        out.append(json.dumps(obj, ensure_ascii=True))
    elif isinstance(obj, list):
        out.append("[")
        for i, v in enumerate(obj):
            if i:
                out.append(",")
            _emit(v, out)
        out.append("]")
    elif isinstance(obj, dict):
        out.append("{")
        for i, k in enumerate(sorted(obj)):
            if i:
                out.append(",")
            out.append(json.dumps(k, ensure_ascii=True))
            out.append(":")
            _emit(obj[k], out)
        out.append("}")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def canonical_dumps(obj) -> str:
    """Sorted keys, no whitespace, floats as ``%.17g``, complex as ``[re, im]``."""
    out: list[str] = []
    _emit(_plain(obj), out)
    return "".join(out)


def input_digest(p: Pencil) -> str:
    """SHA-256 of shape, field and little-endian bytes of ``E`` and ``A``."""
    h = hashlib.sha256()
    dt = "<c16" if p.field == "complex" else "<f8"
    h.update(f"{p.m}x{p.n}:{p.field}".encode())
    for M in (p.E, p.A):
        h.update(np.ascontiguousarray(M.astype(dt)).tobytes())
    return h.hexdigest()


# -- pencil files --------------------------------------------------------------

def _matrix_from_json(rows, m: int, n: int, name: str) -> np.ndarray:
    if not isinstance(rows, list) or len(rows) != m:
        raise InputError(f"{name}: expected {m} rows")
    complex_ = False
    vals = []
    for i, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != n:
            raise InputError(f"{name}: row {i} must have {n} entries")
        for x in row:
            if isinstance(x, bool):
                raise InputError(f"{name}: boolean entry in row {i}")
            if isinstance(x, (int, float)):
                vals.append(complex(x))
            elif isinstance(x, list) and len(x) == 2 and all(
                isinstance(t, (int, float)) and not isinstance(t, bool) for t in x
            ):
                vals.append(complex(x[0], x[1]))
                complex_ = True
            else:
                raise InputError(f"{name}: bad entry {x!r} in row {i}")
    M = np.array(vals, dtype=complex).reshape(m, n)
    return M if complex_ else M.real.copy()


def pencil_from_dict(d: dict) -> Pencil:
    if not isinstance(d, dict):
        raise InputError("pencil JSON must be an object")
    version = d.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise InputError(f"unsupported schema_version {version!r}")
    for key in ("E", "A"):
        if key not in d:
            raise InputError(f"missing key {key!r}")
    E_rows = d["E"]
    m = d.get("m", len(E_rows) if isinstance(E_rows, list) else None)
    n = d.get("n", len(E_rows[0]) if isinstance(E_rows, list) and E_rows else 0)
    if not isinstance(m, int) or not isinstance(n, int) or m < 0 or n < 0:
        raise InputError("m and n must be nonnegative integers")
    E = _matrix_from_json(d["E"], m, n, "E")
    A = _matrix_from_json(d["A"], m, n, "A")
    if d.get("field") == "complex":
        E, A = E.astype(complex), A.astype(complex)
    return Pencil(E, A)


def pencil_to_dict(p: Pencil) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "m": p.m,
        "n": p.n,
        "field": p.field,
        "E": p.E,
        "A": p.A,
    }


def read_json(path) -> object:
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON: {exc}") from None
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from None


def _read_mm(path) -> np.ndarray:
    try:
        M = scipy.io.mmread(str(path))
    except (OSError, ValueError) as exc:
        raise InputError(f"{path}: cannot read Matrix Market file: {exc}") from None
    if hasattr(M, "toarray"):
        M = M.toarray()
    return np.asarray(M)


def load_pencil(json_path=None, E_path=None, A_path=None) -> Pencil:
    """Load from one JSON file or from two Matrix Market files."""
    if json_path is not None:
        if E_path is not None or A_path is not None:
            raise InputError("give either a JSON pencil or --E/--A, not both")
        return pencil_from_dict(read_json(json_path))
    if E_path is None or A_path is None:
        raise InputError("both E and A files are required")
    return Pencil(_read_mm(E_path), _read_mm(A_path))


def save_pencil(p: Pencil, path, extra: dict | None = None):
    """JSON for ``*.json``; otherwise two Matrix Market files ``<stem>.E.mtx``, ``<stem>.A.mtx``."""
    path = Path(path)
    if path.suffix == ".json":
        d = pencil_to_dict(p)
        if extra:
            d.update(extra)
        path.write_text(canonical_dumps(d) + "\n")
        return [path]
    out = []
    for name, M in (("E", p.E), ("A", p.A)):
        target = path.with_name(f"{path.stem}.{name}.mtx")
        scipy.io.mmwrite(str(target), M)
        out.append(target)
    return out


def save_report(report, path):
    Path(path).write_text(canonical_dumps(report) + "\n")


def load_report(path) -> dict:
    return read_json(path)
