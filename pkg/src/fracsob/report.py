"""CSV and JSON artefact writers.

CSV files open with a versioned comment line ``# fracsob-csv v1 kind=<kind>``.
Floats are written with ``repr`` so identical inputs give identical bytes.
Files are written to a temporary name and renamed, so an interrupted run
leaves no partial artefact.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from pathlib import Path

import numpy as np

CSV_VERSION = "v1"

__all__ = ["CSV_VERSION", "csv_text", "json_text", "write_text_atomic", "write_csv", "write_json",
           "read_csv_rows", "to_jsonable", "psi_to_csv"]


def _cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if v is None:
        return ""
    return str(v)


def csv_text(rows: list[dict], kind: str) -> str:
    """Rows as versioned CSV text; columns in first-seen order."""
    cols: list[str] = []
    for r in rows:
        for k in r:
            if k not in cols:
                cols.append(k)
    buf = io.StringIO()
    buf.write(f"# fracsob-csv {CSV_VERSION} kind={kind}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in rows:
        w.writerow([_cell(r.get(c)) for c in cols])
    return buf.getvalue()


def to_jsonable(obj):
    """Convert numpy containers and non-finite floats to JSON-safe values."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    return obj


def json_text(obj) -> str:
    return json.dumps(to_jsonable(obj), indent=2, sort_keys=True) + "\n"


def write_text_atomic(path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)
    return path


def write_csv(path, rows: list[dict], kind: str) -> Path:
    return write_text_atomic(path, csv_text(rows, kind))


def write_json(path, obj) -> Path:
    return write_text_atomic(path, json_text(obj))


def read_csv_rows(path) -> tuple[str, list[dict]]:
    """Inverse of :func:`write_csv`: ``(kind, rows)`` with string cells."""
    lines = Path(path).read_text().splitlines()
    if not lines or not lines[0].startswith(f"# fracsob-csv {CSV_VERSION} kind="):
        raise ValueError("not a fracsob CSV file")
    kind = lines[0].split("kind=", 1)[1]
    return kind, list(csv.DictReader(lines[1:]))


def psi_to_csv(psi, path, p=None) -> Path:
    """Tabulation ``(p, value)`` of a weight; nodes of a tabulated rule by default."""
    if p is None:
        p = psi.nodes if psi.kind == "tabulated" else psi.dense_grid(256)
    p = np.asarray(p, dtype=float)
    return write_csv(path, [{"p": float(a), "value": float(b)} for a, b in zip(p, psi(p))], "psi")
