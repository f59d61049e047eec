"""CSV and JSON writers with a provenance header (version, parameters, seed)."""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path

import numpy as np

from . import __version__


def header(p, seed=None, extra: dict | None = None) -> dict:
    h = {"tool": "chlorostat", "version": __version__, "params": p.as_dict(), "seed": seed}
    if extra:
        h.update(extra)
    return h


def _num(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (np.integer,)):
        return str(int(v))
    return str(v)


def csv_text(head: dict, columns, rows) -> str:
    buf = io.StringIO()
    for key in ("tool", "version", "seed"):
        buf.write(f"# {key}: {head.get(key)}\n")
    buf.write("# params: " + json.dumps(head["params"], sort_keys=True) + "\n")
    for key, val in head.items():
        if key not in ("tool", "version", "seed", "params"):
            buf.write(f"# {key}: {json.dumps(to_jsonable(val), sort_keys=True)}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_num(v) for v in r])
    return buf.getvalue()


def to_jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": float(obj.real), "im": float(obj.imag)}
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, float) and not np.isfinite(obj):
        return None
    return obj


def json_text(head: dict, body: dict) -> str:
    return json.dumps({"header": to_jsonable(head), **to_jsonable(body)}, indent=2, sort_keys=True) + "\n"


def read_csv(path):
    """Rows of a CSV written by csv_text, header comments skipped."""
    with open(path, newline="") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    return list(csv.DictReader(lines))


def emit(text: str, out: str | Path | None, stream) -> None:
    if out is None or str(out) == "-":
        stream.write(text)
    else:
        Path(out).write_text(text)
