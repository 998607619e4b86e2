"""Plain-text artifacts: field CSVs with grid metadata, traces, residuals, JSON."""
from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

import numpy as np

from .grid import DiscreteField, DomainSpec

_FIELD_TAG = "# kirchfrac-field "


def _grid_header(dom: DomainSpec):
    return {"lower": list(dom.lower), "upper": list(dom.upper), "cells": list(dom.cells),
            "dilation": dom.dilation, "mask": None if dom.mask is None else [int(m) for m in dom.mask]}


def field_to_csv(u: DiscreteField) -> str:
    """One row per grid node: index, coordinates, value (repr precision)."""
    dom = u.domain
    meta = _grid_header(dom)
    meta["extended_by_zero"] = bool(u.extended_by_zero)
    buf = io.StringIO()
    buf.write(_FIELD_TAG + json.dumps(meta, sort_keys=True) + "\n")
    coords = ["x", "y"][: dom.dim]
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["index", *coords, "value"])
    for k, (pt, val) in enumerate(zip(dom.node_coords, u.flat)):
        w.writerow([k, *(repr(float(c)) for c in pt), repr(float(val))])
    return buf.getvalue()


def field_from_csv(text: str) -> DiscreteField:
    lines = text.splitlines()
    if not lines or not lines[0].startswith(_FIELD_TAG):
        raise ValueError("missing field header")
    meta = json.loads(lines[0][len(_FIELD_TAG):])
    dom = DomainSpec(tuple(meta["lower"]), tuple(meta["upper"]), tuple(meta["cells"]),
                     meta["dilation"], None if meta["mask"] is None else tuple(bool(m) for m in meta["mask"]))
    rows = list(csv.DictReader(lines[1:]))
    vals = np.zeros(dom.n_nodes)
    for row in rows:
        vals[int(row["index"])] = float(row["value"])
    return DiscreteField(dom, vals, meta.get("extended_by_zero", True))


def write_field(path, u):
    Path(path).write_text(field_to_csv(u))


def read_field(path) -> DiscreteField:
    return field_from_csv(Path(path).read_text())


def write_residual_csv(path, r_u, r_v):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["index", "r_u", "r_v"])
        for k, (a, b) in enumerate(zip(r_u, r_v)):
            w.writerow([k, repr(float(a)), repr(float(b))])


_TRACE_COLUMNS = ("iteration", "energy", "grad_norm", "step", "certificate", "norm_u", "norm_v")


def write_trace_csv(path, trace):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(_TRACE_COLUMNS)
        for row in trace:
            w.writerow([repr(getattr(row, c)) for c in _TRACE_COLUMNS])


def write_plotdata(path, trace):
    """Whitespace-separated columns for gnuplot: iteration energy grad_norm certificate."""
    with open(path, "w") as fh:
        fh.write("# iteration energy grad_norm certificate\n")
        for row in trace:
            fh.write(f"{row.iteration} {row.energy!r} {row.grad_norm!r} {row.certificate!r}\n")


def jsonable(obj):
    """Recursively convert numpy scalars and non-finite floats (to strings) for strict JSON."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        return f if math.isfinite(f) else str(f)
    return obj


def dumps(obj) -> str:
    return json.dumps(jsonable(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


def write_json(path, obj):
    Path(path).write_text(dumps(obj))
