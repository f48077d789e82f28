"""Deterministic CSV and JSON emitters."""

from __future__ import annotations

import csv
import dataclasses
import io
import json
from fractions import Fraction

import mpmath

from .core import scalar as sc
from .core.linalg import MultiIndex

SCHEMA = "gonlab/1"


def scalar_text(x, digits: int = 12, symbolic: bool = False) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, int):
        return str(x)
    if symbolic and sc.is_exact(x):
        return sc.render(x, digits)
    return sc.decimal(x, digits)


def jsonable(obj, digits: int = 12, symbolic: bool = False):
    """Plain JSON data; scalars become strings so exact values survive."""
    rec = lambda o: jsonable(o, digits, symbolic)  # noqa: E731
    if obj is None or isinstance(obj, (bool, str)):
        return obj
    if isinstance(obj, int):
        return obj
    if isinstance(obj, float):
        return float(f"{obj:.{digits}g}")
    if isinstance(obj, complex):
        return [float(f"{obj.real:.{digits}g}"), float(f"{obj.imag:.{digits}g}")]
    if isinstance(obj, (Fraction, sc.Quadratic, sc.BigReal)):
        return scalar_text(obj, digits, symbolic)
    if isinstance(obj, (mpmath.mpf,)):
        return sc.decimal(obj, digits)
    if isinstance(obj, MultiIndex):
        return str(obj)
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: rec(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(k if not isinstance(k, MultiIndex) else str(k)): rec(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, range)):
        return [rec(v) for v in obj]
    return str(obj)


def json_report(command: str, query: dict, result, ok: bool, digits: int = 12, symbolic: bool = False) -> str:
    payload = {
        "schema": SCHEMA,
        "command": command,
        "query": jsonable(query, digits, symbolic),
        "ok": ok,
        "result": jsonable(result, digits, symbolic),
    }
    return json.dumps(payload, indent=2, sort_keys=False) + "\n"


def csv_text(rows: list[dict], digits: int = 12, symbolic: bool = False) -> str:
    """RFC 4180 text with a header row taken from the first row's keys."""
    buf = io.StringIO()
    if not rows:
        return ""
    header = list(rows[0].keys())
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_cell(r.get(h, ""), digits, symbolic) for h in header])
    return buf.getvalue()


def _cell(x, digits, symbolic):
    if isinstance(x, str):
        return x
    if isinstance(x, (list, tuple)):
        return " ".join(_cell(v, digits, symbolic) for v in x)
    if x is None:
        return ""
    if isinstance(x, float):
        return f"{x:.{digits}g}"
    if isinstance(x, MultiIndex):
        return str(x)
    return scalar_text(x, digits, symbolic)
