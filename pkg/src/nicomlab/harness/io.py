"""Trace CSV and summary JSON writers."""

from __future__ import annotations

import csv
import io
import json
from fractions import Fraction
from pathlib import Path

from nicomlab.core import Trace, canonical, fmt_fraction, fmt_type


def fmt_value(x) -> str:
    """Rationals as "num/den", floats as their shortest round-trip repr."""
    if isinstance(x, Fraction):
        return fmt_fraction(x)
    if isinstance(x, float):
        return repr(x)
    if x is None:
        return ""
    return str(x)


def fmt_profile(profile) -> str:
    return ";".join(fmt_type(x) for x in profile)


def trace_header(n: int) -> list:
    return (["round", "sampled_hedge_index", "lambda", "reports", "true_types", "outcome",
             "objective_value"] + [f"u_{i}" for i in range(n)])


def trace_rows(trace: Trace) -> list:
    rows = []
    for r in trace.records:
        rows.append([
            str(r.round),
            "" if r.sampled_index is None else str(r.sampled_index),
            fmt_value(Fraction(r.lam)),
            fmt_profile(r.reports),
            fmt_profile(r.types),
            canonical(r.outcome),
            fmt_value(r.objective_value),
            *(fmt_value(u) for u in r.utilities),
        ])
    return rows


def trace_csv(trace: Trace, n: int) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(trace_header(n))
    w.writerows(trace_rows(trace))
    return buf.getvalue()


def write_trace(path, trace: Trace, n: int) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(trace_csv(trace, n))
    return path


def _jsonable(x):
    if isinstance(x, Fraction):
        return fmt_fraction(x)
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


def write_json(path, payload: dict) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_jsonable(payload), indent=2, sort_keys=True) + "\n")
    return path
