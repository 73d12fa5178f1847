"""CSV/JSON writers. Every float is written with 6 significant digits."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

from .adoption import KIND_ORDER
from .indices import AifHistogram
from .mcengine import ScenarioResult

TRACE_HEADER = ["batch", "n", "saifi_mean", "saifi_half", "saidi_mean", "saidi_half"]


def fmt(value) -> str:
    if isinstance(value, bool) or value is None:
        return str(value)
    if isinstance(value, int):
        return str(value)
    v = float(value)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return f"{v:.6g}"


def _round(obj):
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return obj
    if isinstance(obj, float):
        return float(f"{obj:.6g}") if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: _round(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round(v) for v in obj]
    if hasattr(obj, "item"):  # numpy scalar
        return _round(obj.item())
    return obj


def dumps(obj) -> str:
    return json.dumps(_round(obj), indent=2, sort_keys=False) + "\n"


def write_json(path, obj) -> None:
    Path(path).write_text(dumps(obj), encoding="utf-8")


def write_histogram(path, hist: AifHistogram) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["bin_lo", "bin_hi", "count"])
        for lo, hi, count in hist.rows():
            w.writerow([fmt(lo), fmt(hi), count])


def write_trace(path, result: ScenarioResult, scenario_code: str | None = None, append: bool = False) -> None:
    mode = "a" if append else "w"
    with open(path, mode, newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if not append:
            w.writerow((["scenario"] if scenario_code else []) + TRACE_HEADER)
        for row in result.trace:
            w.writerow(([scenario_code] if scenario_code else []) + [fmt(v) for v in row])


def write_matrix(path, matrix) -> None:
    codes = [k.value for k in KIND_ORDER]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["pv\\es"] + codes)
        for code, row in zip(codes, matrix):
            w.writerow([code] + [fmt(v) for v in row])


def read_matrix(path):
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    return [[float(v) for v in r[1:]] for r in rows[1:]]


def write_scenario_outputs(out_dir, result: ScenarioResult, include_runtime: bool = True) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_json(out / "summary.json", result.summary(include_runtime))
    write_histogram(out / "aif_hist.csv", result.aif_histogram)
    write_trace(out / "convergence.csv", result)
