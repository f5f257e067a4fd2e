"""Result files: learning-curve CSV, prediction CSV and JSON summaries.

Floats are written with ``repr`` (shortest round-trip form), so reading a
file back reproduces every value bit for bit.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

CURVE_HEADER = ("iteration", "msd_mean_db", "band_lower_db", "band_upper_db", "msd_mean_linear", "msd_std_linear")
PREDICT_HEADER = ("t", "node_id", "true", "estimated")


def fmt(x) -> str:
    return repr(float(x))


def write_curve_csv(path, curve) -> None:
    cols = (curve.msd_mean_db, curve.band_lower_db, curve.band_upper_db, curve.msd_mean_linear, curve.msd_std_linear)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(CURVE_HEADER) + "\n")
        for i in range(curve.iterations):
            fh.write(",".join([str(i)] + [fmt(c[i]) for c in cols]) + "\n")


def read_curve_csv(path) -> dict:
    """Columns of a curve file as numpy arrays keyed by header name."""
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = tuple(next(reader))
        if header != CURVE_HEADER:
            raise ValueError(f"{path}: unexpected header {header}")
        rows = [r for r in reader if r]
    data = np.array([[float(v) for v in r] for r in rows]).reshape(-1, len(CURVE_HEADER))
    out = {h: data[:, j] for j, h in enumerate(CURVE_HEADER)}
    out["iteration"] = out["iteration"].astype(int)
    return out


def write_prediction_csv(path, node_ids, truth, estimates) -> None:
    """``truth`` and ``estimates`` are (N, T); rows are ordered by t then node."""
    N, T = truth.shape
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(PREDICT_HEADER) + "\n")
        for t in range(T):
            for n in range(N):
                fh.write(f"{t},{node_ids[n]},{fmt(truth[n, t])},{fmt(estimates[n, t])}\n")


def _clean(obj):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to None."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    return obj


def write_json(path, obj) -> None:
    Path(path).write_text(json.dumps(_clean(obj), indent=2, sort_keys=True) + "\n", encoding="utf-8")
