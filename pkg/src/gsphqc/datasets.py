"""Station CSV ingestion.

Format (UTF-8, one station per row)::

    station_id,lat,lon,v1,v2,...,vT

Line numbers in errors are 1-based and count the header as line 1.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ParseError, SchemaError
from .graph import GeoPoint

log = logging.getLogger(__name__)

MISSING = {"", "na", "nan", "null"}


@dataclass(frozen=True)
class StationDataset:
    station_ids: tuple
    points: tuple  # GeoPoint per station
    values: np.ndarray  # (stations, T)
    dropped: tuple = field(default=(), compare=False)  # (line, station_id) of rejected rows

    @property
    def node_count(self) -> int:
        return len(self.station_ids)

    @property
    def series_length(self) -> int:
        return self.values.shape[1]

    def snapshot(self, t: int) -> np.ndarray:
        """Graph signal at time index ``t`` (0-based)."""
        if not 0 <= t < self.series_length:
            raise IndexError(f"time index {t} outside [0, {self.series_length})")
        return self.values[:, t].copy()


def _header(row) -> int:
    if len(row) < 4 or [c.strip() for c in row[:3]] != ["station_id", "lat", "lon"]:
        raise SchemaError("header must start with station_id,lat,lon followed by v1..vT", line=1)
    expected = [f"v{i}" for i in range(1, len(row) - 2)]
    if [c.strip() for c in row[3:]] != expected:
        raise SchemaError(f"value columns must be named v1..v{len(expected)}", line=1)
    return len(expected)


def _coord(text, name, line, lo, hi):
    try:
        v = float(text)
    except ValueError:
        raise ParseError(f"{name} {text!r} is not a number", line=line) from None
    if not (math.isfinite(v) and lo <= v <= hi):
        raise ParseError(f"{name} {v!r} outside [{lo}, {hi}]", line=line)
    return v


def load_station_csv(path) -> StationDataset:
    """Parse a station file; stations with missing values are dropped with a warning."""
    ids, points, rows, dropped = [], [], [], []
    with open(Path(path), encoding="utf-8-sig", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError("empty file", line=1) from None
        T = _header(header)
        seen = set()
        for row in reader:
            line = reader.line_num
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != T + 3:
                raise SchemaError(f"expected {T} values, found {len(row) - 3}", line=line)
            sid = row[0].strip()
            if not sid:
                raise ParseError("empty station_id", line=line)
            if sid in seen:
                raise ParseError(f"duplicate station_id {sid!r}", line=line)
            seen.add(sid)
            lat = _coord(row[1], "lat", line, -90.0, 90.0)
            lon = _coord(row[2], "lon", line, -180.0, 180.0)
            vals, missing = [], False
            for j, cell in enumerate(row[3:], start=1):
                c = cell.strip()
                if c.lower() in MISSING:
                    missing = True
                    continue
                try:
                    v = float(c)
                except ValueError:
                    raise ParseError(f"v{j} {c!r} is not a number", line=line) from None
                if not math.isfinite(v):
                    raise ParseError(f"v{j} is not finite", line=line)
                vals.append(v)
            if missing:
                log.warning("line %d: station %s has missing values, dropped", line, sid)
                dropped.append((line, sid))
                continue
            ids.append(sid)
            points.append(GeoPoint(lat, lon))
            rows.append(vals)
    if not ids:
        raise SchemaError("no complete station rows")
    return StationDataset(tuple(ids), tuple(points), np.array(rows, dtype=float), tuple(dropped))


def write_station_csv(path, station_ids, points, values) -> None:
    """Write a station file in the format read by :func:`load_station_csv`."""
    values = np.atleast_2d(np.asarray(values, dtype=float))
    with open(Path(path), "w", encoding="utf-8", newline="\n") as fh:
        T = values.shape[1]
        fh.write(",".join(["station_id", "lat", "lon"] + [f"v{i}" for i in range(1, T + 1)]) + "\n")
        for sid, p, row in zip(station_ids, points, values):
            fh.write(",".join([str(sid), repr(p.latitude), repr(p.longitude)] + [repr(float(v)) for v in row]) + "\n")
