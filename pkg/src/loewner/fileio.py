"""Delimited file formats and JSON sidecars.

All floating-point values are written with 17 significant digits, which
round-trips IEEE doubles exactly:

* driving CSV: header ``t,u``, one sample per line
* trace CSV:   header ``t,re,im``
* curve CSV:   header ``re,im`` (an optional extra time column is ignored
  on read)

Run metadata (seed, parameters, resolved configuration) goes into a JSON
sidecar next to the data file.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .drivers import DrivingPath

__all__ = [
    "write_driving_csv",
    "read_driving_csv",
    "write_trace_csv",
    "read_trace_csv",
    "write_curve_csv",
    "read_curve_csv",
    "write_json",
    "read_json",
]

_FMT = "%.17g"


def write_driving_csv(path, driving: DrivingPath) -> None:
    data = np.column_stack([driving.times, driving.values])
    np.savetxt(path, data, fmt=_FMT, delimiter=",", header="t,u", comments="")


def read_driving_csv(path) -> DrivingPath:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return DrivingPath(data[:, 0], data[:, 1])


def write_trace_csv(path, times, points) -> None:
    pts = np.asarray(points, dtype=complex)
    data = np.column_stack([np.asarray(times, dtype=float), pts.real, pts.imag])
    np.savetxt(path, data, fmt=_FMT, delimiter=",", header="t,re,im", comments="")


def read_trace_csv(path):
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return data[:, 0], data[:, 1] + 1j * data[:, 2]


def write_curve_csv(path, points) -> None:
    pts = np.asarray(points, dtype=complex)
    data = np.column_stack([pts.real, pts.imag])
    np.savetxt(path, data, fmt=_FMT, delimiter=",", header="re,im", comments="")


def read_curve_csv(path) -> np.ndarray:
    """Curve points from a ``re,im`` CSV; also accepts ``t,re,im`` traces."""
    with open(path) as fh:
        header = fh.readline().strip().lower()
    cols = [c.strip() for c in header.split(",")]
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if "re" in cols and "im" in cols:
        return data[:, cols.index("re")] + 1j * data[:, cols.index("im")]
    if data.shape[1] >= 3:
        return data[:, 1] + 1j * data[:, 2]
    return data[:, 0] + 1j * data[:, 1]


def write_json(path, payload: dict) -> None:
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def read_json(path) -> dict:
    return json.loads(Path(path).read_text())
