"""Trajectory serialisation: CSV and JSON with 17 significant digits."""

import csv
import io
import json

import numpy as np

from .dynamics import COLUMNS, Trajectory
from .errors import ScenarioError

FORMATS = ("csv", "json")


def _fmt(x):
    return format(float(x), ".17g")


def trajectory_rows(traj):
    """Yield one tuple of floats (or ``None`` for a missing energy) per sample."""
    for i in range(len(traj)):
        e = None if traj.energy is None else float(traj.energy[i])
        yield (float(traj.t[i]), *map(float, traj.r[i]), *map(float, traj.p[i]), *map(float, traj.S[i]), e)


def to_csv(traj):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for row in trajectory_rows(traj):
        w.writerow([_fmt(v) if v is not None else "" for v in row])
    return buf.getvalue()


def to_json(traj):
    # json emits repr(float), which is the shortest exact round-trip form
    recs = [dict(zip(COLUMNS, row)) for row in trajectory_rows(traj)]
    return json.dumps(recs, indent=1) + "\n"


def write_trajectory(traj, path, fmt="csv"):
    if fmt not in FORMATS:
        raise ScenarioError(f"unknown output format {fmt!r}; expected one of {FORMATS}")
    text = to_csv(traj) if fmt == "csv" else to_json(traj)
    with open(path, "w", newline="") as fh:
        fh.write(text)


def _from_records(rows):
    a = np.array([[np.nan if v is None else v for v in row[:10]] for row in rows], dtype=float).reshape(-1, 10)
    en = [row[10] for row in rows]
    energy = None if all(v is None for v in en) else np.array([np.nan if v is None else v for v in en], dtype=float)
    return Trajectory(t=a[:, 0], r=a[:, 1:4], p=a[:, 4:7], S=a[:, 7:10], energy=energy)


def parse_csv(text):
    """Inverse of :func:`to_csv`. Metadata (fields, model) is not stored and comes back empty."""
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None or tuple(header) != COLUMNS:
        raise ScenarioError(f"unexpected CSV header {header!r}")
    rows = []
    for lineno, rec in enumerate(reader, start=2):
        if len(rec) != len(COLUMNS):
            raise ScenarioError(f"line {lineno}: expected {len(COLUMNS)} columns, got {len(rec)}")
        rows.append([float(v) if v != "" else None for v in rec])
    return _from_records(rows)


def parse_json(text):
    recs = json.loads(text)
    return _from_records([[r[c] for c in COLUMNS] for r in recs])


def read_trajectory(path, fmt=None):
    if fmt is None:
        fmt = "json" if str(path).endswith(".json") else "csv"
    with open(path) as fh:
        text = fh.read()
    return parse_json(text) if fmt == "json" else parse_csv(text)
