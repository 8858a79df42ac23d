"""Serialization of fields, trajectories and scan reports.

Field record: {"dim", "cutoff", "entries": [[xi_1, ..., xi_n, re, im], ...]}
listing nonzero modes in lexicographic order. Trajectory record: a header
{"dim", "cutoff", "J", "T"} plus J + 1 field records. JSON floats use
Python's shortest round-trip repr; CSV floats use 17 significant digits.
"""

import csv
import io as _io
import json
import math

import numpy as np

from .evolution import Trajectory, time_grid
from .spectral_core import SpectralField

SCHEMA = "1"


def field_to_dict(field):
    entries = []
    for xi, amp in field.entries():
        entries.append([int(c) for c in xi] + [float(amp.real), float(amp.imag)])
    return {"dim": field.dim, "cutoff": field.cutoff, "entries": entries}


def field_from_dict(d):
    dim, cutoff = int(d["dim"]), int(d["cutoff"])
    entries = d.get("entries", [])
    if not entries:
        return SpectralField.zeros(dim, cutoff)
    arr = np.asarray(entries, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[1] != dim + 2:
        raise ValueError(f"field entries must have {dim + 2} columns")
    pts = arr[:, :dim]
    if not np.array_equal(pts, np.round(pts)):
        raise ValueError("field entry coordinates must be integers")
    return SpectralField.from_points(pts.astype(np.int64), arr[:, dim] + 1j * arr[:, dim + 1], cutoff)


def trajectory_to_dict(traj):
    header = {"dim": traj.dim, "cutoff": traj.cutoff, "J": traj.J, "T": traj.T}
    states = [field_to_dict(traj.state(j))["entries"] for j in range(len(traj))]
    return {"header": header, "states": states}


def trajectory_from_dict(d):
    h = d["header"]
    dim, cutoff, J, T = int(h["dim"]), int(h["cutoff"]), int(h["J"]), float(h["T"])
    states = d["states"]
    if len(states) != J + 1:
        raise ValueError(f"expected {J + 1} states, found {len(states)}")
    arr = np.stack([field_from_dict({"dim": dim, "cutoff": cutoff, "entries": s}).coeffs
                    for s in states])
    times = np.zeros(1) if J == 0 else time_grid(T, J)
    return Trajectory(dim, cutoff, times, arr)


def dumps(obj):
    return json.dumps(obj, indent=2, allow_nan=True) + "\n"


def write_json(path, obj):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps(obj))


def read_json(path):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


# --------------------------------------------------------------------------
# records
# --------------------------------------------------------------------------

def fmt(x):
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def n_columns(report):
    k = report.params.get("k")
    count = (int(k) + 1) if k is not None else 1
    for r in report.records:
        count = max(count, len(r.N))
    return count


def csv_header(report):
    ns = [f"N{i}" for i in range(1, n_columns(report) + 1)]
    return ["command", "n", "k", "p"] + ns + ["M", "trial", "seed", "lhs", "rhs_factor", "ratio"]


def records_csv(report):
    """CSV text: one header line plus one line per record, '\\n' line endings."""
    buf = _io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    header = csv_header(report)
    writer.writerow(header)
    width = n_columns(report)
    for r in report.records:
        ns = list(r.N) + [None] * (width - len(r.N))
        writer.writerow([r.command, fmt(r.n), fmt(r.k), fmt(r.p)] + [fmt(v) for v in ns]
                        + [fmt(r.M), fmt(r.trial), fmt(r.seed), fmt(r.lhs), fmt(r.rhs_factor),
                           fmt(r.ratio)])
    return buf.getvalue()


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


def summary(report, records_file):
    out = {
        "command": report.command,
        "params": _plain(report.params),
        "slope": report.slope,
        "residual": report.residual,
        "verdict": report.verdict if report.records else "insufficient-data",
        "records_file": records_file,
        "wall_clock_s": report.wall_clock_s,
        "schema": SCHEMA,
    }
    if report.details:
        out["details"] = _plain(report.details)
    return out


def region_to_json(region):
    return _plain(region.to_dict())
