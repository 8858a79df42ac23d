"""Command-line entry point: ``nlslab <command> --config cfg.json [flags]``.

Exit status: 0 when every verdict passes, 1 when a verdict fails or the
solver does not converge (the report is still written), 2 on usage,
configuration or I/O errors.
"""

import argparse
import json
import os
import re
import sys
import time

import numpy as np

from . import harness, io
from .decomposition import cube_cover, heuristic_factor, partition_report
from .evolution import picard_solve
from .harness import EstimateRecord, ScanReport
from .regions import Cube, Shell, random_rotation, region_from_dict
from .spectral_core import (
    SpectralField,
    critical_index,
    energy,
    lattice_points,
    mass,
    sobolev_norm,
)

COMMANDS = ("solve", "verify-strichartz", "verify-cubes", "verify-bernstein", "verify-strip",
            "verify-multilinear", "decompose", "extremize")

_COMMON = {"command", "schema", "seed", "out"}

# command -> (required keys, optional keys with defaults)
SCHEMAS = {
    "solve": (("n", "k", "K", "T", "J"),
              {"tol": 1e-10, "max_iter": 50, "mu": 1, "eps": 1.0, "phi": "random",
               "rule": "trapezoid"}),
    "verify-strichartz": (("n", "p", "N"),
                          {"trials": 64, "tol": 0.1, "point_budget": harness.DEFAULT_POINT_BUDGET}),
    "verify-cubes": (("n", "p", "center", "halfside", "shift"), {"trials": 8, "rtol": 1e-10}),
    "verify-bernstein": (("n", "M", "N"),
                         {"trials": 8, "tol": 0.1, "point_budget": harness.DEFAULT_POINT_BUDGET}),
    "verify-strip": (("n", "p", "N", "M"),
                     {"trials": 16, "delta": 0.05, "tol": 0.0,
                      "point_budget": harness.DEFAULT_POINT_BUDGET}),
    "verify-multilinear": (("n", "k", "N1", "N_low"), {"trials": 32, "delta": 0.05, "tol": 0.0}),
    "decompose": (("n", "N1", "N2"), {"side": None, "rotate": False}),
    "extremize": (("n", "p"), {"N": None, "region": None, "restarts": 4, "iters": 50,
                               "baseline": 64}),
}

_DYADIC_KEYS = {"N", "N1", "N2", "N_low"}


class UsageError(Exception):
    pass


def _randomized(command, params):
    if command == "solve":
        return params.get("phi") == "random"
    if command == "decompose":
        return bool(params.get("rotate"))
    return True


def _line_of(text, key):
    m = re.search(r'"%s"\s*:' % re.escape(key), text)
    return text.count("\n", 0, m.start()) + 1 if m else None


def load_config(path):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}:{exc.lineno}:{exc.colno}: malformed config: {exc.msg}") from None
    if not isinstance(data, dict):
        raise UsageError(f"{path}:1: config must be a JSON object")
    return data, text


def validate(command, data, text="", path="<config>"):
    """Check a parameter block against the command's schema; returns params with defaults."""
    required, optional = SCHEMAS[command]
    allowed = set(required) | set(optional) | _COMMON

    def where(key):
        line = _line_of(text, key)
        return f"{path}:{line}: " if line else f"{path}: "

    for key in data:
        if key not in allowed:
            raise UsageError(f"{where(key)}unknown field {key!r} for {command}")
    if "command" in data and data["command"] != command:
        raise UsageError(f"{where('command')}config is for {data['command']!r}, not {command!r}")
    if "schema" in data and str(data["schema"]) != io.SCHEMA:
        raise UsageError(f"{where('schema')}unsupported schema {data['schema']!r}")
    for key in required:
        if key not in data:
            raise UsageError(f"{path}: missing required field {key!r} for {command}")
    params = dict(optional)
    params.update({k: v for k, v in data.items() if k not in ("command", "schema")})
    for key in _DYADIC_KEYS & set(params):
        values = params[key]
        if values is None:
            continue
        seq = values if isinstance(values, list) else [values]
        if isinstance(values, list) and not values:
            raise UsageError(f"{where(key)}{key} list is empty")
        for v in seq:
            if isinstance(v, bool) or not isinstance(v, (int, float)) or v != int(v) \
                    or int(v) < 1 or (int(v) & (int(v) - 1)):
                raise UsageError(f"{where(key)}{key} entries must be powers of two, got {v!r}")
    if isinstance(params.get("M"), list) and not params["M"]:
        raise UsageError(f"{where('M')}M list is empty")
    if _randomized(command, params) and params.get("seed") is None:
        raise UsageError(f"{path}: seed is required for {command}")
    if params.get("seed") is not None:
        seed = params["seed"]
        if isinstance(seed, bool) or not isinstance(seed, int) or not 0 <= seed < 2 ** 64:
            raise UsageError(f"{where('seed')}seed must be an unsigned 64-bit integer")
    return params


# --------------------------------------------------------------------------
# command bodies
# --------------------------------------------------------------------------

def _solve_data(params):
    n, k, K = int(params["n"]), int(params["k"]), int(params["K"])
    phi = params["phi"]
    if phi == "random":
        rng = np.random.default_rng([int(params["seed"]), 0])
        pts = lattice_points(n, K).reshape(-1, n)
        weight = 1.0 / (1.0 + np.sum(pts * pts, axis=1))
        amps = (rng.standard_normal(pts.shape[0]) + 1j * rng.standard_normal(pts.shape[0])) * weight
        field = SpectralField.from_points(pts, amps, K)
        field = field.scaled(1.0 / sobolev_norm(field, float(critical_index(n, k))))
    elif isinstance(phi, dict):
        field = io.field_from_dict(phi)
        if field.dim != n or field.cutoff != K:
            raise UsageError("phi record does not match n and K")
    else:
        raise UsageError("phi must be \"random\" or a field record")
    return field.scaled(float(params["eps"]))


def run_solve(params, threads):
    start = time.perf_counter()
    n, k = int(params["n"]), int(params["k"])
    phi = _solve_data(params)
    traj, rep = picard_solve(phi, k, int(params["mu"]), float(params["T"]), int(params["J"]),
                             tol=float(params["tol"]), max_iter=int(params["max_iter"]),
                             rule=params["rule"])
    seed = params.get("seed")
    seed = 0 if seed is None else seed
    records = [EstimateRecord("solve", n, k, None, (phi.cutoff,), None, m + 1, seed, d,
                              float(params["tol"]))
               for m, d in enumerate(rep.differences)]
    m0, e0 = mass(phi), energy(phi, k, int(params["mu"]))
    last = traj.state(len(traj) - 1)
    # a diverged run may leave huge states; drifts then report inf
    with np.errstate(over="ignore", invalid="ignore"):
        details = {
            "picard": rep.to_dict(),
            "mass_drift": abs(mass(last) - m0) / m0 if m0 else 0.0,
            "energy_drift": abs(energy(last, k, int(params["mu"])) - e0) / abs(e0) if e0 else 0.0,
        }
    report = ScanReport("solve", params, records, verdict="pass" if rep.converged else "fail",
                        details=details)
    report.wall_clock_s = time.perf_counter() - start
    return report, {"trajectory": io.trajectory_to_dict(traj)}


def run_decompose(params, threads):
    start = time.perf_counter()
    n, N1, N2 = int(params["n"]), int(params["N1"]), int(params["N2"])
    side = float(params["side"] if params["side"] is not None else N2)
    q = None
    if params["rotate"]:
        q = random_rotation(n, np.random.default_rng([int(params["seed"]), 7]))
    cubes = cube_cover(Shell(N1), side, dim=n, orientation=q)
    shell_pts = Shell(N1).lattice_points(n)
    hits = np.zeros(shell_pts.shape[0], dtype=np.int64)
    records, exact, worst_h = [], True, 1.0
    seed = params.get("seed") or 0
    counter = 0
    for cube in cubes:
        hits += cube.contains(shell_pts)
        if not np.any(cube.center):
            continue
        rep = partition_report(cube, N1, N2)
        exact = exact and rep["exact"]
        worst_h = max(worst_h, heuristic_factor(cube, N1, N2))
        for spread, bound in zip(rep["spreads"], rep["bounds"]):
            counter += 1
            records.append(EstimateRecord("decompose", n, None, None, (N1, N2), rep["M"], counter,
                                          seed, float(spread), float(bound)))
    covered = bool(np.all(hits == 1))
    within = all(r.ratio <= 1.0 for r in records)
    report = ScanReport("decompose", params, records)
    report.details = {"cubes": len(cubes), "cover_exact": covered, "partition_exact": exact,
                      "max_spread_ratio": max((r.ratio for r in records), default=0.0),
                      "heuristic_factor": worst_h}
    report.verdict = "pass" if covered and exact and within else "fail"
    report.wall_clock_s = time.perf_counter() - start
    return report, {}


def run_extremize(params, threads):
    start = time.perf_counter()
    n, p = int(params["n"]), float(params["p"])
    if params["region"] is not None:
        region = region_from_dict(params["region"])
    elif params["N"] is not None:
        region = Shell(int(params["N"]))
    else:
        raise UsageError("extremize needs N or region")
    res = harness.extremizer_search(region, p, restarts=int(params["restarts"]),
                                    iters=int(params["iters"]), seed=int(params["seed"]), dim=n,
                                    baseline=int(params["baseline"]))
    records = [EstimateRecord("extremize", n, None, p, (int(params["N"] or 0),), None, i,
                              params["seed"], trace[-1], res.baseline)
               for i, trace in enumerate(res.history)]
    report = ScanReport("extremize", params, records)
    report.verdict = "pass" if res.value >= res.baseline * (1 - 1e-12) else "fail"
    report.details = {"value": res.value, "baseline": res.baseline, "exact_quadrature": res.exact,
                      "iterations": [len(t) - 1 for t in res.history]}
    report.wall_clock_s = time.perf_counter() - start
    return report, {"field": io.field_to_dict(res.field)}


def run_scan(command, params, threads):
    seed = int(params["seed"])
    if command == "verify-strichartz":
        return harness.strichartz_scan(params["n"], params["p"], params["N"], params["trials"], seed,
                                       tol=params["tol"], threads=threads,
                                       point_budget=params["point_budget"]), {}
    if command == "verify-cubes":
        cube = Cube(params["center"], params["halfside"])
        return harness.cube_translation_check(params["n"], params["p"], cube, params["shift"],
                                              params["trials"], seed, rtol=params["rtol"],
                                              threads=threads), {}
    if command == "verify-bernstein":
        return harness.bernstein_scan(params["n"], params["M"], params["N"], params["trials"], seed,
                                      tol=params["tol"], threads=threads,
                                      point_budget=params["point_budget"]), {}
    if command == "verify-strip":
        return harness.strip_gain_scan(params["n"], params["p"], params["N"], params["M"],
                                       params["trials"], seed, delta=params["delta"],
                                       tol=params["tol"], threads=threads,
                                       point_budget=params["point_budget"]), {}
    if command == "verify-multilinear":
        return harness.multilinear_scan(params["n"], params["k"], params["N1"], params["N_low"],
                                        params["trials"], seed, delta=params["delta"],
                                        tol=params["tol"], threads=threads), {}
    raise UsageError(f"unknown command {command!r}")


def execute(command, params, threads=None):
    """Run one command; returns (ScanReport, extra artifacts)."""
    threads = harness.resolve_threads(threads)
    if command == "solve":
        return run_solve(params, threads)
    if command == "decompose":
        return run_decompose(params, threads)
    if command == "extremize":
        return run_extremize(params, threads)
    return run_scan(command, params, threads)


# --------------------------------------------------------------------------
# output
# --------------------------------------------------------------------------

def emit_report(report, out_dir, fmt="both", extra=None):
    """Write <command>.csv and/or <command>.json (plus any extra artifacts) into ``out_dir``."""
    os.makedirs(out_dir, exist_ok=True)
    written = []
    csv_name = f"{report.command}.csv"
    if fmt in ("csv", "both"):
        path = os.path.join(out_dir, csv_name)
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(io.records_csv(report))
        written.append(path)
    for name, payload in (extra or {}).items():
        path = os.path.join(out_dir, f"{report.command}_{name}.json")
        io.write_json(path, payload)
        written.append(path)
    if fmt in ("json", "both"):
        path = os.path.join(out_dir, f"{report.command}.json")
        summary = io.summary(report, csv_name if fmt == "both" else None)
        io.write_json(path, summary)
        written.append(path)
    return written


def build_parser():
    parser = argparse.ArgumentParser(prog="nlslab", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", metavar="PATH", help="JSON parameter block")
    parser.add_argument("--seed", type=int, help="base seed (overrides the config)")
    parser.add_argument("--out", metavar="DIR", help="output directory (default: current)")
    parser.add_argument("--threads", type=int, metavar="COUNT",
                        help="worker threads, 0 = auto (default: $NLSLAB_THREADS or 1)")
    parser.add_argument("--format", choices=("csv", "json", "both"), default="both")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.config:
            data, text = load_config(args.config)
            path = args.config
        else:
            data, text, path = {}, "", "<flags>"
        if args.seed is not None:
            data["seed"] = args.seed
        params = validate(args.command, data, text, path)
        if args.threads is not None and args.threads < 0:
            raise UsageError("--threads must be >= 0")
        out = args.out or params.get("out") or "."
        try:
            report, extra = execute(args.command, params, args.threads)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        try:
            emit_report(report, out, args.format, extra)
        except OSError as exc:
            print(f"nlslab: cannot write reports: {exc}", file=sys.stderr)
            return 2
    except UsageError as exc:
        print(f"nlslab: {exc}", file=sys.stderr)
        return 2
    slope = "n/a" if report.slope is None else f"{report.slope:.4f}"
    print(f"{report.command}: verdict={report.verdict} slope={slope} records={len(report.records)}")
    return 0 if report.verdict == "pass" else 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
