"""Acceptance criteria, one test per criterion.

Each test prints (and records for the terminal summary) a single line

    criterion <i> PASS|FAIL (<seconds> s): <measured values>

Run with ``pytest tests/test_acceptance.py -s`` to see the lines inline.
"""

import json
import math
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE
from nlslab.cli import _solve_data, main, validate
from nlslab.decomposition import cube_cover, heuristic_factor, partition_report
from nlslab.evolution import free_evolve, free_trajectory, nonlinearity, picard_solve
from nlslab.harness import (
    cube_translation_check,
    fit_loglog,
    multilinear_scan,
    strichartz_scan,
    strip_gain_scan,
)
from nlslab.regions import Cube, Shell
from nlslab.spacetime_norms import two_variation
from nlslab.spectral_core import (
    SmoothCutoff,
    critical_index,
    energy,
    mass,
    random_field,
)

from oracles import convolve_power, truncate_centered, variation2_exhaustive

pytestmark = pytest.mark.slow


def report(i, ok, elapsed, info):
    line = f"criterion {i} {'PASS' if ok else 'FAIL'} ({elapsed:.1f} s): {info}"
    print("\n" + line)
    ACCEPTANCE.append(line)
    return ok


def sup_sobolev(states, dim, K, s):
    w = SmoothCutoff(dim, K).sobolev_weights(s)
    axes = tuple(range(1, states.ndim))
    return float(np.sqrt(np.max(np.sum(w * np.abs(states) ** 2, axis=axes))))


# 1 ------------------------------------------------------------------------------------------

def test_criterion_1_exact_symmetries():
    parts, times = {}, {}
    rng = np.random.default_rng(2024)

    t0 = time.perf_counter()
    worst_mass = 0.0
    for dim, K in ((1, 64), (2, 16), (3, 6)):
        phi = random_field(dim, K, rng)
        m0 = mass(phi)
        for t in rng.uniform(-20, 20, 8):
            worst_mass = max(worst_mass, abs(mass(free_evolve(phi, t)) - m0) / m0)
    times["mass"] = time.perf_counter() - t0
    parts["mass"] = worst_mass <= 4 * np.finfo(float).eps

    t0 = time.perf_counter()
    periodic = all(np.array_equal(free_evolve(phi, 2 * math.pi).coeffs, phi.coeffs)
                   for phi in (random_field(d, K, rng) for d, K in ((1, 64), (2, 16), (3, 6))))
    times["period"] = time.perf_counter() - t0
    parts["period"] = periodic

    t0 = time.perf_counter()
    rep = cube_translation_check(2, 6, Cube((0.0, 0.0), 4.0), (32, 0), trials=4, seed=11)
    times["cube"] = time.perf_counter() - t0
    diff = rep.details["max_relative_difference"]
    parts["cube"] = rep.passed and diff <= 1e-10

    fast = all(v < 1.0 for v in times.values())
    ok = all(parts.values()) and fast
    report(1, ok, sum(times.values()),
           f"mass drift {worst_mass:.1e}, 2pi periodicity exact={periodic}, "
           f"cube translation rel diff {diff:.1e}, per-check max {max(times.values()):.2f} s")
    assert ok, (parts, times)


# 2 ------------------------------------------------------------------------------------------

def test_criterion_2_oracle_equivalences():
    rng = np.random.default_rng(77)
    t0 = time.perf_counter()
    worst = 0.0
    for case in range(200):
        K = int(rng.integers(0, 5))
        k = int(rng.integers(1, 4))
        mu = int(rng.choice([-1, 1]))
        f = random_field(1, K, rng)
        expect = truncate_centered(convolve_power(f.coeffs, k, mu), K)
        got = nonlinearity(f, k, mu).coeffs
        worst = max(worst, float(np.max(np.abs(got - expect))) / max(1.0, float(np.max(np.abs(expect)))))
    t_nl = time.perf_counter() - t0

    t0 = time.perf_counter()
    worst_v = 0.0
    lengths = [1 + (i % 12) for i in range(1000)]
    for L in lengths:
        seq = rng.standard_normal(L) + 1j * rng.standard_normal(L)
        a, b = two_variation(seq), variation2_exhaustive(seq)
        worst_v = max(worst_v, abs(a - b) / max(1.0, b))
    t_var = time.perf_counter() - t0

    ok = worst <= 1e-12 and worst_v <= 1e-12 and t_nl < 10 and t_var < 10
    report(2, ok, t_nl + t_var,
           f"nonlinearity vs convolution max rel err {worst:.1e} over 200 cases ({t_nl:.1f} s); "
           f"2-variation DP vs exhaustive max err {worst_v:.1e} over 1000 sequences, "
           f"lengths 1..12 ({t_var:.1f} s)")
    assert ok


# 3 ------------------------------------------------------------------------------------------

def test_criterion_3_strichartz_scaling():
    t0 = time.perf_counter()
    one = strichartz_scan(1, 8, [4, 8, 16, 32, 64, 128, 256], trials=64, seed=7)
    t1 = time.perf_counter() - t0
    t0 = time.perf_counter()
    two = strichartz_scan(2, 6, [4, 8, 16, 32, 64], trials=64, seed=7)
    t2 = time.perf_counter() - t0
    ok1 = one.slope is not None and 0.0 <= one.slope <= 0.125 + 0.1 and t1 < 120
    ok2 = two.slope is not None and 0.0 <= two.slope <= 1 / 3 + 0.1 and t2 < 300
    ok = ok1 and ok2
    report(3, ok, t1 + t2,
           f"n=1 p=8 slope {one.slope:.4f} (pred 0.125, {t1:.0f} s); "
           f"n=2 p=6 slope {two.slope:.4f} (pred 0.3333, {t2:.0f} s)")
    assert ok


# 4 ------------------------------------------------------------------------------------------

def test_criterion_4_strip_gain():
    t0 = time.perf_counter()
    rep = strip_gain_scan(2, 6, 64, [1, 2, 4, 8, 16, 32, 64], trials=16, seed=7, delta=0.05)
    elapsed = time.perf_counter() - t0
    ok = rep.passed and rep.slope >= 0.05 and elapsed < 300
    report(4, ok, elapsed, f"n=2 p=6 N=64 gain slope {rep.slope:.4f} (target >= 0.05), "
                           f"residual {rep.residual:.3f}")
    assert ok


# 5 ------------------------------------------------------------------------------------------

def test_criterion_5_multilinear_decay():
    t0 = time.perf_counter()
    two = multilinear_scan(2, 2, [8, 16, 32, 64], 8, trials=32, seed=7)
    t2 = time.perf_counter() - t0
    t0 = time.perf_counter()
    one = multilinear_scan(1, 3, [8, 16, 32, 64, 128], 8, trials=32, seed=7)
    t1 = time.perf_counter() - t0
    ok2 = two.slope <= -0.05 and two.residual < 0.3 and t2 < 600
    ok1 = one.slope <= -0.05 and one.residual < 0.3 and t1 < 600
    ok = ok1 and ok2
    report(5, ok, t1 + t2,
           f"n=2 k=2 slope {two.slope:.4f} residual {two.residual:.3f} ({t2:.0f} s); "
           f"n=1 k=3 slope {one.slope:.4f} residual {one.residual:.3f} ({t1:.0f} s)")
    assert ok


# 6 ------------------------------------------------------------------------------------------

def test_criterion_6_strip_partition():
    t0 = time.perf_counter()
    N1, N2, n = 32, 8, 2
    cubes = cube_cover(Shell(N1), N2, dim=n)
    shell_pts = Shell(N1).lattice_points(n)
    hits = sum(c.contains(shell_pts).astype(int) for c in cubes)
    exact, worst, strips, factor = True, 0.0, 0, 1.0
    for cube in cubes:
        rep = partition_report(cube, N1, N2)
        exact = exact and rep["exact"]
        worst = max(worst, float(np.max(rep["spreads"] / rep["bounds"])))
        strips += len(rep["labels"])
        factor = max(factor, heuristic_factor(cube, N1, N2))
    # a second geometry with M > 1
    for cube in cube_cover(Shell(16), 8, dim=n):
        rep = partition_report(cube, 16, 8)
        exact = exact and rep["exact"]
        worst = max(worst, float(np.max(rep["spreads"] / rep["bounds"])))
    elapsed = time.perf_counter() - t0
    ok = bool(np.all(hits == 1)) and exact and worst <= 1.0 and factor <= 4.0 and elapsed < 30
    report(6, ok, elapsed,
           f"{len(cubes)} cubes, {strips} strips, cover and partitions exact={exact}, "
           f"max spread/bound {worst:.3f}, strip-count heuristic factor {factor:.2f}")
    assert ok


# 7 ------------------------------------------------------------------------------------------

def _picard_data(eps):
    params = validate("solve", {"n": 1, "k": 3, "K": 32, "T": 0.1, "J": 256, "seed": 1,
                                "eps": eps})
    return _solve_data(params)


def test_criterion_7_picard_solver():
    t0 = time.perf_counter()
    n, k, K, T, J = 1, 3, 32, 0.1, 256
    s = float(critical_index(n, k))
    phi = _picard_data(1e-2)
    traj, rep = picard_solve(phi, k, 1, T, J, tol=1e-10)
    m0, e0 = mass(phi), energy(phi, k, 1)
    mass_drift = max(abs(mass(traj.state(j)) - m0) / m0 for j in range(len(traj)))
    energy_drift = max(abs(energy(traj.state(j), k, 1) - e0) / abs(e0) for j in range(len(traj)))

    # perturbative order: sup_t ||u - e^{it Delta} phi||_{H^s} ~ eps^(2k+1)
    epss = [10 ** -1, 10 ** -1.5, 10 ** -2, 10 ** -2.5]
    errs = []
    for eps in epss:
        data = _picard_data(eps)
        sol, _ = picard_solve(data, k, 1, T, J, tol=1e-10)
        free = free_trajectory(data, T, J).states
        errs.append(sup_sobolev(sol.states - free, n, K, s))
    slope, _ = fit_loglog(epss, errs)
    elapsed = time.perf_counter() - t0

    ok = (rep.converged and all(r < 0.5 for r in rep.ratios) and mass_drift <= 1e-8
          and energy_drift <= 1e-6 and abs(slope - (2 * k + 1)) <= 0.2 and elapsed < 300)
    report(7, ok, elapsed,
           f"converged={rep.converged} in {rep.iterates} iterations, max ratio "
           f"{max(rep.ratios):.1e}, mass drift {mass_drift:.1e}, energy drift {energy_drift:.1e}, "
           f"eps slope {slope:.4f} (target {2 * k + 1})")
    assert ok


# 8 ------------------------------------------------------------------------------------------

DETERMINISM = {
    "solve": {"n": 1, "k": 3, "K": 16, "T": 0.1, "J": 64, "tol": 1e-10, "seed": 1, "eps": 1e-2},
    "verify-strichartz": {"n": 2, "p": 6, "N": [4, 8, 16], "trials": 6, "seed": 7},
    "verify-cubes": {"n": 2, "p": 6, "center": [0.0, 0.0], "halfside": 4.0, "shift": [32, 0],
                     "trials": 4, "seed": 3},
    "verify-bernstein": {"n": 2, "M": [1, 2, 4], "N": [4, 8, 16], "trials": 3, "seed": 2},
    "verify-strip": {"n": 2, "p": 6, "N": 16, "M": [1, 2, 4, 8, 16], "trials": 3, "seed": 4},
    "verify-multilinear": {"n": 2, "k": 2, "N1": [8, 16, 32], "N_low": 4, "trials": 4, "seed": 5},
    "decompose": {"n": 2, "N1": 32, "N2": 8, "rotate": True, "seed": 9},
    "extremize": {"n": 1, "p": 8, "N": 8, "restarts": 3, "iters": 20, "baseline": 16, "seed": 0},
}


def test_criterion_8_determinism(tmp_path, capsys):
    t0 = time.perf_counter()
    mismatched = []
    for command, cfg in DETERMINISM.items():
        path = tmp_path / f"{command}.json"
        path.write_text(json.dumps(cfg))
        outputs = []
        for run, threads in enumerate(("1", "2", "0", "1")):
            out = tmp_path / f"{command}-{run}"
            code = main([command, "--config", str(path), "--out", str(out), "--threads", threads])
            summary = json.loads((out / f"{command}.json").read_text())
            summary.pop("wall_clock_s")
            outputs.append((code, (out / f"{command}.csv").read_bytes(), summary))
        if any(o != outputs[0] for o in outputs[1:]):
            mismatched.append(command)
    capsys.readouterr()
    elapsed = time.perf_counter() - t0
    ok = not mismatched
    report(8, ok, elapsed,
           f"{len(DETERMINISM)} commands x threads (1, 2, auto, 1 again): "
           f"{'byte-identical CSV and summaries' if ok else 'mismatch in ' + ', '.join(mismatched)}")
    assert ok
