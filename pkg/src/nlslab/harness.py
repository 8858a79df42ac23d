"""Verification scans for the dyadic space-time estimates.

Every scan produces a :class:`ScanReport`: one :class:`EstimateRecord` per
(parameter point, trial), a least-squares slope of log(max ratio) against a
log scale, and a verdict.

Trial 0 of each scaling scan is a deterministic coherent probe (flat
nonnegative coefficients on a cube inside the frequency region, the natural
near-extremizer for these estimates). Trials 1..T are complex Gaussian data
from the stream ``default_rng([seed, tag, point, trial])``. Random data
alone saturates none of the estimates, so the coherent probe is what gives
the slope fits their lower end.

Random trials are evaluated on a spatially exact grid; when the exact
number of time nodes would exceed ``point_budget`` sampled values per
trial, fewer uniformly spaced nodes are used. Coherent probes are always
evaluated exactly.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
import math
import os
import time

import numpy as np

from . import _kernels
from .regions import Cube, Shell, as_region, centered_box_strip
from .spacetime_norms import (
    FreeWave,
    exact_grid,
    free_tensor_integral,
    free_wave_integral,
    free_wave_linf_norm,
    linf_grid,
)
from .spectral_core import TWO_PI, SpectralField, critical_index, is_dyadic, psi

DEFAULT_POINT_BUDGET = 1 << 22
MIN_TIME_NODES = 16

_TAGS = {"strichartz": 1, "cubes": 2, "bernstein": 3, "strip": 4, "multilinear": 5, "extremize": 6}


# --------------------------------------------------------------------------
# exponents
# --------------------------------------------------------------------------

def admissible(n, p):
    """Admissible (n, p): p > 6 for n = 1, p > 4 for n = 2, 3, p >= 2(n+4)/n for n >= 4."""
    if n < 1:
        raise ValueError("dimension must be >= 1")
    if n == 1:
        return p > 6
    if n in (2, 3):
        return p > 4
    return p >= 2.0 * (n + 4) / n


def strichartz_exponent(n, p):
    """Loss exponent n/2 - (n+2)/p of the shell estimate."""
    return n / 2.0 - (n + 2.0) / p


def strip_delta_range(n, p):
    """Open interval (0, upper) of gains delta available for strips of width M."""
    if n == 1:
        upper = 0.5 - 3.0 / p
    elif n in (2, 3):
        upper = 0.5 - 2.0 / p
    else:
        upper = 0.5 - (n + 3.0) / (n * p)
    return 0.0, upper


def multilinear_admissible(n, k):
    """(n, k) for which the high-low product estimate holds."""
    if n < 1 or k < 1:
        return False
    if n == 1:
        return k >= 3
    if n <= 4:
        return k >= 2
    return True


def multilinear_exponents(n, k, p=None):
    """Holder exponents behind the product estimate.

    Returns a dict with the open p-range, p_{n,k} = (n+2)k, the chosen p
    (midpoint of the range unless given), q from
    2/p + (k-2)/p_{n,k} + 1/q = 1/2, and delta' = -n + 2(n+2)/p + s_{n,k}.
    """
    if not multilinear_admissible(n, k):
        raise ValueError(f"(n, k) = ({n}, {k}) outside the product-estimate range")
    s = float(critical_index(n, k))
    if n == 1:
        lo = 6.0
    elif n <= 4:
        lo = 4.0
    else:
        lo = 2.0 * (n + 4) / n
    hi = 4.0 * k * (n + 2) / (n * k + 2)
    if p is None:
        p = 0.5 * (lo + hi)
    if not lo < p < hi:
        raise ValueError(f"p = {p} outside ({lo}, {hi})")
    p_nk = float((n + 2) * k)
    inv_q = 0.5 - 2.0 / p - (k - 2) / p_nk
    q = 1.0 / inv_q if inv_q > 0 else math.inf
    delta = -n + 2.0 * (n + 2) / p + s
    return {"p_range": (lo, hi), "p": p, "p_nk": p_nk, "q": q, "delta_prime": delta}


def bilinear_exponent_sum(n, p):
    """n/2 - (n+2)/p + n/2 - (n+2)/q - s_{n,1} with 1/p + 1/q = 1/2 (identically 0)."""
    q_inv = 0.5 - 1.0 / p
    return n / 2.0 - (n + 2.0) / p + n / 2.0 - (n + 2.0) * q_inv - float(critical_index(n, 1))


# --------------------------------------------------------------------------
# records and reports
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class EstimateRecord:
    command: str
    n: int
    k: object
    p: object
    N: tuple
    M: object
    trial: int
    seed: int
    lhs: float
    rhs_factor: float

    @property
    def ratio(self):
        if self.rhs_factor > 0:
            return self.lhs / self.rhs_factor
        return math.inf if self.lhs > 0 else math.nan


@dataclass
class ScanReport:
    command: str
    params: dict
    records: list = field(default_factory=list)
    slope: object = None
    residual: object = None
    verdict: str = "insufficient-data"
    wall_clock_s: float = 0.0
    details: dict = field(default_factory=dict)

    @property
    def passed(self):
        return self.verdict == "pass"

    def max_ratio_by(self, key):
        out = {}
        for r in self.records:
            x = key(r)
            out[x] = max(out.get(x, -math.inf), r.ratio)
        return dict(sorted(out.items()))


def fit_loglog(xs, ys):
    """Least-squares line through (log x, log y); returns (slope, rms residual).

    Needs at least three distinct x; otherwise returns (None, None).
    """
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    if np.unique(xs).size < 3 or np.any(ys <= 0):
        return None, None
    lx, ly = np.log(xs), np.log(ys)
    A = np.vstack([lx, np.ones_like(lx)]).T
    coef, *_ = np.linalg.lstsq(A, ly, rcond=None)
    resid = ly - A @ coef
    return float(coef[0]), float(np.sqrt(np.mean(resid ** 2)))


# --------------------------------------------------------------------------
# execution helpers
# --------------------------------------------------------------------------

def resolve_threads(threads):
    if threads is None:
        env = os.environ.get("NLSLAB_THREADS", "").strip()
        threads = int(env) if env else 1
    threads = int(threads)
    if threads < 0:
        raise ValueError("threads must be >= 0")
    return threads if threads > 0 else (os.cpu_count() or 1)


def _run(fn, tasks, threads):
    """Evaluate ``fn`` over ``tasks``; results come back in task order whatever the pool size."""
    threads = resolve_threads(threads)
    if threads == 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, tasks))


def trial_rng(seed, tag, point, trial):
    return np.random.default_rng([int(seed), _TAGS[tag], int(point), int(trial)])


def gaussian(rng, m):
    return (rng.standard_normal(m) + 1j * rng.standard_normal(m)) / math.sqrt(2.0)


def _check_dyadic_list(values, name):
    values = [int(v) for v in values]
    if not values:
        raise ValueError(f"{name} list is empty")
    for v in values:
        if not is_dyadic(v):
            raise ValueError(f"{name} = {v} is not a power of two")
    if any(b <= a for a, b in zip(values, values[1:])):
        raise ValueError(f"{name} list must be strictly increasing")
    return values


def _capped_nodes(grid, point_budget):
    spatial, J, _ = grid
    per_node = int(np.prod(spatial))
    cap = max(MIN_TIME_NODES, point_budget // per_node)
    return None if J <= cap else cap


def _lp_integral(field, p, point_budget):
    """int |u|^p for a single free wave, exact in space and in time up to the budget."""
    wave = FreeWave(field, galilean=True)
    cap = _capped_nodes(exact_grid([wave], [p]), point_budget)
    value, info = free_wave_integral([wave], [p], max_time_nodes=cap)
    return value, info


def coherent_cube_side(n, N):
    """Integer range [a, b] with the cube [a, b]^n inside the shell N/2 < |xi| < 2N."""
    if N == 1:
        a = 0
    else:
        a = int(math.floor(N / (2.0 * math.sqrt(n)))) + 1
        while 4 * n * a * a <= N * N:
            a += 1
    b = int(math.ceil(2.0 * N / math.sqrt(n))) - 1
    while n * b * b >= 4 * N * N:
        b -= 1
    if b < a:
        raise ValueError(f"no cube fits in shell {N} for n = {n}")
    return a, b


def _ones(lo, hi):
    pts = np.arange(lo, hi + 1).reshape(-1, 1)
    return SpectralField.from_points(pts, np.ones(pts.shape[0]))


# --------------------------------------------------------------------------
# Strichartz on shells
# --------------------------------------------------------------------------

def strichartz_scan(n, p, N_list, trials, seed, tol=0.1, threads=1, coherent=True,
                    point_budget=DEFAULT_POINT_BUDGET):
    """Max of ||e^{it Delta} phi||_{L^p} / ||phi||_{L^2} over data on shell N, fitted against N.

    Verdict: slope <= n/2 - (n+2)/p + tol.
    """
    if not admissible(n, p):
        raise ValueError(f"(n, p) = ({n}, {p}) is not admissible")
    N_list = _check_dyadic_list(N_list, "N")
    start = time.perf_counter()
    points = {N: Shell(N).lattice_points(n) for N in N_list}
    first = 0 if coherent else 1
    tasks = [(N, t) for N in N_list for t in range(first, trials + 1)]

    def one(task):
        N, t = task
        if t == 0:
            a, b = coherent_cube_side(n, N)
            factors = [_ones(a, b)] * n
            value, _ = free_tensor_integral(factors, p)
            l2 = TWO_PI ** (0.5 * n) * math.sqrt((b - a + 1) ** n)
        else:
            pts = points[N]
            rng = trial_rng(seed, "strichartz", N, t)
            f = SpectralField.from_points(pts, gaussian(rng, pts.shape[0]))
            value, _ = _lp_integral(f, p, point_budget)
            l2 = f.l2_norm()
        return EstimateRecord("verify-strichartz", n, None, p, (N,), None, t, seed,
                              value ** (1.0 / p), l2)

    records = _run(one, tasks, threads)
    report = ScanReport("verify-strichartz", {"n": n, "p": p, "N": N_list, "trials": trials,
                                              "seed": seed, "tol": tol}, records)
    best = report.max_ratio_by(lambda r: r.N[0])
    report.slope, report.residual = fit_loglog(list(best), list(best.values()))
    predicted = strichartz_exponent(n, p)
    report.details = {"predicted_exponent": predicted, "max_ratio": {str(k): v for k, v in best.items()}}
    if report.slope is not None:
        report.verdict = "pass" if report.slope <= predicted + tol else "fail"
    report.wall_clock_s = time.perf_counter() - start
    return report


# --------------------------------------------------------------------------
# cubes: Galilean frequency translation
# --------------------------------------------------------------------------

def cube_translation_check(n, p, cube, shift, trials, seed, rtol=1e-10, threads=1):
    """Space-time L^p norms of data on ``cube`` and of the same data translated by ``shift``.

    Both sides are evaluated on their own exact grids in the original frame
    (no Galilean centring), so agreement is a real test of the symmetry.
    """
    if not admissible(n, p):
        raise ValueError(f"(n, p) = ({n}, {p}) is not admissible")
    cube = as_region(cube)
    shift = np.asarray(shift, dtype=np.int64).reshape(-1)
    if shift.size != n or cube.dim != n:
        raise ValueError("cube and shift must live in dimension n")
    start = time.perf_counter()
    pts = cube.lattice_points()
    if pts.shape[0] == 0:
        raise ValueError("cube contains no lattice points")

    def one(t):
        rng = trial_rng(seed, "cubes", 0, t)
        amps = gaussian(rng, pts.shape[0])
        a = FreeWave(SpectralField.from_points(pts, amps))
        b = FreeWave(SpectralField.from_points(pts + shift, amps))
        va, _ = free_wave_integral([a], [p])
        vb, _ = free_wave_integral([b], [p])
        return EstimateRecord("verify-cubes", n, None, p, (int(round(cube.side)),), None, t, seed,
                              va ** (1.0 / p), vb ** (1.0 / p))

    records = _run(one, list(range(1, trials + 1)), threads)
    report = ScanReport("verify-cubes", {"n": n, "p": p, "cube": cube.to_dict(),
                                         "shift": shift.tolist(), "trials": trials, "seed": seed,
                                         "rtol": rtol}, records)
    if records:
        worst = max(abs(r.ratio - 1.0) for r in records)
        report.details = {"max_relative_difference": worst}
        report.verdict = "pass" if worst <= rtol else "fail"
    report.wall_clock_s = time.perf_counter() - start
    return report


# --------------------------------------------------------------------------
# Bernstein on strips
# --------------------------------------------------------------------------

def bernstein_scan(n, M, N, trials, seed, tol=0.1, threads=1, oversample=8,
                   point_budget=DEFAULT_POINT_BUDGET):
    """sup|e^{it Delta} phi| / (M^{1/2} N^{(n-1)/2} ||phi_hat||_{l^2}) over data on R_M(N) strips.

    ``M`` and ``N`` may be scalars or lists; pairs with M > N are skipped.
    The coefficient l2 norm is used so a single mode has ratio
    1 / (M^{1/2} N^{(n-1)/2}). Cauchy-Schwarz caps every ratio by 3^{n/2}.
    Verdict: that cap holds and the fitted slope against N is <= tol.
    """
    M_list = [float(m) for m in np.atleast_1d(M)]
    N_list = _check_dyadic_list(np.atleast_1d(N), "N")
    if not M_list or any(m < 1 for m in M_list):
        raise ValueError("M values must be >= 1")
    pairs = [(m, N_) for N_ in N_list for m in M_list if m <= N_]
    if not pairs:
        raise ValueError("no (M, N) pair with 1 <= M <= N")
    start = time.perf_counter()
    tasks = [(i, t) for i in range(len(pairs)) for t in range(0, trials + 1)]
    regions = [centered_box_strip(N_, m, n) for m, N_ in pairs]
    region_pts = [r.lattice_points() for r in regions]

    def one(task):
        i, t = task
        m, N_ = pairs[i]
        pts = region_pts[i]
        if t == 0:
            amps = np.ones(pts.shape[0], dtype=np.complex128)
        else:
            amps = gaussian(trial_rng(seed, "bernstein", i, t), pts.shape[0])
        f = SpectralField.from_points(pts, amps)
        wave = FreeWave(f, galilean=True)
        spatial, J = linf_grid(wave, oversample)
        cap = max(MIN_TIME_NODES, point_budget // int(np.prod(spatial)))
        lhs = free_wave_linf_norm(wave, oversample=oversample, max_time_nodes=cap)
        rhs = math.sqrt(m) * N_ ** ((n - 1) / 2.0) * f.coeff_norm()
        return EstimateRecord("verify-bernstein", n, None, None, (N_,), m, t, seed, lhs, rhs)

    records = _run(one, tasks, threads)
    report = ScanReport("verify-bernstein", {"n": n, "M": M_list, "N": N_list, "trials": trials,
                                             "seed": seed, "tol": tol}, records)
    best = report.max_ratio_by(lambda r: r.N[0])
    report.slope, report.residual = fit_loglog(list(best), list(best.values()))
    cap = 3.0 ** (n / 2.0)
    within = all(r.ratio <= cap * (1 + 1e-12) for r in records)
    report.details = {"max_ratio": {str(k): v for k, v in best.items()}, "cauchy_schwarz_cap": cap}
    if not within:
        report.verdict = "fail"
    elif report.slope is not None:
        report.verdict = "pass" if report.slope <= tol else "fail"
    report.wall_clock_s = time.perf_counter() - start
    return report


# --------------------------------------------------------------------------
# strips: gain (M/N)^delta
# --------------------------------------------------------------------------

def strip_gain_scan(n, p, N, M_list, trials, seed, delta=0.05, tol=0.0, threads=1,
                    point_budget=DEFAULT_POINT_BUDGET):
    """Max of ||e^{it Delta} phi||_{L^p} / (N^{n/2-(n+2)/p} ||phi||_{L^2}) over data on a strip.

    The strip is the centred member of R_M(N): |xi_1| <= M, |xi_i| <= N.
    The slope is fitted against M/N at fixed N; verdict: slope >= delta - tol.
    """
    if not admissible(n, p):
        raise ValueError(f"(n, p) = ({n}, {p}) is not admissible")
    lo, hi = strip_delta_range(n, p)
    if not lo < delta < hi:
        raise ValueError(f"delta = {delta} outside ({lo}, {hi})")
    N = int(N)
    if not is_dyadic(N):
        raise ValueError(f"N = {N} is not a power of two")
    M_list = [int(m) for m in M_list]
    if not M_list:
        raise ValueError("M list is empty")
    if any(m < 1 or m > N for m in M_list) or any(b <= a for a, b in zip(M_list, M_list[1:])):
        raise ValueError("M values must be increasing integers in [1, N]")
    start = time.perf_counter()
    scale = N ** strichartz_exponent(n, p)
    tasks = [(m, t) for m in M_list for t in range(0, trials + 1)]

    def one(task):
        m, t = task
        if t == 0:
            factors = [_ones(-m, m)] + [_ones(-N, N)] * (n - 1)
            value, _ = free_tensor_integral(factors, p)
            count = (2 * m + 1) * (2 * N + 1) ** (n - 1)
            l2 = TWO_PI ** (0.5 * n) * math.sqrt(count)
        else:
            pts = centered_box_strip(N, m, n).lattice_points()
            f = SpectralField.from_points(pts, gaussian(trial_rng(seed, "strip", m, t), pts.shape[0]))
            value, _ = _lp_integral(f, p, point_budget)
            l2 = f.l2_norm()
        return EstimateRecord("verify-strip", n, None, p, (N,), m, t, seed,
                              value ** (1.0 / p), scale * l2)

    records = _run(one, tasks, threads)
    report = ScanReport("verify-strip", {"n": n, "p": p, "N": N, "M": M_list, "trials": trials,
                                         "seed": seed, "delta": delta, "tol": tol}, records)
    best = report.max_ratio_by(lambda r: r.M)
    report.slope, report.residual = fit_loglog([m / N for m in best], list(best.values()))
    report.details = {"delta_range": [lo, hi], "max_ratio": {str(k): v for k, v in best.items()}}
    if report.slope is not None:
        report.verdict = "pass" if report.slope >= delta - tol else "fail"
    report.wall_clock_s = time.perf_counter() - start
    return report


# --------------------------------------------------------------------------
# high-low products
# --------------------------------------------------------------------------

def _smooth_weights(points, N):
    r = np.sqrt(np.sum(points * points, axis=1).astype(np.float64))
    if N == 1:
        return psi(r)
    return psi(r / N) - psi(2.0 * r / N)


def high_cube(n, N1, N_low, direction=None):
    """Side-N_low cube centred at round(N1 * a); by default a is not aligned with an axis."""
    a = np.array([1.0, 0.37, 0.21][:n]) if direction is None else np.asarray(direction, float)
    a = a / np.linalg.norm(a)
    return Cube(tuple(np.round(N1 * a)), N_low / 2.0)


def multilinear_scan(n, k, N1_list, N_low, trials, seed, delta=0.05, tol=0.0, threads=1,
                     direction=None):
    """Max of ||u_1 u_2 ... u_{k+1}||_{L^2} / N_low^{k s_{n,k}} with unit data, fitted against N1.

    u_1 carries psi_{N1}-weighted data on a side-N_low cube of shell N1 (the
    orthogonality reduction); u_2..u_{k+1} carry psi_{N_low}-weighted data on
    shell N_low. Verdict: slope <= -(delta - tol).
    """
    if n > 3:
        raise ValueError("multilinear scans are limited to n <= 3")
    if not multilinear_admissible(n, k):
        raise ValueError(f"(n, k) = ({n}, {k}) outside the product-estimate range")
    N1_list = _check_dyadic_list(N1_list, "N1")
    if not is_dyadic(N_low):
        raise ValueError(f"N_low = {N_low} is not a power of two")
    if N1_list[0] < N_low:
        raise ValueError("need N1 >= N_low")
    start = time.perf_counter()
    s = float(critical_index(n, k))
    rhs = float(N_low) ** (k * s)
    low_pts = Shell(N_low).lattice_points(n)
    low_w = _smooth_weights(low_pts, N_low)
    keep = low_w > 0
    low_pts, low_w = low_pts[keep], low_w[keep]
    high = {}
    for N1 in N1_list:
        cube = high_cube(n, N1, N_low, direction)
        pts = cube.lattice_points()
        w = _smooth_weights(pts, N1)
        keep = w > 0
        high[N1] = (pts[keep], w[keep])
    tasks = [(N1, t) for N1 in N1_list for t in range(0, trials + 1)]

    def one(task):
        N1, t = task
        hp, hw = high[N1]
        if t == 0:
            data = [(hp, hw)] + [(low_pts, low_w)] * k
        else:
            rng = trial_rng(seed, "multilinear", N1, t)
            data = [(hp, hw * gaussian(rng, hp.shape[0]))]
            data += [(low_pts, low_w * gaussian(rng, low_pts.shape[0])) for _ in range(k)]
        fields = [SpectralField.from_points(pts, amps).normalized() for pts, amps in data]
        value, _ = free_wave_integral(fields, [2] * len(fields))
        Ns = (N1,) + (N_low,) * k
        return EstimateRecord("verify-multilinear", n, k, None, Ns, None, t, seed,
                              math.sqrt(value), rhs)

    records = _run(one, tasks, threads)
    report = ScanReport("verify-multilinear", {"n": n, "k": k, "N1": N1_list, "N_low": N_low,
                                               "trials": trials, "seed": seed, "delta": delta,
                                               "tol": tol}, records)
    best = report.max_ratio_by(lambda r: r.N[0])
    report.slope, report.residual = fit_loglog(list(best), list(best.values()))
    report.details = {"max_ratio": {str(k_): v for k_, v in best.items()},
                      "exponents": multilinear_exponents(n, k)}
    if report.slope is not None:
        report.verdict = "pass" if report.slope <= -(delta - tol) else "fail"
    report.wall_clock_s = time.perf_counter() - start
    return report


# --------------------------------------------------------------------------
# extremizer search
# --------------------------------------------------------------------------

@dataclass
class ExtremizerResult:
    field: SpectralField
    value: float
    baseline: float
    history: list
    exact: bool


def region_points(region, dim=None):
    region = as_region(region)
    if isinstance(region, Shell):
        if dim is None:
            raise ValueError("dimension required for a shell region")
        return region.lattice_points(dim)
    if hasattr(region, "lattice_points"):
        return region.lattice_points()
    return np.array(sorted(region.points), dtype=np.int64).reshape(len(region.points), -1)


class _Evaluator:
    """The evaluation map A (amplitudes -> wave samples) on one fixed grid."""

    def __init__(self, pts, p, point_budget):
        self.pts = pts
        self.p = float(p)
        self.dim = pts.shape[1]
        self.wave = FreeWave(SpectralField.from_points(pts, np.ones(pts.shape[0])), galilean=True)
        spatial, J, exact = exact_grid([self.wave], [p])
        per_node = int(np.prod(spatial))
        cap = max(MIN_TIME_NODES, point_budget // per_node)
        self.exact = exact and J <= cap
        self.spatial, self.J = spatial, min(J, cap)
        self.nodes = np.arange(self.J)
        self.size = self.J * per_node

    def apply(self, amps):
        return self.wave.with_amplitudes(amps).sample(self.spatial, self.J, self.nodes)

    def adjoint(self, values):
        return self.wave.adjoint(values, self.spatial, self.J, self.nodes)

    def ratio(self, amps, values=None):
        if values is None:
            values = self.apply(amps)
        integral = TWO_PI ** (self.dim + 1) * _kernels.abs_pow_sum(values, self.p) / self.size
        l2 = TWO_PI ** (0.5 * self.dim) * float(np.linalg.norm(amps))
        return integral ** (1.0 / self.p) / l2


def extremizer_search(region, p, restarts=4, iters=50, seed=0, dim=None, baseline=64,
                      rtol=1e-10, point_budget=DEFAULT_POINT_BUDGET):
    """Ascent for R(phi) = ||e^{it Delta} phi||_{L^p} / ||phi||_{L^2} over data on ``region``.

    Step: phi <- A^*(|A phi|^{p-2} A phi), normalized. The objective is a
    convex function of phi, so each step cannot decrease R; a decrease
    beyond rounding raises AssertionError. Restart 0 starts from the best of
    ``baseline`` random unit fields, restart 1 from flat data, the rest from
    fresh random data, so the result dominates the random baseline.
    """
    if p < 2:
        raise ValueError("p must be >= 2")
    pts = region_points(region, dim)
    if pts.shape[0] == 0:
        raise ValueError("region has no lattice points")
    ev = _Evaluator(pts, p, point_budget)
    m = pts.shape[0]

    base_best, base_amps = -math.inf, None
    for b in range(baseline):
        amps = gaussian(trial_rng(seed, "extremize", 0, b), m)
        amps /= np.linalg.norm(amps)
        r = ev.ratio(amps)
        if r > base_best:
            base_best, base_amps = r, amps
    starts = [] if base_amps is None else [base_amps]
    starts.append(np.ones(m, dtype=np.complex128) / math.sqrt(m))
    for r_ in range(len(starts), restarts):
        amps = gaussian(trial_rng(seed, "extremize", 1, r_), m)
        starts.append(amps / np.linalg.norm(amps))

    best_val, best_amps, history = -math.inf, None, []
    for amps in starts:
        vals = ev.apply(amps)
        cur = ev.ratio(amps, vals)
        trace = [cur]
        for _ in range(iters):
            grad = ev.adjoint(_kernels.pow_gradient(vals, ev.p))
            nrm = float(np.linalg.norm(grad))
            if nrm == 0:
                break
            nxt = grad / nrm
            nvals = ev.apply(nxt)
            val = ev.ratio(nxt, nvals)
            if val < cur * (1 - 1e-12):
                raise AssertionError(f"ascent decreased the ratio: {cur} -> {val}")
            if val <= cur * (1 + rtol):
                break
            amps, vals, cur = nxt, nvals, val
            trace.append(cur)
        history.append(trace)
        if cur > best_val:
            best_val, best_amps = cur, amps
    field_ = SpectralField.from_points(pts, best_amps)
    return ExtremizerResult(field_, best_val, base_best if baseline else math.nan, history, ev.exact)
