import numpy as np
import pytest
from hypothesis import given, strategies as st

from nlslab.decomposition import (
    cube_cover,
    heuristic_factor,
    orthogonality_defect,
    partition_report,
    region_spread,
    spacetime_orthogonality_defect,
    spread_bound,
    strip_partition,
    strip_width,
)
from nlslab.harness import gaussian, high_cube, trial_rng
from nlslab.regions import Cube, Shell, Strip, random_rotation
from nlslab.spectral_core import SpectralField, project, psi, random_field


def box(K, dim):
    g = np.meshgrid(*[np.arange(-K, K + 1)] * dim, indexing="ij")
    return np.stack(g, axis=-1).reshape(-1, dim)


def hits(cubes, pts):
    return sum(c.contains(pts).astype(int) for c in cubes)


# cube covers -------------------------------------------------------------------

def test_interval_cover_example():
    cubes = cube_cover(8, 4, dim=1)
    assert len(cubes) == 5
    pts = box(8, 1)
    assert np.array_equal(hits(cubes, pts), np.ones(17, dtype=int))


@given(st.integers(1, 3), st.sampled_from([1, 2, 4, 8]), st.floats(1, 7))
def test_shell_cover_is_a_partition(dim, N, side):
    if dim == 3 and N == 8:
        N = 4
    cubes = cube_cover(Shell(N), side, dim=dim)
    pts = Shell(N).lattice_points(dim)
    assert np.all(hits(cubes, pts) == 1)
    assert all(abs(c.side - side) < 1e-12 for c in cubes)
    assert all(c.contains(pts).any() for c in cubes)


@given(st.integers(0, 2 ** 32), st.integers(2, 3), st.floats(1.5, 5))
def test_rotated_cover_is_a_partition(seed, dim, side):
    q = random_rotation(dim, np.random.default_rng(seed))
    cubes = cube_cover(6 if dim == 2 else 3, side, dim=dim, orientation=q)
    pts = box(6 if dim == 2 else 3, dim)
    assert np.all(hits(cubes, pts) == 1)


def test_cover_rejects_small_side():
    with pytest.raises(ValueError):
        cube_cover(4, 0.5, dim=1)
    with pytest.raises(ValueError):
        cube_cover(Shell(4), 2)


# strips ---------------------------------------------------------------------------

@pytest.mark.parametrize("N1,N2,M", [(16, 8, 4.0), (64, 8, 1.0), (8, 8, 8.0), (32, 4, 1.0), (4, 4, 4.0)])
def test_strip_width(N1, N2, M):
    assert strip_width(N1, N2) == M


@given(st.integers(0, 8), st.integers(0, 8))
def test_strip_width_formula(a, b):
    N1, N2 = 2 ** max(a, b), 2 ** min(a, b)
    M = strip_width(N1, N2)
    if N2 * N2 <= N1:
        assert M == 1.0
    else:
        assert M == N2 * N2 / N1 and 1 < M <= N2


def test_strip_width_rejects_bad_input():
    with pytest.raises(ValueError):
        strip_width(8, 16)
    with pytest.raises(ValueError):
        strip_width(12, 4)


def test_partition_example_centered_16():
    cube = Cube((16.0, 0.0), 8.0)
    rep = partition_report(cube, 16, 8)
    assert rep["M"] == 4.0
    assert rep["exact"]
    assert rep["points"] == 256
    assert list(rep["labels"]) == [2, 3, 4, 5]


def test_partition_rejects_origin_centre():
    with pytest.raises(ValueError):
        strip_partition(Cube((0.0, 0.0), 2.0), 8, 4)


def test_one_point_strips_in_one_dimension():
    cube = Cube((8.5,), 8.0)
    strips = strip_partition(cube, 16, 4)
    assert [l for l, _ in strips] == list(range(1, 17))
    for l, s in strips:
        assert s.lattice_points().tolist() == [[l]]
        assert region_spread(s, l, 1.0) == 0.0


def test_single_point_spread_and_empty_strip():
    cube = Cube((3.0, 0.0), 0.5)
    s = Strip(cube, (1.0, 0.0), 3.0, 0.5)
    assert region_spread(s) == 0.0
    with pytest.raises(ValueError):
        region_spread(Strip(cube, (1.0, 0.0), 10.0, 0.5))


@given(st.integers(0, 2 ** 32), st.sampled_from([(16, 8), (32, 8), (64, 8), (16, 4)]))
def test_partition_of_random_cubes(seed, Ns):
    N1, N2 = Ns
    rng = np.random.default_rng(seed)
    centre = rng.uniform(-2 * N1, 2 * N1, size=2)
    if np.linalg.norm(centre) < 1:
        centre = centre + 1.0
    cube = Cube(tuple(centre), rng.uniform(1, N2))
    rep = partition_report(cube, N1, N2)
    assert rep["exact"]
    assert np.all(rep["spreads"] <= rep["bounds"])


@given(st.floats(0.1, 20), st.integers(0, 2 ** 32))
def test_strip_direction_scaling(c, seed):
    rng = np.random.default_rng(seed)
    cube = Cube(tuple(rng.uniform(-10, 10, 2)), 5.0)
    a = rng.standard_normal(2)
    A, M = rng.uniform(-5, 5), rng.uniform(0.5, 3)
    pts = box(16, 2)
    assert np.array_equal(Strip(cube, tuple(a), A, M).contains(pts),
                          Strip(cube, tuple(c * a), A, M).contains(pts))


def test_exhaustive_spread_scan_n2():
    N1, N2 = 32, 8
    worst = 0.0
    for cube in cube_cover(Shell(N1), N2, dim=2):
        rep = partition_report(cube, N1, N2)
        assert rep["exact"]
        worst = max(worst, float(np.max(rep["spreads"] / rep["bounds"])))
        assert heuristic_factor(cube, N1, N2) <= 4.0
    assert worst <= 1.0


def test_spread_bound_formula():
    assert spread_bound(-3, 2.0, 2, 8) == 4 * 7 + 8 * 64


# orthogonality ---------------------------------------------------------------------

def test_orthogonality_of_disjoint_modes():
    a = SpectralField.single_mode((1, 0), 2.0, cutoff=3)
    b = SpectralField.single_mode((0, -2), 1j, cutoff=3)
    assert orthogonality_defect([a, b]) == 0.0
    assert orthogonality_defect([a]) == 0.0
    with pytest.raises(ValueError):
        orthogonality_defect([])


@given(st.integers(0, 2 ** 32))
def test_orthogonality_of_strip_pieces(seed):
    f = random_field(2, 40, np.random.default_rng(seed))
    cube = Cube((24.0, 8.0), 8.0)
    pieces = [project(f, s) for _, s in strip_partition(cube, 32, 8)]
    assert orthogonality_defect(pieces) < 1e-14


def test_spacetime_defect_for_strip_products():
    # k = 2: one high datum split by strips, two low data on shell 8
    n, N1, N2 = 2, 32, 8
    cube = high_cube(n, N1, N2)
    strips = strip_partition(cube, N1, N2)
    low_pts = Shell(N2).lattice_points(n)
    r = np.sqrt(np.sum(low_pts ** 2, axis=1))
    weights = psi(r / N2) - psi(2 * r / N2)
    pts = cube.lattice_points()
    rw = np.sqrt(np.sum(pts ** 2, axis=1))
    high_w = psi(rw / N1) - psi(2 * rw / N1)
    for trial in range(3):
        rng = trial_rng(5, "multilinear", 0, trial)
        high = SpectralField.from_points(pts, high_w * gaussian(rng, pts.shape[0])).normalized()
        lows = [SpectralField.from_points(low_pts, weights * gaussian(rng, low_pts.shape[0])).normalized()
                for _ in range(2)]
        pieces = [project(high, s) for _, s in strips]
        assert spacetime_orthogonality_defect(pieces, lows) <= 0.5
