"""Cube covers, strip partitions and orthogonality checks.

Cubes in a cover are half-open cells [m s, (m+1) s) of a lattice of side s
(optionally in a rotated frame), so every lattice point lies in exactly one
cell. Strips cut a cube C with centre xi0 into slabs

    R_l = {xi in C : xi . xi0/|xi0| in [M l, M (l+1))},

with width M = max(N2^2 / N1, 1).
"""

import numpy as np

from . import _kernels
from .regions import Cube, Shell, Strip, snap_tol
from .spacetime_norms import free_wave_integral
from .spectral_core import is_dyadic


def _region_points(region, dim=None):
    if isinstance(region, Shell):
        if dim is None:
            raise ValueError("dimension required for a shell region")
        return region.lattice_points(dim)
    if isinstance(region, (int, np.integer)):
        K = int(region)
        if dim is None:
            raise ValueError("dimension required for a box region")
        grids = np.meshgrid(*[np.arange(-K, K + 1)] * dim, indexing="ij")
        return np.stack(grids, axis=-1).reshape(-1, dim)
    if hasattr(region, "lattice_points"):
        return region.lattice_points()
    raise TypeError(f"cannot enumerate region {region!r}")


def cube_cover(region, side, dim=None, orientation=None):
    """Half-open cubes of side ``side`` partitioning the lattice points of ``region``.

    ``region`` is a Shell, an integer K (the box [-K, K]^n) or any region with
    ``lattice_points``. Only cells meeting the region are returned, ordered
    lexicographically by cell index. With ``orientation`` (an orthonormal
    matrix) the cells are taken in the rotated frame y = xi @ Q.
    """
    if side < 1:
        raise ValueError("side must be >= 1")
    pts = _region_points(region, dim)
    if pts.size == 0:
        return []
    side = float(side)
    q = None if orientation is None else np.asarray(orientation, dtype=np.float64)
    y = pts.astype(np.float64) if q is None else pts @ q
    cells = np.unique(np.floor((y + snap_tol(side / 2.0)) / side).astype(np.int64), axis=0)
    out = []
    for m in cells:
        yc = (m + 0.5) * side
        centre = yc if q is None else q @ yc
        out.append(Cube(tuple(centre), side / 2.0, None if q is None else q))
    return out


def strip_width(N1, N2):
    """M = max(N2^2 / N1, 1)."""
    if not (is_dyadic(N1) and is_dyadic(N2)):
        raise ValueError("N1 and N2 must be powers of two")
    if N2 > N1:
        raise ValueError("need N1 >= N2")
    return max(N2 * N2 / N1, 1.0)


def _strip_labels(cube, pts, M):
    xi0 = np.asarray(cube.center, dtype=np.float64)
    a = xi0 / np.linalg.norm(xi0)
    return np.floor((pts @ a + snap_tol(M / 2.0)) / M).astype(np.int64)


def strip_partition(cube, N1, N2):
    """Strips R_l of ``cube`` along its centre direction; returns [(l, Strip)] for nonempty l.

    The l-range comes from the lattice points actually present in the cube.
    """
    xi0 = np.asarray(cube.center, dtype=np.float64)
    if not np.any(xi0):
        raise ValueError("strip partition needs a cube centre xi0 != 0")
    M = strip_width(N1, N2)
    pts = cube.lattice_points()
    if pts.size == 0:
        return []
    labels = np.unique(_strip_labels(cube, pts, M))
    return [(int(l), Strip(cube, tuple(xi0), M * (l + 0.5), M / 2.0)) for l in labels]


def spread_bound(l, M, dim, N2):
    """Envelope M^2 (2|l| + 1) + 4 n N2^2 for diam{|xi|^2} on strip l."""
    return M * M * (2 * abs(l) + 1) + 4 * dim * N2 * N2


def region_spread(strip, l=None, M=None):
    """diam{|xi|^2 : xi in strip, xi in Z^n}; ``l`` and ``M`` are accepted for the record only."""
    pts = strip.lattice_points()
    if pts.shape[0] == 0:
        raise ValueError("strip has no lattice points")
    r2 = np.sum(pts * pts, axis=1)
    return float(r2.max() - r2.min())


def partition_report(cube, N1, N2):
    """Exhaustive check of one cube's strip partition.

    Returns a dict with the strip labels, their spreads, their bounds and
    ``exact`` (every lattice point of the cube lies in exactly one strip).
    """
    M = strip_width(N1, N2)
    pts = cube.lattice_points()
    strips = strip_partition(cube, N1, N2)
    hits = np.zeros(pts.shape[0], dtype=np.int64)
    for _, s in strips:
        hits += s.contains(pts)
    labels = _strip_labels(cube, pts, M)
    uniq, inverse = np.unique(labels, return_inverse=True)
    r2 = np.sum(pts * pts, axis=1).astype(np.float64)
    lo, hi = _kernels.label_spread(inverse.reshape(-1), r2, uniq.size)
    spreads = hi - lo
    dim = pts.shape[1]
    bounds = np.array([spread_bound(l, M, dim, N2) for l in uniq])
    same_labels = [l for l, _ in strips] == [int(l) for l in uniq]
    return {
        "M": M,
        "labels": uniq,
        "spreads": spreads,
        "bounds": bounds,
        "points": int(pts.shape[0]),
        "exact": bool(np.all(hits == 1) and same_labels),
    }


def orthogonality_defect(pieces):
    """|‖sum pieces‖^2 - sum ‖pieces‖^2| / sum ‖pieces‖^2 at one time (coefficient l2 norms)."""
    pieces = list(pieces)
    if not pieces:
        raise ValueError("need at least one piece")
    total = pieces[0].coeffs.copy()
    for p in pieces[1:]:
        if p.shape != pieces[0].shape:
            raise ValueError("pieces must share a lattice")
        total = total + p.coeffs
    parts = sum(p.coeff_norm() ** 2 for p in pieces)
    if parts == 0:
        return 0.0
    whole = float(np.sum(np.abs(total) ** 2))
    return abs(whole - parts) / parts


def spacetime_orthogonality_defect(pieces, others):
    """Same defect for the space-time products ‖P_l u_1 * u_2 ... u_{k+1}‖^2_{L^2}.

    ``pieces`` split the high-frequency datum, ``others`` are the remaining
    data. Only approximate orthogonality is expected here.
    """
    pieces = [p for p in pieces if p.support().size]
    if not pieces:
        return 0.0
    others = list(others)
    powers = [2] * (len(others) + 1)
    total = pieces[0]
    for p in pieces[1:]:
        total = total + p
    whole, _ = free_wave_integral([total] + others, powers)
    parts = sum(free_wave_integral([p] + others, powers)[0] for p in pieces)
    if parts == 0:
        return 0.0
    return abs(whole - parts) / parts


def typical_strip_index(N1, M):
    """The heuristic size |l| ~ N1 / M of strip indices in a cube near shell N1."""
    return N1 / M


def heuristic_factor(cube, N1, N2):
    """Worst factor between a strip's distance from the origin (in units of M) and N1 / M.

    Strip l covers projections in [M l, M (l+1)); its distance in units of M
    is |l + 1/2| + 1/2, which is >= 1 for every l.
    """
    M = strip_width(N1, N2)
    ref = typical_strip_index(N1, M)
    worst = 1.0
    for l, _ in strip_partition(cube, N1, N2):
        size = abs(l + 0.5) + 0.5
        worst = max(worst, size / ref, ref / size)
    return worst
