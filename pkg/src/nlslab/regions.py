"""Frequency regions in Z^n: dyadic shells, cubes, strips and explicit sets.

Every region answers ``contains(points)`` for an integer array whose last
axis holds the coordinates. Cubes and strips use half-open faces
(closed on the negative side) so that tilings partition the lattice exactly.
"""

from dataclasses import dataclass, field

import numpy as np

# boundary snap: coordinates within this (relative) distance of a face count
# as lying on it, so cells computed by floor() agree with membership tests
SNAP = 1e-9


def snap_tol(scale):
    return SNAP * max(1.0, abs(float(scale)))


def _vec(x):
    return tuple(float(c) for c in np.atleast_1d(x))


@dataclass(frozen=True)
class Shell:
    """Support of the Littlewood-Paley weight psi_N: N/2 < |xi| < 2N (|xi| < 2 for N = 1)."""

    N: int

    def __post_init__(self):
        N = int(self.N)
        if N < 1 or (N & (N - 1)) != 0:
            raise ValueError(f"shell index must be a power of two >= 1, got {self.N}")
        object.__setattr__(self, "N", N)

    @property
    def outer_radius(self):
        return 2.0 * self.N

    def contains(self, points):
        pts = np.asarray(points, dtype=np.int64)
        r2 = np.sum(pts * pts, axis=-1)
        if self.N == 1:
            return r2 < 4
        return (4 * r2 > self.N * self.N) & (r2 < 4 * self.N * self.N)

    def lattice_points(self, dim):
        R = 2 * self.N
        grids = np.meshgrid(*[np.arange(-R, R + 1)] * dim, indexing="ij")
        pts = np.stack(grids, axis=-1).reshape(-1, dim)
        return pts[self.contains(pts)]

    def to_dict(self):
        return {"variant": "shell", "N": self.N}


@dataclass(frozen=True)
class Cube:
    """Cube with faces [c - h, c + h) along the columns of ``orientation``."""

    center: tuple
    halfside: float
    orientation: tuple = None

    def __post_init__(self):
        center = _vec(self.center)
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "halfside", float(self.halfside))
        if self.halfside <= 0:
            raise ValueError("halfside must be positive")
        if self.orientation is not None:
            q = np.asarray(self.orientation, dtype=np.float64)
            if q.shape != (len(center), len(center)):
                raise ValueError("orientation must be an n x n matrix")
            if not np.allclose(q.T @ q, np.eye(len(center)), atol=1e-12):
                raise ValueError("orientation must be orthonormal")
            object.__setattr__(self, "orientation", tuple(map(tuple, q)))

    @property
    def dim(self):
        return len(self.center)

    @property
    def side(self):
        return 2.0 * self.halfside

    def axes(self):
        if self.orientation is None:
            return np.eye(self.dim)
        return np.asarray(self.orientation)

    def local_coords(self, points):
        y = np.asarray(points, dtype=np.float64) - np.asarray(self.center)
        if self.orientation is None:
            return y
        return y @ self.axes()

    def contains(self, points):
        y = self.local_coords(points)
        h = self.halfside
        tol = snap_tol(h)
        return np.all((y >= -h - tol) & (y < h - tol), axis=-1)

    def bounding_box(self):
        """Integer box [lo, hi] per axis containing every lattice point of the cube."""
        c = np.asarray(self.center)
        reach = self.halfside * np.sum(np.abs(self.axes()), axis=1)
        return np.floor(c - reach).astype(int), np.ceil(c + reach).astype(int)

    def lattice_points(self):
        lo, hi = self.bounding_box()
        grids = np.meshgrid(*[np.arange(a, b + 1) for a, b in zip(lo, hi)], indexing="ij")
        pts = np.stack(grids, axis=-1).reshape(-1, self.dim)
        return pts[self.contains(pts)]

    def to_dict(self):
        out = {"variant": "cube", "center": list(self.center), "halfside": self.halfside}
        if self.orientation is not None:
            out["orientation"] = [list(r) for r in self.orientation]
        return out


@dataclass(frozen=True)
class Strip:
    """Points of ``parent`` with A - M <= a.xi < A + M, for a unit direction a.

    The direction is normalized on construction, so scaling it by c > 0
    leaves membership unchanged.
    """

    parent: Cube
    direction: tuple
    offset: float
    halfwidth: float

    def __post_init__(self):
        a = np.asarray(_vec(self.direction))
        nrm = float(np.linalg.norm(a))
        if nrm == 0:
            raise ValueError("strip direction must be nonzero")
        if a.size != self.parent.dim:
            raise ValueError("strip direction has wrong dimension")
        object.__setattr__(self, "direction", tuple(a / nrm))
        object.__setattr__(self, "offset", float(self.offset))
        object.__setattr__(self, "halfwidth", float(self.halfwidth))
        if self.halfwidth <= 0:
            raise ValueError("halfwidth must be positive")

    @property
    def dim(self):
        return self.parent.dim

    def projection(self, points):
        return np.asarray(points, dtype=np.float64) @ np.asarray(self.direction)

    def contains(self, points):
        t = self.projection(points)
        lo = self.offset - self.halfwidth
        hi = self.offset + self.halfwidth
        tol = snap_tol(self.halfwidth)
        return self.parent.contains(points) & (t >= lo - tol) & (t < hi - tol)

    def lattice_points(self):
        pts = self.parent.lattice_points()
        return pts[self.contains(pts)]

    def to_dict(self):
        out = self.parent.to_dict()
        out.update({"variant": "strip", "direction": list(self.direction),
                    "offset": self.offset, "halfwidth": self.halfwidth})
        return out


@dataclass(frozen=True)
class Explicit:
    """A finite set of lattice points."""

    points: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        pts = frozenset(tuple(int(c) for c in np.atleast_1d(p)) for p in self.points)
        object.__setattr__(self, "points", pts)

    def contains(self, points):
        pts = np.asarray(points, dtype=np.int64)
        if not self.points:
            return np.zeros(pts.shape[:-1], dtype=bool)
        ref = np.array(sorted(self.points), dtype=np.int64)
        bound = int(max(np.max(np.abs(ref)), np.max(np.abs(pts)) if pts.size else 0)) + 1
        base = 2 * bound + 1
        weights = base ** np.arange(pts.shape[-1], dtype=np.int64)
        keys = np.sum((pts + bound) * weights, axis=-1)
        ref_keys = np.sum((ref + bound) * weights, axis=-1)
        return np.isin(keys, ref_keys)

    def to_dict(self):
        return {"variant": "explicit", "points": [list(p) for p in sorted(self.points)]}


def as_region(region):
    if isinstance(region, (Shell, Cube, Strip, Explicit)):
        return region
    if isinstance(region, dict):
        return region_from_dict(region)
    if isinstance(region, (set, frozenset, list)):
        return Explicit(frozenset(tuple(p) for p in region))
    raise TypeError(f"not a frequency region: {region!r}")


def region_from_dict(d):
    variant = d.get("variant")
    if variant == "shell":
        return Shell(d["N"])
    if variant in ("cube", "strip"):
        cube = Cube(d["center"], d["halfside"], d.get("orientation"))
        if variant == "cube":
            return cube
        return Strip(cube, d["direction"], d["offset"], d["halfwidth"])
    if variant == "explicit":
        return Explicit(frozenset(tuple(p) for p in d["points"]))
    raise ValueError(f"unknown region variant {variant!r}")


def random_rotation(dim, rng):
    """Haar-distributed rotation matrix (determinant +1)."""
    q, r = np.linalg.qr(rng.standard_normal((dim, dim)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


def centered_box_strip(N, M, dim, direction=None, offset=0.0):
    """Member of R_M(N): the cube [-N, N]^n (lattice-closed) cut by |a.xi - A| <= M.

    The cube is stored half-open as [-N - 1/2, N + 1/2) so both faces keep
    their lattice points; the strip keeps a.xi in [A - M - 1/2, A + M + 1/2)
    when the direction is a coordinate axis.
    """
    if direction is None:
        direction = (1.0,) + (0.0,) * (dim - 1)
    cube = Cube((0.0,) * dim, N + 0.5)
    a = np.asarray(direction, dtype=float)
    axis_aligned = np.count_nonzero(a) == 1
    pad = 0.5 if axis_aligned else 0.0
    return Strip(cube, direction, offset, M + pad)
