"""Truncated Fourier lattice on the torus T^n = (R / 2piZ)^n.

A field is stored by its Fourier coefficients on the box [-K, K]^n with the
convention

    u(x) = sum_xi  u_hat(xi) exp(i xi . x),
    u_hat(xi) = (2 pi)^-n  int_{T^n} u(x) exp(-i xi . x) dx,

so a plane wave exp(i xi . x) has unit coefficient.
"""

from dataclasses import dataclass
from fractions import Fraction
import math

import numpy as np
import scipy.fft

from .regions import Shell, as_region

TWO_PI = 2.0 * math.pi


def critical_index(n, k):
    """Scaling-critical Sobolev index n/2 - 1/k, returned as an exact Fraction."""
    if int(n) != n or int(k) != k or n <= 0 or k <= 0:
        raise ValueError(f"critical_index needs positive integers, got n={n}, k={k}")
    return Fraction(int(n), 2) - Fraction(1, int(k))


def is_dyadic(N):
    N = int(N)
    return N >= 1 and (N & (N - 1)) == 0


# --------------------------------------------------------------------------
# lattice helpers
# --------------------------------------------------------------------------

def lattice_axes(dim, cutoff):
    ax = np.arange(-cutoff, cutoff + 1)
    return np.meshgrid(*([ax] * dim), indexing="ij")


def lattice_points(dim, cutoff):
    """Integer coordinates of the box [-K, K]^n, shape (2K+1,)*n + (n,)."""
    return np.stack(lattice_axes(dim, cutoff), axis=-1)


def lattice_norm_sq(dim, cutoff):
    return sum(a.astype(np.int64) ** 2 for a in lattice_axes(dim, cutoff))


def _axis_sizes(dim, size):
    if np.ndim(size) == 0:
        return (int(size),) * dim
    sizes = tuple(int(s) for s in size)
    if len(sizes) != dim:
        raise ValueError("one grid size per axis expected")
    return sizes


def to_grid(coeffs, dim, cutoff, size, workers=1):
    """Evaluate trigonometric polynomials on the uniform grid x_j = 2 pi j / S.

    ``coeffs`` may carry leading batch axes; the last ``dim`` axes are the
    lattice. ``size`` is S (scalar or per axis) and must exceed 2K.
    """
    sizes = _axis_sizes(dim, size)
    if min(sizes) < 2 * cutoff + 1:
        raise ValueError(f"grid {sizes} too small for cutoff {cutoff}")
    coeffs = np.asarray(coeffs)
    batch = coeffs.shape[:coeffs.ndim - dim]
    padded = np.zeros(batch + sizes, dtype=np.complex128)
    idx = np.ix_(*[np.arange(-cutoff, cutoff + 1) % s for s in sizes])
    padded[(Ellipsis,) + idx] = coeffs
    axes = tuple(range(-dim, 0))
    return scipy.fft.ifftn(padded, axes=axes, norm="forward", workers=workers)


def from_grid(values, dim, cutoff, workers=1):
    """Inverse of :func:`to_grid`: Fourier coefficients |xi|_inf <= K of grid samples."""
    values = np.asarray(values)
    sizes = values.shape[values.ndim - dim:]
    axes = tuple(range(-dim, 0))
    spec = scipy.fft.fftn(values, axes=axes, norm="forward", workers=workers)
    idx = np.ix_(*[np.arange(-cutoff, cutoff + 1) % s for s in sizes])
    return spec[(Ellipsis,) + idx]


def dealiased_size(cutoff, degree):
    """Next power of two >= degree * K + 1."""
    need = int(degree) * int(cutoff) + 1
    return 1 << max(need - 1, 1).bit_length()


# --------------------------------------------------------------------------
# fields
# --------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class SpectralField:
    """Fourier coefficients of a trigonometric polynomial on T^n.

    ``coeffs[i_1, ..., i_n]`` holds the amplitude of the mode
    xi = (i_1 - K, ..., i_n - K). The array is made read-only.
    """

    dim: int
    cutoff: int
    coeffs: np.ndarray

    def __post_init__(self):
        if self.dim not in (1, 2, 3):
            raise ValueError(f"dimension must be 1, 2 or 3, got {self.dim}")
        if self.cutoff < 0:
            raise ValueError("cutoff must be nonnegative")
        arr = np.array(self.coeffs, dtype=np.complex128)
        side = 2 * self.cutoff + 1
        if arr.shape != (side,) * self.dim:
            raise ValueError(f"coeffs shape {arr.shape} does not match (2K+1)^n = {(side,) * self.dim}")
        arr.setflags(write=False)
        object.__setattr__(self, "coeffs", arr)

    # constructors ---------------------------------------------------------

    @classmethod
    def zeros(cls, dim, cutoff):
        return cls(dim, cutoff, np.zeros((2 * cutoff + 1,) * dim, dtype=np.complex128))

    @classmethod
    def from_modes(cls, dim, cutoff, modes):
        """Build from a mapping {xi tuple: amplitude}."""
        arr = np.zeros((2 * cutoff + 1,) * dim, dtype=np.complex128)
        for xi, amp in modes.items():
            xi = tuple(int(c) for c in np.atleast_1d(xi))
            if len(xi) != dim:
                raise ValueError(f"lattice point {xi} has wrong length for n={dim}")
            if max(abs(c) for c in xi) > cutoff:
                raise ValueError(f"mode {xi} outside the cutoff {cutoff}")
            arr[tuple(c + cutoff for c in xi)] += amp
        return cls(dim, cutoff, arr)

    @classmethod
    def from_points(cls, points, amplitudes, cutoff=None):
        """Build from an (m, n) integer array of distinct modes and m amplitudes."""
        pts = np.asarray(points, dtype=np.int64)
        if pts.ndim != 2:
            raise ValueError("points must be an (m, n) array")
        if cutoff is None:
            cutoff = int(np.max(np.abs(pts))) if pts.size else 0
        arr = np.zeros((2 * cutoff + 1,) * pts.shape[1], dtype=np.complex128)
        if pts.size:
            if np.max(np.abs(pts)) > cutoff:
                raise ValueError(f"modes outside the cutoff {cutoff}")
            arr[tuple((pts + cutoff).T)] = amplitudes
        return cls(pts.shape[1], cutoff, arr)

    @classmethod
    def single_mode(cls, xi, amplitude=1.0, cutoff=None):
        xi = tuple(int(c) for c in np.atleast_1d(xi))
        if cutoff is None:
            cutoff = max(abs(c) for c in xi)
        return cls.from_modes(len(xi), cutoff, {xi: amplitude})

    @classmethod
    def from_grid_values(cls, values, cutoff):
        values = np.asarray(values)
        return cls(values.ndim, cutoff, from_grid(values, values.ndim, cutoff))

    # views ----------------------------------------------------------------

    @property
    def shape(self):
        return self.coeffs.shape

    def points(self):
        return lattice_points(self.dim, self.cutoff)

    def norm_sq_weights(self):
        return lattice_norm_sq(self.dim, self.cutoff)

    def support(self):
        """Integer coordinates of the nonzero coefficients, shape (m, n)."""
        idx = np.argwhere(self.coeffs != 0)
        return idx - self.cutoff

    def entries(self):
        """(xi, amplitude) pairs of the nonzero coefficients, in lattice order."""
        return [(tuple(int(c) for c in xi), complex(self.coeffs[tuple(xi + self.cutoff)]))
                for xi in self.support()]

    def coefficient(self, xi):
        xi = tuple(int(c) for c in np.atleast_1d(xi))
        if max(abs(c) for c in xi) > self.cutoff:
            return 0j
        return complex(self.coeffs[tuple(c + self.cutoff for c in xi)])

    def coeff_norm(self):
        """l^2 norm of the coefficient array."""
        return float(np.sqrt(np.sum(np.abs(self.coeffs) ** 2)))

    def l2_norm(self):
        """L^2(T^n) norm with Lebesgue measure: (2 pi)^(n/2) times the l^2 norm."""
        return TWO_PI ** (0.5 * self.dim) * self.coeff_norm()

    def values(self, size=None):
        if size is None:
            size = 2 * self.cutoff + 1
        return to_grid(self.coeffs, self.dim, self.cutoff, size)

    # algebra --------------------------------------------------------------

    def with_coeffs(self, coeffs):
        return SpectralField(self.dim, self.cutoff, coeffs)

    def scaled(self, factor):
        return self.with_coeffs(self.coeffs * factor)

    def normalized(self):
        nrm = self.l2_norm()
        if nrm == 0:
            raise ValueError("cannot normalize the zero field")
        return self.scaled(1.0 / nrm)

    def recut(self, cutoff):
        """Same field on a larger box, or truncated to a smaller one."""
        out = np.zeros((2 * cutoff + 1,) * self.dim, dtype=np.complex128)
        m = min(cutoff, self.cutoff)
        src = tuple(slice(self.cutoff - m, self.cutoff + m + 1) for _ in range(self.dim))
        dst = tuple(slice(cutoff - m, cutoff + m + 1) for _ in range(self.dim))
        out[dst] = self.coeffs[src]
        return SpectralField(self.dim, cutoff, out)

    def translated(self, shift):
        """Frequency translation: coefficient at xi moves to xi + shift."""
        shift = np.asarray(shift, dtype=np.int64).reshape(-1)
        if shift.size != self.dim:
            raise ValueError("shift has wrong dimension")
        new_cut = self.cutoff + int(np.max(np.abs(shift)))
        out = np.zeros((2 * new_cut + 1,) * self.dim, dtype=np.complex128)
        dst = tuple(slice(new_cut - self.cutoff + s, new_cut + self.cutoff + 1 + s) for s in shift)
        out[dst] = self.coeffs
        return SpectralField(self.dim, new_cut, out)

    def __add__(self, other):
        _check_same_lattice(self, other)
        return self.with_coeffs(self.coeffs + other.coeffs)

    def __sub__(self, other):
        _check_same_lattice(self, other)
        return self.with_coeffs(self.coeffs - other.coeffs)

    def inner(self, other):
        """Lattice inner product sum u_hat conj(v_hat)."""
        _check_same_lattice(self, other)
        return complex(np.vdot(other.coeffs, self.coeffs))

    def allclose(self, other, atol=1e-12, rtol=0.0):
        _check_same_lattice(self, other)
        return bool(np.allclose(self.coeffs, other.coeffs, atol=atol, rtol=rtol))


def _check_same_lattice(a, b):
    if a.dim != b.dim or a.cutoff != b.cutoff:
        raise ValueError(f"lattice mismatch: (n={a.dim}, K={a.cutoff}) vs (n={b.dim}, K={b.cutoff})")


# --------------------------------------------------------------------------
# smooth cutoff and Littlewood-Paley weights
# --------------------------------------------------------------------------

def _bump_exp(s):
    out = np.zeros_like(s)
    pos = s > 0
    out[pos] = np.exp(-1.0 / s[pos])
    return out


def smooth_step(t):
    """C^infinity step: 0 for t <= 0, 1 for t >= 1, built from exp(-1/s)."""
    t = np.asarray(t, dtype=np.float64)
    a = _bump_exp(t)
    b = _bump_exp(1.0 - t)
    return a / (a + b)


def psi(s):
    """Even cutoff equal to 1 on [-1, 1] and supported in (-2, 2)."""
    s = np.abs(np.asarray(s, dtype=np.float64))
    return 1.0 - smooth_step(s - 1.0)


def shell_weight(N, r):
    """Littlewood-Paley multiplier psi_N evaluated at radius r = |xi|.

    psi_1(r) = psi(r) and psi_N(r) = psi(r/N) - psi(2r/N) for dyadic N >= 2,
    so the weights over N = 1, 2, 4, ... sum to one.
    """
    if not is_dyadic(N):
        raise ValueError(f"shell index must be a power of two, got {N}")
    r = np.asarray(r, dtype=np.float64)
    if N == 1:
        return psi(r)
    return psi(r / N) - psi(2.0 * r / N)


def shell_support(N):
    """Open radial interval (lo, hi) on which psi_N is positive."""
    if N == 1:
        return (-1.0, 2.0)
    return (N / 2.0, 2.0 * N)


def dyadic_shells(max_radius):
    """Dyadic N = 1, 2, 4, ... whose shells meet the ball of radius ``max_radius``."""
    out = [1]
    N = 2
    while N / 2.0 < max_radius:
        out.append(N)
        N *= 2
    return out


@dataclass(frozen=True)
class SmoothCutoff:
    """Shell masks psi_N on a lattice box, cached per (dim, cutoff)."""

    dim: int
    cutoff: int

    def radii(self):
        return np.sqrt(lattice_norm_sq(self.dim, self.cutoff).astype(np.float64))

    def shells(self):
        return dyadic_shells(math.sqrt(self.dim) * self.cutoff)

    def mask(self, N):
        return shell_weight(N, self.radii())

    def sobolev_weights(self, s):
        """sum_N N^(2s) psi_N(|xi|)^2 at every lattice point."""
        r = self.radii()
        w = np.zeros_like(r)
        for N in self.shells():
            w += float(N) ** (2.0 * s) * shell_weight(N, r) ** 2
        return w


# --------------------------------------------------------------------------
# projections, norms and conserved quantities
# --------------------------------------------------------------------------

def project(field, region, mode="sharp"):
    """Fourier projection onto a frequency region.

    ``sharp`` multiplies by the 0/1 indicator of the region; ``smooth`` (shells
    only) multiplies by the Littlewood-Paley weight psi_N(|xi|).
    """
    region = as_region(region)
    if mode == "smooth":
        if not isinstance(region, Shell):
            raise ValueError("smooth projection is only defined for Shell regions")
        return field.with_coeffs(field.coeffs * SmoothCutoff(field.dim, field.cutoff).mask(region.N))
    if mode != "sharp":
        raise ValueError(f"unknown projection mode {mode!r}")
    return field.with_coeffs(np.where(region.contains(field.points()), field.coeffs, 0))


def sobolev_norm(field, s):
    """(sum_N N^(2s) ||P_N f||^2)^(1/2), norms taken on the coefficient l^2 scale."""
    w = SmoothCutoff(field.dim, field.cutoff).sobolev_weights(float(s))
    return float(np.sqrt(np.sum(w * np.abs(field.coeffs) ** 2)))


def bracket_sobolev_norm(field, s):
    """(sum <xi>^(2s) |f_hat|^2)^(1/2) with <xi> = (1 + |xi|^2)^(1/2)."""
    w = (1.0 + field.norm_sq_weights()) ** float(s)
    return float(np.sqrt(np.sum(w * np.abs(field.coeffs) ** 2)))


def mass(field):
    """M(u) = 1/2 int |u|^2 dx."""
    return 0.5 * TWO_PI ** field.dim * float(np.sum(np.abs(field.coeffs) ** 2))


def kinetic_energy(field):
    return 0.5 * TWO_PI ** field.dim * float(np.sum(field.norm_sq_weights() * np.abs(field.coeffs) ** 2))


def potential_integral(field, k):
    """int_{T^n} |u|^(2k+2) dx, exact on the dealiased grid."""
    size = dealiased_size(field.cutoff, 2 * k + 2)
    u = field.values(size)
    return TWO_PI ** field.dim * float(np.mean(np.abs(u) ** (2 * k + 2)))


def energy(field, k, mu):
    """E(u) = 1/2 int |grad u|^2 + mu/(2k+2) int |u|^(2k+2)."""
    if mu not in (1, -1):
        raise ValueError("mu must be +1 or -1")
    return kinetic_energy(field) + mu / (2.0 * k + 2.0) * potential_integral(field, k)


def random_field(dim, cutoff, rng, region=None, weight=None):
    """Complex Gaussian coefficients on a region (whole box by default).

    ``weight`` optionally multiplies the coefficients (array over the box).
    Not normalized.
    """
    shape = (2 * cutoff + 1,) * dim
    coeffs = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    if region is not None:
        coeffs = np.where(as_region(region).contains(lattice_points(dim, cutoff)), coeffs, 0)
    if weight is not None:
        coeffs = coeffs * weight
    return SpectralField(dim, cutoff, coeffs)
