"""Space-time norms over [0, 2pi] x T^n and the mode-wise 2-variation diagnostic.

Two evaluation routes exist:

* trajectory-based (:func:`lp_spacetime_norm`, :func:`linf_spacetime_norm`):
  quadrature over the stored time nodes, trapezoid in time and the exact
  uniform mean in space;
* free-wave based (:class:`FreeWave` and the ``free_*`` functions): the wave
  is sampled directly on a periodic grid whose size is chosen so the
  integral of |u|^p is exact for even p.

For free waves a global unimodular phase is factored out of each mode
(frequencies are re-centred on the support and |xi|^2 is shifted by its
minimum). The modulus is unchanged, so spatial grid sizes depend only on the
width of the support. A single wave may also be Galilean-centred: replacing
phi(xi) by phi(xi + c) transports |u| along x -> x + 2tc, which leaves every
integral over a full period unchanged and shrinks the time frequencies.
"""

from dataclasses import dataclass
import math

import numpy as np
import scipy.fft

from . import _kernels
from .evolution import free_phases
from .spectral_core import SpectralField, TWO_PI, lattice_norm_sq, to_grid

# elements per sampled batch (complex128), ~64 MB
_BATCH_ELEMENTS = 1 << 22


@dataclass(frozen=True)
class SpaceTimeGrid:
    """Uniform grid: S points per spatial axis and J + 1 time nodes on [0, t_span]."""

    spatial: tuple
    time_nodes: int
    t_span: float = TWO_PI

    def __post_init__(self):
        object.__setattr__(self, "spatial", tuple(int(s) for s in np.atleast_1d(self.spatial)))
        if self.time_nodes < 1:
            raise ValueError("time_nodes must be >= 1")

    @classmethod
    def for_lp(cls, dim, cutoff, p, time_nodes, t_span=TWO_PI):
        """Spatial size S >= p K + 1 per axis: exact for |u|^p when p is even."""
        s = scipy.fft.next_fast_len(int(math.ceil(p)) * int(cutoff) + 1)
        return cls((s,) * dim, time_nodes, t_span)

    def times(self):
        return np.linspace(0.0, self.t_span, self.time_nodes + 1)

    def time_weights(self):
        h = self.t_span / self.time_nodes
        w = np.full(self.time_nodes + 1, h)
        w[0] = w[-1] = 0.5 * h
        return w

    @property
    def spatial_points(self):
        return int(np.prod(self.spatial))


def _check_span(traj, grid):
    if traj.J < 1:
        raise ValueError("space-time norms need at least two time nodes")
    if not math.isclose(traj.T, TWO_PI, rel_tol=1e-12):
        raise ValueError(f"trajectory must span [0, 2 pi], got T = {traj.T}")
    if grid is not None and grid.time_nodes != traj.J:
        raise ValueError("grid time nodes do not match the trajectory")


def _node_batches(traj, sizes):
    per_node = int(np.prod(sizes))
    step = max(1, _BATCH_ELEMENTS // per_node)
    for start in range(0, traj.times.size, step):
        stop = min(start + step, traj.times.size)
        yield start, stop, to_grid(traj.states[start:stop], traj.dim, traj.cutoff, sizes)


def lp_spacetime_norm(traj, p, grid=None):
    """(int_0^{2pi} int_{T^n} |u|^p dx dt)^(1/p) by quadrature on the trajectory nodes."""
    if p < 1:
        raise ValueError("p must be >= 1")
    _check_span(traj, grid)
    if grid is None:
        grid = SpaceTimeGrid.for_lp(traj.dim, traj.cutoff, p, traj.J)
    h = traj.step
    w = np.full(traj.times.size, h)
    w[0] = w[-1] = 0.5 * h
    total = 0.0
    per_node = grid.spatial_points
    for start, stop, vals in _node_batches(traj, grid.spatial):
        for j in range(stop - start):
            total += w[start + j] * _kernels.abs_pow_sum(vals[j], float(p)) / per_node
    total *= TWO_PI ** traj.dim
    return total ** (1.0 / p)


def linf_spacetime_norm(traj, grid=None):
    """Largest |u| over the sampled nodes; a lower bound for the true supremum."""
    if traj.J < 1:
        raise ValueError("need at least two time nodes")
    if grid is None:
        s = scipy.fft.next_fast_len(4 * (2 * traj.cutoff + 1))
        grid = SpaceTimeGrid((s,) * traj.dim, traj.J, traj.T)
    top = 0.0
    for _, _, vals in _node_batches(traj, grid.spatial):
        top = max(top, _kernels.abs_max(vals))
    return top


# --------------------------------------------------------------------------
# 2-variation and the Y^s diagnostic
# --------------------------------------------------------------------------

def two_variation(seq):
    """sqrt of max over increasing index subsequences of sum |v_{j_{m+1}} - v_{j_m}|^2.

    Computed exactly as a longest path in the complete DAG on the indices.
    """
    seq = np.asarray(seq, dtype=np.complex128).reshape(-1)
    if seq.size == 0:
        raise ValueError("sequence must be nonempty")
    return float(np.sqrt(_kernels.variation2_sq(seq[None, :])[0]))


def mode_sequences(traj):
    """Interaction-picture samples exp(+i t_j |xi|^2) u_hat(t_j, xi), shape (modes, nodes)."""
    v = np.conj(free_phases(traj.dim, traj.cutoff, traj.times)) * traj.states
    return v.reshape(traj.times.size, -1).T


def y_norm_diagnostic(traj, s):
    """(sum_xi <xi>^(2s) [V2(v_xi)^2 + |v_xi(0)|^2])^(1/2) on the sampled partition."""
    seqs = mode_sequences(traj)
    weights = ((1.0 + lattice_norm_sq(traj.dim, traj.cutoff).astype(np.float64)) ** float(s)).reshape(-1)
    live = np.any(seqs != 0, axis=1)
    if not np.any(live):
        return 0.0
    seqs = seqs[live]
    var2 = _kernels.variation2_sq(seqs)
    start = np.abs(seqs[:, 0]) ** 2
    return float(np.sqrt(np.sum(weights[live] * (var2 + start))))


# --------------------------------------------------------------------------
# free waves sampled in a reduced frame
# --------------------------------------------------------------------------

class FreeWave:
    """Free Schrodinger wave of a field, with the modulus-preserving frame reduction.

    The wave is represented by its nonzero modes: centred spatial frequencies
    ``eta`` and integer time frequencies ``theta = |xi|^2 - min |xi|^2``.
    """

    def __init__(self, field, amplitudes=None, galilean=False):
        self.field = field
        self.galilean = bool(galilean)
        pts = field.support()
        if pts.size == 0:
            pts = np.zeros((0, field.dim), dtype=np.int64)
        self.points = pts.astype(np.int64)
        if amplitudes is None:
            amplitudes = field.coeffs[tuple((pts + field.cutoff).T)] if pts.size else np.zeros(0, complex)
        self.amplitudes = np.asarray(amplitudes, dtype=np.complex128)
        if pts.size:
            lo, hi = pts.min(axis=0), pts.max(axis=0)
            self.center = (lo + hi) // 2
            self.widths = tuple(int(w) for w in hi - lo)
            frame = pts - self.center if self.galilean else pts
            r2 = np.sum(frame * frame, axis=1)
            self.theta = r2 - r2.min()
            self.time_width = int(self.theta.max())
        else:
            self.center = np.zeros(field.dim, dtype=np.int64)
            self.widths = (0,) * field.dim
            self.theta = np.zeros(0, dtype=np.int64)
            self.time_width = 0
        self.eta = self.points - self.center

    @property
    def dim(self):
        return self.field.dim

    @property
    def modes(self):
        return self.amplitudes.size

    def with_amplitudes(self, amplitudes):
        """Same support, new amplitudes."""
        out = object.__new__(FreeWave)
        out.__dict__.update(self.__dict__)
        out.amplitudes = np.asarray(amplitudes, dtype=np.complex128)
        return out

    def to_field(self):
        arr = np.zeros(self.field.shape, dtype=np.complex128)
        if self.modes:
            arr[tuple((self.points + self.field.cutoff).T)] = self.amplitudes
        return SpectralField(self.field.dim, self.field.cutoff, arr)

    def l2_norm(self):
        return TWO_PI ** (0.5 * self.dim) * float(np.sqrt(np.sum(np.abs(self.amplitudes) ** 2)))

    def _flat_index(self, spatial):
        idx = tuple((self.eta[:, i] % spatial[i]) for i in range(self.dim))
        return np.ravel_multi_index(idx, spatial)

    def _phases(self, J, nodes):
        turns = (np.outer(nodes, self.theta) % J).astype(np.float64)
        return np.exp(-2j * math.pi * turns / J)

    def sample(self, spatial, J, nodes):
        """Reduced-frame values on the grid for time nodes t = 2 pi j / J, j in ``nodes``."""
        spatial = tuple(spatial)
        nodes = np.asarray(nodes, dtype=np.int64)
        buf = np.zeros((nodes.size, int(np.prod(spatial))), dtype=np.complex128)
        if self.modes:
            buf[:, self._flat_index(spatial)] = self._phases(J, nodes) * self.amplitudes
        buf = buf.reshape((nodes.size,) + spatial)
        return scipy.fft.ifftn(buf, axes=tuple(range(1, self.dim + 1)), norm="forward")

    def adjoint(self, values, spatial, J, nodes):
        """Conjugate transpose of :meth:`sample` applied to grid values; returns amplitudes."""
        spatial = tuple(spatial)
        nodes = np.asarray(nodes, dtype=np.int64)
        spec = scipy.fft.fftn(values, axes=tuple(range(1, self.dim + 1)), norm="backward")
        spec = spec.reshape(nodes.size, -1)[:, self._flat_index(spatial)]
        return np.sum(np.conj(self._phases(J, nodes)) * spec, axis=0)


@dataclass(frozen=True)
class QuadratureInfo:
    spatial: tuple
    time_nodes: int
    exact: bool


def exact_grid(waves, powers):
    """Smallest grid on which the mean of prod |w_j|^{p_j} is exact (even p_j).

    Spatial size per axis exceeds sum (p_j / 2) * width_j, time nodes exceed
    sum (p_j / 2) * time_width_j. Odd or fractional powers are rounded up
    and the result is marked inexact.
    """
    dim = waves[0].dim
    half = [math.ceil(p / 2.0) for p in powers]
    exact = all(float(p) == 2 * h for p, h in zip(powers, half))
    spatial = []
    for i in range(dim):
        span = sum(h * w.widths[i] for h, w in zip(half, waves))
        need = max(span + 1, max(w.widths[i] + 1 for w in waves))
        spatial.append(scipy.fft.next_fast_len(need))
    J = sum(h * w.time_width for h, w in zip(half, waves)) + 1
    return tuple(spatial), int(J), exact


def _batches(J, per_node):
    step = max(1, _BATCH_ELEMENTS // max(per_node, 1))
    for start in range(0, J, step):
        yield np.arange(start, min(J, start + step))


def _as_waves(items):
    # a lone wave can be Galilean-centred; products must share one frame
    galilean = len(items) == 1
    return [w if isinstance(w, FreeWave) else FreeWave(w, galilean=galilean) for w in items]


def free_wave_integral(waves, powers, spatial=None, time_nodes=None, max_time_nodes=None):
    """int_0^{2pi} int_{T^n} prod_j |e^{it Delta} phi_j|^{p_j} dx dt.

    Returns (value, QuadratureInfo). The grid is exact unless overridden or
    capped by ``max_time_nodes``.
    """
    waves = _as_waves(waves)
    if len(waves) != len(powers):
        raise ValueError("one power per wave")
    dims = {w.dim for w in waves}
    if len(dims) != 1:
        raise ValueError("waves live in different dimensions")
    dim = dims.pop()
    if any(w.modes == 0 for w in waves):
        return 0.0, QuadratureInfo((1,) * dim, 1, True)
    auto_spatial, auto_J, exact = exact_grid(waves, powers)
    if spatial is None:
        spatial = auto_spatial
    else:
        spatial = tuple(int(s) for s in np.atleast_1d(spatial))
        if len(spatial) == 1:
            spatial = spatial * dim
        exact = exact and all(s >= a for s, a in zip(spatial, auto_spatial))
    J = auto_J if time_nodes is None else int(time_nodes)
    if max_time_nodes is not None and J > max_time_nodes:
        J = int(max_time_nodes)
    exact = exact and J >= auto_J
    per_node = int(np.prod(spatial))
    total = 0.0
    single = len(waves) == 1
    for nodes in _batches(J, per_node):
        if single:
            total += _kernels.abs_pow_sum(waves[0].sample(spatial, J, nodes), float(powers[0]))
            continue
        prod = None
        for w, p in zip(waves, powers):
            v = w.sample(spatial, J, nodes)
            m2 = v.real * v.real + v.imag * v.imag
            term = m2 if p == 2 else m2 ** (0.5 * p)
            prod = term if prod is None else prod * term
        total += float(np.sum(prod))
    value = TWO_PI ** (dim + 1) * total / (J * per_node)
    return value, QuadratureInfo(tuple(spatial), J, exact)


def free_wave_lp_norm(field, p, **grid_kw):
    """||e^{it Delta} phi||_{L^p([0,2pi] x T^n)}."""
    if p < 1:
        raise ValueError("p must be >= 1")
    value, _ = free_wave_integral([field], [p], **grid_kw)
    return value ** (1.0 / p)


def free_product_l2_norm(fields, **grid_kw):
    """|| prod_j e^{it Delta} phi_j ||_{L^2([0,2pi] x T^n)}."""
    value, _ = free_wave_integral(list(fields), [2] * len(fields), **grid_kw)
    return math.sqrt(value)


def linf_grid(wave, oversample=8, max_time_nodes=None):
    """Sampling grid for sup-norm estimates: ``oversample`` points per unit width."""
    spatial = tuple(scipy.fft.next_fast_len(oversample * max(w, 1) + 1) for w in wave.widths)
    J = 2 * oversample * max(wave.time_width, 1)
    if max_time_nodes is not None:
        J = min(J, int(max_time_nodes))
    return spatial, int(J)


def free_wave_linf_norm(field, spatial=None, time_nodes=None, oversample=8, max_time_nodes=None):
    """max |e^{it Delta} phi| over a uniform periodic space-time grid (includes t = 0, x = 0)."""
    wave = field if isinstance(field, FreeWave) else FreeWave(field, galilean=True)
    if wave.modes == 0:
        return 0.0
    auto_spatial, auto_J = linf_grid(wave, oversample, max_time_nodes)
    spatial = auto_spatial if spatial is None else tuple(np.atleast_1d(spatial).astype(int))
    if len(spatial) == 1:
        spatial = spatial * wave.dim
    J = auto_J if time_nodes is None else int(time_nodes)
    top = 0.0
    for nodes in _batches(J, int(np.prod(spatial))):
        top = max(top, _kernels.abs_max(wave.sample(spatial, J, nodes)))
    return top


# --------------------------------------------------------------------------
# tensor-product data: phi_hat(xi) = prod_i a_i(xi_i)
# --------------------------------------------------------------------------

def tensor_field(factors):
    """n-dimensional field with coefficients prod_i a_i(xi_i) from 1-d factors."""
    factors = list(factors)
    if any(f.dim != 1 for f in factors):
        raise ValueError("tensor factors must be one-dimensional fields")
    K = max(f.cutoff for f in factors)
    arr = None
    for f in factors:
        c = f.recut(K).coeffs
        arr = c if arr is None else np.multiply.outer(arr, c)
    return SpectralField(len(factors), K, arr)


def free_tensor_integral(factors, p, time_nodes=None):
    """int_0^{2pi} int_{T^n} |e^{it Delta} phi|^p for tensor data phi = a_1 x ... x a_n.

    The wave factorizes as prod_i u_i(t, x_i), so the spatial integral is a
    product of one-dimensional integrals at each time node. Each factor is
    Galilean-centred on its own axis, which is the n-dimensional Galilean
    shift by the vector of centres.
    """
    waves = [FreeWave(f, galilean=True) for f in factors]
    if any(w.dim != 1 for w in waves):
        raise ValueError("tensor factors must be one-dimensional fields")
    if any(w.modes == 0 for w in waves):
        return 0.0, QuadratureInfo((1,) * len(waves), 1, True)
    half = math.ceil(p / 2.0)
    exact = float(p) == 2 * half
    spatial = [scipy.fft.next_fast_len(half * w.widths[0] + 1) for w in waves]
    auto_J = half * sum(w.time_width for w in waves) + 1
    J = auto_J if time_nodes is None else int(time_nodes)
    exact = exact and J >= auto_J
    acc = 0.0
    for nodes in _batches(J, max(spatial)):
        prod = np.ones(nodes.size)
        for w, S in zip(waves, spatial):
            v = w.sample((S,), J, nodes)
            m2 = v.real * v.real + v.imag * v.imag
            prod *= np.sum(m2 ** (0.5 * p), axis=1) / S
        acc += float(np.sum(prod))
    value = TWO_PI ** (len(waves) + 1) * acc / J
    return value, QuadratureInfo(tuple(spatial), J, exact)
