"""Free Schrodinger flow, power nonlinearity, Duhamel quadrature and Picard iteration.

Sign convention: the solved equation is

    i u_t + Delta u = mu |u|^(2k) u,

so the free propagator multiplies each mode by exp(-i t |xi|^2) and the
integral form reads u = e^{it Delta} phi - i mu I(|u|^(2k) u), with
I(f)(t) = int_0^t e^{i(t-s) Delta} f(s) ds.
"""

from dataclasses import dataclass, field
import math

import numpy as np
import scipy.integrate

from .spectral_core import (
    SpectralField,
    SmoothCutoff,
    critical_index,
    dealiased_size,
    from_grid,
    lattice_norm_sq,
    to_grid,
)


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Fields sampled on the uniform grid t_j = j T / J, j = 0..J."""

    dim: int
    cutoff: int
    times: np.ndarray
    states: np.ndarray

    def __post_init__(self):
        times = np.array(self.times, dtype=np.float64)
        states = np.array(self.states, dtype=np.complex128)
        side = 2 * self.cutoff + 1
        if states.shape != (times.size,) + (side,) * self.dim:
            raise ValueError(f"states shape {states.shape} does not match {times.size} nodes on (2K+1)^n")
        if times.size >= 2:
            h = np.diff(times)
            if not np.allclose(h, h[0], rtol=1e-12, atol=0.0) or h[0] <= 0:
                raise ValueError("trajectory times must be uniform and increasing")
        times.setflags(write=False)
        states.setflags(write=False)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "states", states)

    @property
    def J(self):
        return self.times.size - 1

    @property
    def T(self):
        return float(self.times[-1])

    @property
    def step(self):
        return self.T / self.J if self.J else 0.0

    def state(self, j):
        return SpectralField(self.dim, self.cutoff, self.states[j])

    def __len__(self):
        return self.times.size

    def map_states(self, fn):
        return Trajectory(self.dim, self.cutoff, self.times, fn(self.states))


def time_grid(T, J):
    if J < 1:
        raise ValueError("need at least one time step")
    return np.linspace(0.0, float(T), int(J) + 1)


def free_phases(dim, cutoff, times):
    """exp(-i t |xi|^2) for every node and mode, shape (len(times),) + box."""
    w = lattice_norm_sq(dim, cutoff).astype(np.float64)
    t = np.asarray(times, dtype=np.float64).reshape((-1,) + (1,) * dim)
    return np.exp(-1j * t * w)


def free_evolve(field, t):
    """Exact free flow: u_hat(t, xi) = exp(-i t |xi|^2) phi_hat(xi)."""
    # |xi|^2 is an integer, so reducing t modulo 2 pi keeps periodicity exact
    tt = math.fmod(float(t), 2.0 * math.pi)
    phase = np.exp(-1j * tt * field.norm_sq_weights())
    return field.with_coeffs(field.coeffs * phase)


def free_trajectory(phi, T, J):
    times = time_grid(T, J)
    states = phi.coeffs[None] * free_phases(phi.dim, phi.cutoff, times)
    return Trajectory(phi.dim, phi.cutoff, times, states)


def _nonlinearity_coeffs(coeffs, dim, cutoff, k, mu):
    size = dealiased_size(cutoff, 2 * k + 2)
    u = to_grid(coeffs, dim, cutoff, size)
    mod2 = u.real * u.real + u.imag * u.imag
    return from_grid(mu * mod2 ** k * u, dim, cutoff)


def nonlinearity(field, k, mu):
    """Exact truncation to |xi|_inf <= K of the coefficients of mu |u|^(2k) u."""
    if mu not in (1, -1):
        raise ValueError("mu must be +1 or -1")
    if k < 1:
        raise ValueError("degree k must be >= 1")
    return field.with_coeffs(_nonlinearity_coeffs(field.coeffs, field.dim, field.cutoff, k, mu))


def _cumulative(integrand, h, rule):
    if rule == "trapezoid":
        out = np.zeros_like(integrand)
        if integrand.shape[0] > 1:
            pair = 0.5 * h * (integrand[1:] + integrand[:-1])
            out[1:] = np.cumsum(pair, axis=0)
        return out
    if rule == "simpson":
        out = np.zeros_like(integrand)
        if integrand.shape[0] > 2:
            # cumulative_simpson drops imaginary parts, so integrate them separately
            re = scipy.integrate.cumulative_simpson(integrand.real, dx=h, axis=0)
            im = scipy.integrate.cumulative_simpson(integrand.imag, dx=h, axis=0)
            out[1:] = re + 1j * im
        elif integrand.shape[0] == 2:
            out[1] = 0.5 * h * (integrand[0] + integrand[1])
        return out
    raise ValueError(f"unknown quadrature rule {rule!r}")


def duhamel_all(forcing, rule="trapezoid"):
    """I(f)(t_j) at every node, as a trajectory on the forcing's grid.

    Per mode: exp(-i t |xi|^2) * Q[exp(i s |xi|^2) f_hat(s, xi)](0..t), with Q
    the composite trapezoid (default) or cumulative Simpson rule.
    """
    phases = free_phases(forcing.dim, forcing.cutoff, forcing.times)
    integrand = np.conj(phases) * forcing.states
    acc = _cumulative(integrand, forcing.step, rule)
    return forcing.map_states(lambda _: phases * acc)


def duhamel(forcing, t_index, rule="trapezoid"):
    """I(f)(t_j) for one node j of the forcing's time grid."""
    j = int(t_index)
    if not 0 <= j <= forcing.J:
        raise IndexError(f"t_index {t_index} outside 0..{forcing.J}")
    return duhamel_all(forcing, rule).state(j)


@dataclass
class PicardReport:
    iterates: int = 0
    differences: list = field(default_factory=list)
    ratios: list = field(default_factory=list)
    converged: bool = False
    norm_index: float = 0.0

    def to_dict(self):
        return {"iterates": self.iterates, "differences": list(self.differences),
                "ratios": list(self.ratios), "converged": self.converged,
                "norm_index": self.norm_index}


def _sup_sobolev(states, weights):
    axes = tuple(range(1, states.ndim))
    return float(np.sqrt(np.max(np.sum(weights * (states.real ** 2 + states.imag ** 2), axis=axes))))


def picard_solve(phi, k, mu, T, J, tol=1e-10, max_iter=50, rule="trapezoid", return_parts=False):
    """Solve u = e^{it Delta} phi - i mu I(|u|^(2k) u) on [0, T] by Picard iteration.

    Iterates are whole trajectories on the uniform grid with J steps. The
    iteration stops once the sup-in-time H^{s_{n,k}} distance between
    consecutive iterates drops below ``tol``; at least two iterations are run
    (so one contraction ratio is observed) unless the first update is
    exactly zero. Non-convergence is reported, not raised; iteration also
    stops early once the iterates overflow.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if T < 0 or T > 2.0 * math.pi + 1e-12:
        raise ValueError("T must lie in [0, 2 pi]")
    if mu not in (1, -1):
        raise ValueError("mu must be +1 or -1")
    s = float(critical_index(phi.dim, k))
    report = PicardReport(norm_index=s)
    if T == 0:
        traj = Trajectory(phi.dim, phi.cutoff, np.zeros(1), phi.coeffs[None])
        report.converged = True
        return (traj, report, np.zeros_like(traj.states)) if return_parts else (traj, report)
    if J < 2:
        raise ValueError("need J >= 2 time steps")

    free = free_trajectory(phi, T, J)
    weights = SmoothCutoff(phi.dim, phi.cutoff).sobolev_weights(s)
    c = -1j * mu
    # u = free + D; iterate on the Duhamel part so differences avoid cancellation
    D = np.zeros_like(free.states)
    for m in range(1, max_iter + 1):
        with np.errstate(over="ignore", invalid="ignore"):
            forcing = free.map_states(
                lambda F: _nonlinearity_coeffs(F + D, phi.dim, phi.cutoff, k, mu))
            D_new = c * duhamel_all(forcing, rule).states
            diff = _sup_sobolev(D_new - D, weights)
        if not math.isfinite(diff):
            # iterates blew up; keep the last finite iterate and report divergence
            break
        report.differences.append(diff)
        if len(report.differences) > 1:
            prev = report.differences[-2]
            report.ratios.append(diff / prev if prev > 0 else 0.0)
        D = D_new
        report.iterates = m
        if diff == 0.0 or (diff < tol and m >= 2):
            report.converged = True
            break
    traj = free.map_states(lambda F: F + D)
    if return_parts:
        return traj, report, D
    return traj, report


def fixed_point_residual(traj, phi, k, mu, rule="trapezoid"):
    """sup_t || Phi(u)(t) - u(t) ||_{H^{s_{n,k}}} for the Picard map Phi."""
    s = float(critical_index(phi.dim, k))
    weights = SmoothCutoff(phi.dim, phi.cutoff).sobolev_weights(s)
    free = free_trajectory(phi, traj.T, traj.J)
    forcing = traj.map_states(lambda U: _nonlinearity_coeffs(U, phi.dim, phi.cutoff, k, mu))
    D = -1j * mu * duhamel_all(forcing, rule).states
    return _sup_sobolev(free.states + D - traj.states, weights)
