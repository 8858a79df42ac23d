"""Hot inner loops.

Every kernel has a numba ``@njit`` implementation and a pure-numpy fallback
with the same signature. The compiled path is used when numba imports and
``NLSLAB_DISABLE_JIT`` is unset (or set to ``0``); set ``NLSLAB_DISABLE_JIT=1``
to force numpy. Both paths are exported as ``<name>_jit`` / ``<name>_numpy``
so the benchmark and the tests can compare them directly.
"""

import os

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None


def _jit_disabled():
    flag = os.environ.get("NLSLAB_DISABLE_JIT", "").strip().lower()
    return flag not in ("", "0", "false", "no", "off")


HAVE_NUMBA = numba is not None
USE_JIT = HAVE_NUMBA and not _jit_disabled()


def _njit(func):
    if not HAVE_NUMBA:
        return func
    return numba.njit(cache=True, nogil=True)(func)


# --------------------------------------------------------------------------
# discrete 2-variation: longest path in the complete DAG on the sample indices
# --------------------------------------------------------------------------

def variation2_sq_numpy(values):
    """Squared discrete 2-variation of each row of ``values`` (shape (m, L))."""
    values = np.asarray(values, dtype=np.complex128)
    m, length = values.shape
    best = np.zeros((m, length))
    for b in range(1, length):
        jumps = np.abs(values[:, b:b + 1] - values[:, :b]) ** 2
        best[:, b] = np.max(best[:, :b] + jumps, axis=1)
    if length == 0:
        return np.zeros(m)
    return best.max(axis=1)


@_njit
def _variation2_sq_jit(values):
    m, length = values.shape
    out = np.zeros(m)
    best = np.zeros(length)
    for row in range(m):
        top = 0.0
        for b in range(length):
            vb = values[row, b]
            acc = 0.0
            for a in range(b):
                d = vb - values[row, a]
                cand = best[a] + d.real * d.real + d.imag * d.imag
                if cand > acc:
                    acc = cand
            best[b] = acc
            if acc > top:
                top = acc
        out[row] = top
    return out


def variation2_sq_jit(values):
    return _variation2_sq_jit(np.ascontiguousarray(values, dtype=np.complex128))


# --------------------------------------------------------------------------
# power sums over sampled space-time values
# --------------------------------------------------------------------------

def abs_pow_sum_numpy(z, p):
    """Sum of |z|**p over all entries."""
    mod2 = z.real * z.real + z.imag * z.imag
    if p == 2.0:
        return float(np.sum(mod2))
    return float(np.sum(mod2 ** (0.5 * p)))


@_njit
def _abs_pow_sum_jit(z, half_p):
    acc = 0.0
    even = half_p == np.floor(half_p)
    ip = int(half_p)
    for i in range(z.size):
        w = z[i]
        m2 = w.real * w.real + w.imag * w.imag
        if even:
            term = 1.0
            for _ in range(ip):
                term *= m2
        else:
            term = m2 ** half_p
        acc += term
    return acc


def abs_pow_sum_jit(z, p):
    flat = np.ascontiguousarray(z, dtype=np.complex128).reshape(-1)
    return float(_abs_pow_sum_jit(flat, 0.5 * float(p)))


def abs_max_numpy(z):
    if z.size == 0:
        return 0.0
    return float(np.sqrt(np.max(z.real * z.real + z.imag * z.imag)))


@_njit
def _abs_max_jit(z):
    top = 0.0
    for i in range(z.size):
        w = z[i]
        m2 = w.real * w.real + w.imag * w.imag
        if m2 > top:
            top = m2
    return np.sqrt(top)


def abs_max_jit(z):
    flat = np.ascontiguousarray(z, dtype=np.complex128).reshape(-1)
    return float(_abs_max_jit(flat))


def pow_gradient_numpy(z, p):
    """Return |z|**(p-2) * z (the ascent direction of sum |z|**p)."""
    if p == 2.0:
        return z.copy()
    mod2 = z.real * z.real + z.imag * z.imag
    return mod2 ** (0.5 * (p - 2.0)) * z


@_njit
def _pow_gradient_jit(z, half_q, out):
    even = half_q == np.floor(half_q)
    iq = int(half_q)
    for i in range(z.size):
        w = z[i]
        m2 = w.real * w.real + w.imag * w.imag
        if even:
            scale = 1.0
            for _ in range(iq):
                scale *= m2
        else:
            scale = m2 ** half_q
        out[i] = scale * w


def pow_gradient_jit(z, p):
    flat = np.ascontiguousarray(z, dtype=np.complex128).reshape(-1)
    out = np.empty_like(flat)
    _pow_gradient_jit(flat, 0.5 * (float(p) - 2.0), out)
    return out.reshape(np.shape(z))


# --------------------------------------------------------------------------
# grouped range (max - min) of a value per integer label
# --------------------------------------------------------------------------

def label_spread_numpy(labels, values, nlabels):
    lo = np.full(nlabels, np.inf)
    hi = np.full(nlabels, -np.inf)
    np.minimum.at(lo, labels, values)
    np.maximum.at(hi, labels, values)
    return lo, hi


@_njit
def _label_spread_jit(labels, values, nlabels):
    lo = np.full(nlabels, np.inf)
    hi = np.full(nlabels, -np.inf)
    for i in range(labels.size):
        g = labels[i]
        v = values[i]
        if v < lo[g]:
            lo[g] = v
        if v > hi[g]:
            hi[g] = v
    return lo, hi


def label_spread_jit(labels, values, nlabels):
    return _label_spread_jit(np.ascontiguousarray(labels, dtype=np.int64),
                             np.ascontiguousarray(values, dtype=np.float64),
                             int(nlabels))


if USE_JIT:
    variation2_sq = variation2_sq_jit
    abs_pow_sum = abs_pow_sum_jit
    abs_max = abs_max_jit
    pow_gradient = pow_gradient_jit
    label_spread = label_spread_jit
else:
    variation2_sq = variation2_sq_numpy
    abs_pow_sum = abs_pow_sum_numpy
    abs_max = abs_max_numpy
    pow_gradient = pow_gradient_numpy
    label_spread = label_spread_numpy


def backend():
    return "numba" if USE_JIT else "numpy"
