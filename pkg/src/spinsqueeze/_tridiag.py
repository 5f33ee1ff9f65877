"""Compiled kernels for the lowest eigenpair of a real symmetric tridiagonal matrix.

The eigenvalue is bracketed by bisection on the Sturm sequence count, the
eigenvector is then obtained by inverse iteration with a pivoted tridiagonal
LU factorization.  All routines work on plain float64 arrays and return status
codes instead of raising, so they can run under ``numba.njit``.
"""

import numpy as np
from numba import njit

EPS = np.finfo(np.float64).eps
TINY = np.finfo(np.float64).tiny

# status codes
OK = 0
BISECTION_CAP = 1
INVERSE_ITERATION_CAP = 2


@njit(cache=True)
def sturm_count(diag, off2, x, pivmin):
    """Number of eigenvalues strictly below ``x``."""
    n = diag.shape[0]
    q = diag[0] - x
    if abs(q) < pivmin:
        q = -pivmin
    count = 1 if q < 0.0 else 0
    for i in range(1, n):
        q = diag[i] - x - off2[i - 1] / q
        if abs(q) < pivmin:
            q = -pivmin
        if q < 0.0:
            count += 1
    return count


@njit(cache=True)
def _scale(diag, off):
    n = diag.shape[0]
    s = 0.0
    for i in range(n):
        r = abs(diag[i])
        if i > 0:
            r += abs(off[i - 1])
        if i < n - 1:
            r += abs(off[i])
        if r > s:
            s = r
    return s


@njit(cache=True)
def lowest_eigenvalue(diag, off, max_iter):
    """Bisection for the smallest eigenvalue.

    Returns ``(lo, hi, iterations, status)``; on success ``hi - lo`` is at the
    level of machine precision relative to the matrix norm.
    """
    n = diag.shape[0]
    off2 = off * off
    lo = np.inf
    hi = np.inf
    for i in range(n):
        r = 0.0
        if i > 0:
            r += abs(off[i - 1])
        if i < n - 1:
            r += abs(off[i])
        if diag[i] - r < lo:
            lo = diag[i] - r
        # e_i^T T e_i bounds the smallest eigenvalue from above
        if diag[i] < hi:
            hi = diag[i]
    scale = _scale(diag, off)
    big = 1.0
    for i in range(n - 1):
        if off2[i] > big:
            big = off2[i]
    pivmin = TINY * big
    abstol = EPS * scale
    for it in range(max_iter):
        width = hi - lo
        if width <= 2.0 * EPS * max(abs(lo), abs(hi)) + abstol:
            return lo, hi, it, OK
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            return lo, hi, it, OK
        if sturm_count(diag, off2, mid, pivmin) >= 1:
            hi = mid
        else:
            lo = mid
    width = hi - lo
    if width <= 2.0 * EPS * max(abs(lo), abs(hi)) + abstol:
        return lo, hi, max_iter, OK
    return lo, hi, max_iter, BISECTION_CAP


@njit(cache=True)
def _factor(diag, off, shift, pivfloor):
    """Partial-pivoting LU of the tridiagonal matrix ``T - shift``.

    Layout follows LAPACK ``gttrf``: ``u0`` diagonal of U, ``u1``/``u2`` first
    and second superdiagonals, ``lmul`` multipliers, ``swap[i]`` true when rows
    i and i+1 were exchanged.
    """
    n = diag.shape[0]
    u0 = diag - shift
    u1 = np.zeros(max(n - 1, 0))
    u2 = np.zeros(max(n - 2, 0))
    lower = np.zeros(max(n - 1, 0))
    lmul = np.zeros(max(n - 1, 0))
    swap = np.zeros(max(n - 1, 0), dtype=np.bool_)
    for i in range(n - 1):
        u1[i] = off[i]
        lower[i] = off[i]
    for i in range(n - 1):
        if abs(u0[i]) >= abs(lower[i]):
            # no interchange
            if u0[i] == 0.0:
                u0[i] = pivfloor
            f = lower[i] / u0[i]
            lmul[i] = f
            u0[i + 1] -= f * u1[i]
        else:
            f = u0[i] / lower[i]
            u0[i] = lower[i]
            lmul[i] = f
            tmp = u1[i]
            u1[i] = u0[i + 1]
            u0[i + 1] = tmp - f * u0[i + 1]
            if i < n - 2:
                u2[i] = u1[i + 1]
                u1[i + 1] = -f * u1[i + 1]
            swap[i] = True
    if u0[n - 1] == 0.0:
        u0[n - 1] = pivfloor
    return u0, u1, u2, lmul, swap


@njit(cache=True)
def _solve(u0, u1, u2, lmul, swap, rhs):
    n = u0.shape[0]
    y = rhs.copy()
    for i in range(n - 1):
        if swap[i]:
            tmp = y[i]
            y[i] = y[i + 1]
            y[i + 1] = tmp - lmul[i] * y[i]
        else:
            y[i + 1] -= lmul[i] * y[i]
    x = np.empty(n)
    for i in range(n - 1, -1, -1):
        s = y[i]
        if i + 1 < n:
            s -= u1[i] * x[i + 1]
        if i + 2 < n:
            s -= u2[i] * x[i + 2]
        x[i] = s / u0[i]
    return x


@njit(cache=True)
def _matvec(diag, off, v):
    n = diag.shape[0]
    out = diag * v
    for i in range(n - 1):
        out[i] += off[i] * v[i + 1]
        out[i + 1] += off[i] * v[i]
    return out


@njit(cache=True)
def _start_vector(off):
    """Sign pattern of the Perron vector: v[i+1] has the sign of -off[i] * v[i].

    For an irreducible matrix this overlaps the ground state with every
    component of the same sign, so inverse iteration cannot start orthogonal
    to it.  A vanishing coupling is treated as positive, which picks the
    ground state reached in the limit of a small positive coupling.
    """
    n = off.shape[0] + 1
    v = np.empty(n)
    v[0] = 1.0
    for i in range(n - 1):
        v[i + 1] = v[i] if off[i] < 0.0 else -v[i]
    return v / np.sqrt(n)


@njit(cache=True)
def lowest_eigenpair(diag, off, max_iter, max_inverse):
    """Smallest eigenvalue and unit eigenvector.

    Returns ``(energy, vector, residual, status)``.  The energy is the Rayleigh
    quotient of the final vector.  An exactly degenerate ground space yields
    the member selected by the start vector (see ``_start_vector``).
    """
    n = diag.shape[0]
    if n == 1:
        v = np.ones(1)
        return diag[0], v, 0.0, OK
    lo, hi, _, status = lowest_eigenvalue(diag, off, max_iter)
    if status != OK:
        return 0.5 * (lo + hi), np.zeros(n), np.inf, status
    shift = 0.5 * (lo + hi)
    scale = _scale(diag, off)
    pivfloor = EPS * max(scale, TINY)
    tol = 1e-14 * max(1.0, scale)
    u0, u1, u2, lmul, swap = _factor(diag, off, shift, pivfloor)
    v = _start_vector(off)
    energy = shift
    residual = np.inf
    for _ in range(max_inverse):
        w = _solve(u0, u1, u2, lmul, swap, v)
        norm = np.sqrt(np.sum(w * w))
        if not np.isfinite(norm) or norm == 0.0:
            return energy, v, np.inf, INVERSE_ITERATION_CAP
        v = w / norm
        hv = _matvec(diag, off, v)
        energy = np.sum(v * hv)
        r = hv - energy * v
        residual = np.sqrt(np.sum(r * r))
        if residual <= tol:
            break
    if residual > 1e-10 * max(1.0, scale):
        return energy, v, residual, INVERSE_ITERATION_CAP
    # largest-magnitude amplitude positive
    k = 0
    for i in range(1, n):
        if abs(v[i]) > abs(v[k]) * (1.0 + 1e-12):
            k = i
    if v[k] < 0.0:
        v = -v
    return energy, v, residual, OK
