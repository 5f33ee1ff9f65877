"""Compiled kernels for the minimal-variance curve of a spin S.

The curve is traced by ground states of ``sin(t) S_x + cos(t) (S_z - mu)^2``
for ``t`` in ``[0, pi/2]``.  This is ``lambda S_x + (S_z - mu)^2`` with
``lambda = tan(t)``, compactified so that both ends (pure ``(S_z - mu)^2`` and
pure ``S_x``) are ordinary points of a single bisection interval.
"""

import numpy as np
from numba import njit

from ._tridiag import OK, lowest_eigenpair

HALF_PI = 0.5 * np.pi
UNREACHABLE = 10
BAD_BRACKET = 11
GOLDEN = 0.5 * (np.sqrt(5.0) - 1.0)


@njit(cache=True)
def curve_point(m, sx_off, mu, t, max_iter, max_inverse):
    """Return ``(polarization, var_sz, mean_sz, status)`` at angle ``t``.

    ``polarization`` is ``-<S_x>``, non-negative for ``t`` in ``[0, pi/2]``.
    """
    a = np.sin(t)
    b = 0.0 if t >= HALF_PI else np.cos(t)
    diag = b * (m - mu) ** 2
    off = a * sx_off
    _, v, _, status = lowest_eigenpair(diag, off, max_iter, max_inverse)
    pol = -2.0 * np.sum(sx_off * v[:-1] * v[1:])
    p = v * v
    mz = np.sum(m * p)
    var = np.sum(m * m * p) - mz * mz
    if var < 0.0:
        var = 0.0
    return pol, var, mz, status


@njit(cache=True)
def solve_polarization(m, sx_off, s, mu, target, t_lo, t_hi, iters, max_iter, max_inverse):
    """Bisect ``t`` so that the polarization per spin equals ``target``.

    Returns ``(f, t, status)`` with ``f = Var[S_z] / S`` linearly interpolated
    in ``x`` between the final bracket ends.  ``UNREACHABLE`` flags a target
    below the curve's starting polarization, ``BAD_BRACKET`` a target above it.
    """
    p_lo, v_lo, _, st = curve_point(m, sx_off, mu, t_lo, max_iter, max_inverse)
    if st != OK:
        return np.nan, t_lo, st
    x_lo = p_lo / s
    if target < x_lo:
        return np.inf, t_lo, UNREACHABLE
    p_hi, v_hi, _, st = curve_point(m, sx_off, mu, t_hi, max_iter, max_inverse)
    if st != OK:
        return np.nan, t_hi, st
    x_hi = p_hi / s
    if target > x_hi:
        return np.nan, t_hi, BAD_BRACKET
    for _ in range(iters):
        t = 0.5 * (t_lo + t_hi)
        if t <= t_lo or t >= t_hi:
            break
        p, v, _, st = curve_point(m, sx_off, mu, t, max_iter, max_inverse)
        if st != OK:
            return np.nan, t, st
        x = p / s
        if x < target:
            t_lo, x_lo, v_lo = t, x, v
        else:
            t_hi, x_hi, v_hi = t, x, v
    if x_hi > x_lo:
        w = (target - x_lo) / (x_hi - x_lo)
    else:
        w = 0.5
    var = (1.0 - w) * v_lo + w * v_hi
    return var / s, 0.5 * (t_lo + t_hi), OK


@njit(cache=True)
def min_over_shift(m, sx_off, s, target, mu_lo, mu_hi, mu_iters, iters, max_iter, max_inverse):
    """Golden-section minimum over ``mu`` of the curve value at ``target``.

    Returns ``(f, mu, status)``.
    """
    def value(mu):
        f, _, st = solve_polarization(m, sx_off, s, mu, target, 0.0, HALF_PI,
                                      iters, max_iter, max_inverse)
        if st == UNREACHABLE:
            return np.inf, OK
        return f, st

    a, b = mu_lo, mu_hi
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, st = value(c)
    if st != OK:
        return np.nan, c, st
    fd, st = value(d)
    if st != OK:
        return np.nan, d, st
    for _ in range(mu_iters):
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc, st = value(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd, st = value(d)
        if st != OK:
            return np.nan, 0.5 * (a + b), st
    # the ends are included so a boundary minimum is not missed
    best, arg = fc, c
    if fd < best:
        best, arg = fd, d
    for mu in (mu_lo, mu_hi):
        f, st = value(mu)
        if st != OK:
            return np.nan, mu, st
        if f < best:
            best, arg = f, mu
    return best, arg, OK
