"""Minimal-variance functions F_S[x] of a spin S and their limits.

``F_S[x]`` is the smallest ``Var[S_z] / S`` over spin-S states with
``|<S_x>| / S = x``.  For integer S it is traced by ground states of
``lambda S_x + S_z^2``.  For half-integer S the minimizer does not keep
``<S_z> = 0`` at small polarization, so the curve is the lower envelope over
shifted Hamiltonians ``lambda S_x + (S_z - mu)^2`` with ``mu`` in ``[0, 1/2]``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import _fs_kernels as _k
from ._tridiag import BISECTION_CAP
from .errors import DomainError, NonConvergence
from .spin_core import (MAX_BISECTION, MAX_INVERSE, SpinLength, as_spin,
                        build_sx)

LAMBDA_RANGE = (1e-6, 1e6)
DEFAULT_POINTS = 512
MIN_POINTS = 16
BISECTION_STEPS = 32
# half-integer spins bisect the whole angle range instead of a table bracket
FULL_BISECTION_STEPS = 56
SHIFT_STEPS = 48
X_SLACK = 1e-12
# below this distance from x = 1 the polarization is not resolved in floating point
NEAR_ONE = 1e-12


@dataclass(frozen=True)
class FsTable:
    """Samples ``(lambda, x, f)`` of one F_S curve, ordered by ``x``."""

    spin: SpinLength
    samples: tuple

    @property
    def lam(self) -> np.ndarray:
        return np.array([s[0] for s in self.samples])

    @property
    def x(self) -> np.ndarray:
        return np.array([s[1] for s in self.samples])

    @property
    def f(self) -> np.ndarray:
        return np.array([s[2] for s in self.samples])

    def f_at_zero(self) -> float:
        """Intercept of f extrapolated to x = 0, linear in x^2 from the first two samples."""
        (_, x0, f0), (_, x1, f1) = self.samples[:2]
        slope = (f1 - f0) / (x1 * x1 - x0 * x0)
        return f0 - slope * x0 * x0


def _arrays(spin: SpinLength):
    return spin.m_values().astype(float), np.array(build_sx(spin).off_diagonal)


def _raise_status(status, what):
    if status == BISECTION_CAP:
        raise NonConvergence(f"{what}: eigenvalue bisection did not converge")
    if status == _k.BAD_BRACKET:
        raise NonConvergence(f"{what}: target polarization outside the curve")
    raise NonConvergence(f"{what}: eigensolver failed (status {status})")


def _point(spin: SpinLength, mu: float, t: float):
    m, off = _arrays(spin)
    pol, var, _, st = _k.curve_point(m, off, mu, t, MAX_BISECTION, MAX_INVERSE)
    if st != 0:
        _raise_status(st, f"S={spin}")
    return pol / spin.s, var / spin.s


def build_fs_table(spin, n_points: int = DEFAULT_POINTS) -> FsTable:
    """Tabulate F_S on a logarithmic lambda grid over ``LAMBDA_RANGE``.

    Integer S: each sample is the ground state of ``lambda S_x + S_z^2``.
    Half-integer S: x comes from the ``mu = 1/2`` curve, which starts at zero
    polarization, and f is the minimum over shifts at that x.

    Raises:
        DomainError: fewer than ``MIN_POINTS`` points.
        NonConvergence: solver failure or non-monotone samples.
    """
    spin = as_spin(spin)
    if int(n_points) != n_points or n_points < MIN_POINTS:
        raise DomainError(f"n_points must be an integer >= {MIN_POINTS}, got {n_points!r}")
    lams = np.geomspace(*LAMBDA_RANGE, int(n_points))
    ts = np.arctan(lams)
    mu = 0.0 if spin.is_integer else 0.5
    xs = np.empty(len(lams))
    fs = np.empty(len(lams))
    for i, t in enumerate(ts):
        xs[i], fs[i] = _point(spin, mu, t)
    if not spin.is_integer:
        fs = np.array([fs_eval(spin, x) for x in xs])
    if np.any(np.diff(xs) <= 0.0):
        i = int(np.argmin(np.diff(xs)))
        raise NonConvergence(f"S={spin}: polarization not increasing near lambda={lams[i]:.6g}")
    if np.any(np.diff(fs) < -1e-12):
        i = int(np.argmin(np.diff(fs)))
        raise NonConvergence(f"S={spin}: variance decreasing near lambda={lams[i]:.6g}")
    if np.any(fs > 0.5 + 1e-9):
        raise NonConvergence(f"S={spin}: f exceeds 1/2")
    return FsTable(spin, tuple(zip(lams.tolist(), xs.tolist(), fs.tolist())))


@lru_cache(maxsize=None)
def _bracket_grid(spin: SpinLength):
    """Angles and polarizations of the default table, padded with both ends."""
    table = build_fs_table(spin)
    t = np.concatenate(([0.0], np.arctan(table.lam), [_k.HALF_PI]))
    x = np.concatenate(([0.0], table.x, [1.0]))
    return t, x


def _checked_x(x) -> float:
    x = abs(float(x))
    if not np.isfinite(x) or x > 1.0 + X_SLACK:
        raise DomainError(f"|x| must not exceed 1, got {x!r}")
    return min(x, 1.0)


def fs_eval(spin, x) -> float:
    """F_S[|x|] by bisection on the ground-state curve.

    Raises:
        DomainError: |x| > 1.
        NonConvergence: root finding or the eigensolver failed.
    """
    return _fs_eval(as_spin(spin), _checked_x(x))


@lru_cache(maxsize=65536)
def _fs_eval(spin: SpinLength, x: float) -> float:
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 0.5
    if x > 1.0 - NEAR_ONE:
        # 1/2 - F grows as sqrt(1 - x) next to the coherent state
        x_ref = 1.0 - NEAR_ONE
        ref = _fs_eval(spin, x_ref)
        return float(0.5 - (0.5 - ref) * np.sqrt((1.0 - x) / (1.0 - x_ref)))
    m, off = _arrays(spin)
    if spin.is_integer:
        t, xs = _bracket_grid(spin)
        i = int(np.searchsorted(xs, x))
        i = min(max(i, 1), len(xs) - 1)
        f, _, st = _k.solve_polarization(m, off, spin.s, 0.0, x, t[i - 1], t[i],
                                         BISECTION_STEPS, MAX_BISECTION, MAX_INVERSE)
    else:
        f, _, st = _k.min_over_shift(m, off, spin.s, x, 0.0, 0.5, SHIFT_STEPS,
                                     FULL_BISECTION_STEPS, MAX_BISECTION, MAX_INVERSE)
    if st != 0:
        _raise_status(st, f"F_{spin}[{x!r}]")
    return float(f)


def fs_analytic_large_s(spin, x) -> float:
    """Closed-form approximation to F_S[x] for S >> 1."""
    s = as_spin(spin).s
    x = _checked_x(x)
    u = 1.0 - x * x
    return 0.5 * (1.0 + s * u - np.sqrt(u * ((1.0 + s) ** 2 - s * s * x * x)))


def fs_small_x_coefficient(spin) -> float:
    """lim F_S[x] / x^2 as x -> 0, which is 1 / (2 + 2S) for integer S."""
    spin = as_spin(spin)
    if not spin.is_integer:
        raise DomainError(f"small-x coefficient only defined for integer S, got S={spin}")
    return 1.0 / (2.0 + 2.0 * spin.s)


def perturbative_moments(spin, lam: float) -> tuple[float, float, float]:
    """Second-order moments ``(<S_x>, <S_z^2>, xi2)`` of the ground state of
    ``lam S_x + S_z^2`` for integer S and small ``lam``."""
    s = as_spin(spin).s
    c = s * (s + 1.0)
    den = 2.0 + c * lam * lam
    return -2.0 * c * lam / den, 1.0 - 2.0 / den, 1.0 / (s + 1.0) + s * lam * lam / 2.0


def xi2_min(spin) -> float:
    """Smallest Wineland coefficient reachable by a spin S, 1 / (1 + S)."""
    return 1.0 / (1.0 + as_spin(spin).s)
