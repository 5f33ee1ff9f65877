"""Collective spin operators in the Dicke basis and pure-state moments.

States are real amplitude vectors indexed by ``m = -S, ..., S`` (ascending).
All Hamiltonians used here are real symmetric tridiagonal matrices, so their
ground states are real and ``<S_y> = 0`` identically.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import _tridiag
from .errors import DegenerateInput, DomainError, NonConvergence

MAX_BISECTION = 100
MAX_INVERSE = 12


@dataclass(frozen=True)
class SpinLength:
    """Spin length stored as ``two_s = 2S`` so half-integers are exact."""

    two_s: int

    def __post_init__(self):
        if int(self.two_s) != self.two_s or self.two_s < 1:
            raise DomainError(f"two_s must be a positive integer, got {self.two_s!r}")
        object.__setattr__(self, "two_s", int(self.two_s))

    @classmethod
    def from_s(cls, s) -> "SpinLength":
        two = Fraction(s) * 2
        if two.denominator != 1:
            raise DomainError(f"S must be integer or half-integer, got {s!r}")
        return cls(int(two))

    @property
    def s(self) -> float:
        return self.two_s / 2

    @property
    def dim(self) -> int:
        return self.two_s + 1

    @property
    def is_integer(self) -> bool:
        return self.two_s % 2 == 0

    def m_values(self) -> np.ndarray:
        return np.arange(self.dim) - self.s

    def __str__(self):
        return str(self.two_s // 2) if self.is_integer else f"{self.two_s}/2"


def as_spin(spin) -> SpinLength:
    """Accept a SpinLength or a numeric S (integer or half-integer)."""
    if isinstance(spin, SpinLength):
        return spin
    return SpinLength.from_s(spin)


@dataclass(frozen=True)
class TridiagonalOperator:
    diagonal: np.ndarray
    off_diagonal: np.ndarray

    def __post_init__(self):
        d = np.array(self.diagonal, dtype=float)
        e = np.array(self.off_diagonal, dtype=float)
        if d.ndim != 1 or e.ndim != 1 or e.shape[0] != max(d.shape[0] - 1, 0):
            raise DomainError("off_diagonal must have length len(diagonal) - 1")
        d.setflags(write=False)
        e.setflags(write=False)
        object.__setattr__(self, "diagonal", d)
        object.__setattr__(self, "off_diagonal", e)

    @property
    def dim(self) -> int:
        return self.diagonal.shape[0]

    def dense(self) -> np.ndarray:
        return (np.diag(self.diagonal) + np.diag(self.off_diagonal, 1)
                + np.diag(self.off_diagonal, -1))

    def matvec(self, v) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        out = self.diagonal * v
        out[:-1] += self.off_diagonal * v[1:]
        out[1:] += self.off_diagonal * v[:-1]
        return out


@dataclass(frozen=True)
class SpinState:
    spin: SpinLength
    amplitudes: np.ndarray

    def __post_init__(self):
        a = np.array(self.amplitudes, dtype=float)
        if a.shape != (self.spin.dim,):
            raise DomainError(f"expected {self.spin.dim} amplitudes, got shape {a.shape}")
        norm = np.linalg.norm(a)
        if abs(norm - 1.0) > 1e-12:
            raise DomainError(f"state is not normalized (norm {norm!r})")
        a.setflags(write=False)
        object.__setattr__(self, "amplitudes", a)

    @classmethod
    def normalized(cls, spin, amplitudes) -> "SpinState":
        a = np.asarray(amplitudes, dtype=float)
        return cls(as_spin(spin), a / np.linalg.norm(a))


@dataclass(frozen=True)
class StateMoments:
    mean_sx: float
    mean_sz: float
    var_sz: float
    mean_sy2: float
    mean_sz2: float
    mean_sx2: float

    @property
    def var_sx(self) -> float:
        return self.mean_sx2 - self.mean_sx ** 2


def _ladder(spin: SpinLength) -> np.ndarray:
    """<m+1|S_+|m> for m = -S .. S-1."""
    s = spin.s
    m = spin.m_values()[:-1]
    return np.sqrt(s * (s + 1) - m * (m + 1))


def build_sx(spin) -> TridiagonalOperator:
    spin = as_spin(spin)
    return TridiagonalOperator(np.zeros(spin.dim), 0.5 * _ladder(spin))


def build_sz2(spin, shift: float = 0.0) -> TridiagonalOperator:
    """Diagonal operator ``(S_z - shift)^2``."""
    spin = as_spin(spin)
    return TridiagonalOperator((spin.m_values() - shift) ** 2, np.zeros(spin.dim - 1))


def build_hamiltonian(lam: float, spin, shift: float = 0.0) -> TridiagonalOperator:
    """``lam * S_x + (S_z - shift)^2``.

    ``shift = 0`` is the Lagrange-multiplier Hamiltonian whose ground states
    minimize Var[S_z] at fixed <S_x> for integer S.  A non-zero shift is used
    for half-integer spins, where the minimizer has <S_z> != 0.
    """
    if not np.isfinite(lam):
        raise DomainError(f"lambda must be finite, got {lam!r}")
    spin = as_spin(spin)
    return TridiagonalOperator((spin.m_values() - shift) ** 2, lam * 0.5 * _ladder(spin))


def _spin_from_dim(dim: int) -> SpinLength:
    return SpinLength(dim - 1)


def ground_state(op: TridiagonalOperator, max_iter: int = MAX_BISECTION) -> tuple[float, SpinState]:
    """Lowest eigenpair of a symmetric tridiagonal operator.

    Sturm-sequence bisection brackets the smallest eigenvalue to machine
    precision, inverse iteration then yields the eigenvector.  The returned
    state has its largest-magnitude amplitude positive.

    Raises:
        NonConvergence: bisection exceeded ``max_iter`` steps or inverse
            iteration failed to reach the residual tolerance.
    """
    energy, vec = _lowest(op.diagonal, op.off_diagonal, max_iter)
    return energy, SpinState(_spin_from_dim(op.dim), vec)


def _lowest(diag: np.ndarray, off: np.ndarray, max_iter: int = MAX_BISECTION):
    energy, vec, residual, status = _tridiag.lowest_eigenpair(
        np.ascontiguousarray(diag, dtype=np.float64),
        np.ascontiguousarray(off, dtype=np.float64),
        max_iter, MAX_INVERSE)
    if status == _tridiag.BISECTION_CAP:
        raise NonConvergence(f"eigenvalue bisection did not converge in {max_iter} steps")
    if status != _tridiag.OK:
        raise NonConvergence(f"inverse iteration stalled (residual {residual:.3e})")
    return float(energy), vec


def moments(state: SpinState) -> StateMoments:
    """First and second moments from ladder-operator matrix elements."""
    spin = state.spin
    s = spin.s
    a = state.amplitudes
    m = spin.m_values()
    p = a * a
    mean_sz = float(np.dot(m, p))
    mean_sz2 = float(np.dot(m * m, p))
    lad = _ladder(spin)
    mean_sx = float(np.dot(lad, a[:-1] * a[1:]))
    # <S_+^2> = <S_-^2> for real amplitudes
    if spin.dim > 2:
        plus2 = float(np.dot(lad[:-1] * lad[1:], a[:-2] * a[2:]))
    else:
        plus2 = 0.0
    casimir = s * (s + 1)
    mean_sy2 = 0.5 * (casimir - mean_sz2 - plus2)
    mean_sx2 = 0.5 * (casimir - mean_sz2 + plus2)
    var_sz = max(mean_sz2 - mean_sz ** 2, 0.0)
    return StateMoments(mean_sx=mean_sx, mean_sz=mean_sz, var_sz=var_sz,
                        mean_sy2=mean_sy2, mean_sz2=mean_sz2, mean_sx2=mean_sx2)


def qfi_pure(state: SpinState) -> float:
    """Quantum Fisher information of a pure state for rotations about y, 4 Var[S_y]."""
    return 4.0 * moments(state).mean_sy2


def squeezing(state: SpinState) -> float:
    """Wineland coefficient of a spin-S state read as N = 2S spin-1/2 particles."""
    mo = moments(state)
    if mo.mean_sx == 0.0:
        raise DegenerateInput("state has zero polarization along x")
    return state.spin.two_s * mo.var_sz / mo.mean_sx ** 2


def dicke_state(spin, m) -> SpinState:
    """|S, m>."""
    spin = as_spin(spin)
    idx = int(round(m + spin.s))
    if not 0 <= idx < spin.dim or abs(idx - spin.s - m) > 1e-12:
        raise DomainError(f"m={m} not allowed for S={spin}")
    a = np.zeros(spin.dim)
    a[idx] = 1.0
    return SpinState(spin, a)


def coherent_state_x(spin) -> SpinState:
    """Coherent state polarized along +x, i.e. the ground state of -S_x."""
    spin = as_spin(spin)
    sx = build_sx(spin)
    _, st = ground_state(TridiagonalOperator(sx.diagonal, -sx.off_diagonal))
    return st
