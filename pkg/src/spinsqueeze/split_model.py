"""Moments of an exchange-symmetric state after distributing its particles over modes.

Each particle lands in mode I with probability ``pi[I]`` independently of the
others and of its spin.  Single-particle and pair correlations of the parent
then fix every first and second moment of the mode spins ``S^I``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConsistencyError, DegenerateInput, DomainError, SizeError
from .spin_core import SpinState, build_sx, moments, squeezing
from .witnesses import (MAX_ENUMERATION_MODES, ModeMomentSet, g2_two_mode,
                        gk2, gk2_symmetric, steering_r2)

REL_TOL = 1e-12


@dataclass(frozen=True)
class PairCorrelations:
    """``single[u] = <s_u>`` and ``pair[u, v] = <s_u^(1) s_v^(2)>`` for spin-1/2 particles."""

    n_particles: int
    single: np.ndarray
    pair: np.ndarray


@dataclass(frozen=True)
class SplitConfig:
    pi: np.ndarray

    def __post_init__(self):
        pi = np.array(self.pi, dtype=float)
        if pi.ndim != 1 or pi.shape[0] < 2:
            raise DomainError("need at least two modes")
        if np.any(pi <= 0.0) or abs(pi.sum() - 1.0) > 1e-12:
            raise DomainError(f"pi must be positive and sum to 1, got {pi.tolist()}")
        pi.setflags(write=False)
        object.__setattr__(self, "pi", pi)

    @classmethod
    def symmetric(cls, modes: int) -> "SplitConfig":
        return cls(np.full(modes, 1.0 / modes))

    @property
    def modes(self) -> int:
        return self.pi.shape[0]


def _dense_spin_ops(state: SpinState):
    """Dense S_x, S_y, S_z built from S_+ (sub-diagonal in ascending m)."""
    lad = 2.0 * np.array(build_sx(state.spin).off_diagonal)
    sp = np.diag(lad, -1).astype(complex)
    return (sp + sp.T) / 2, (sp - sp.T) / 2j, np.diag(state.spin.m_values()).astype(complex)


def extract_pair_correlations(parent: SpinState) -> PairCorrelations:
    """Single- and two-particle correlators of a spin-S state read as N = 2S spins 1/2.

    Uses ``S_u S_v = sum_i s_u s_v + sum_{i != j} s_u^(i) s_v^(j)`` with the
    one-particle product ``s_u s_v = delta_uv / 4 + (i/2) eps_uvw s_w``.
    """
    n = parent.spin.two_s
    if n < 2:
        raise DomainError("pair correlations need at least two particles")
    ops = _dense_spin_ops(parent)
    psi = parent.amplitudes
    means = np.array([np.real(psi @ op @ psi) for op in ops])
    second = np.array([[psi @ a @ b @ psi for b in ops] for a in ops])
    eps = np.zeros((3, 3, 3))
    for a, b, c in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
        eps[a, b, c], eps[b, a, c] = 1.0, -1.0
    one_body = n / 4 * np.eye(3) + 0.5j * np.einsum("uvw,w->uv", eps, means)
    pair = (second - one_body) / (n * (n - 1))
    return PairCorrelations(n, means / n, pair)


def propagate_mode_moments(pc: PairCorrelations, cfg: SplitConfig) -> ModeMomentSet:
    """Means and covariances of the mode spins for independent random placement."""
    n = pc.n_particles
    pi = cfg.pi
    outer = np.outer(pi, pi)

    def cov(u):
        s = pc.single[u]
        c = outer * (n * (n - 1) * np.real(pc.pair[u, u]) - (n * s) ** 2)
        c[np.diag_indices_from(c)] += pi * n / 4
        return c

    return ModeMomentSet(n_particles=n, pi=pi, mean_sx=pi * n * pc.single[0],
                         cov_sz=cov(2), cov_sy=cov(1))


@dataclass(frozen=True)
class EquivalenceResult:
    xi2: float
    g2: float
    r2: float
    gk2: dict
    checks: tuple

    @property
    def passed(self) -> bool:
        return all(ok for *_, ok in self.checks)


def _check(name, value, expected):
    ok = abs(value - expected) <= REL_TOL * max(abs(expected), abs(value))
    return name, value, expected, ok


def equivalence_check(parent: SpinState, modes: int, strict: bool = True) -> EquivalenceResult:
    """Compare mode witnesses of a symmetric split with the parent's xi2.

    g2 and r2 come from a two-mode split; the G_k^M table from an M-mode split
    with the partition bound minimized over all partitions.

    Raises:
        DegenerateInput: the parent has no polarization.
        ConsistencyError: ``strict`` and an identity fails beyond 1e-12 relative.
    """
    if modes < 2:
        raise DomainError(f"need M >= 2, got {modes}")
    if modes > MAX_ENUMERATION_MODES:
        raise SizeError(f"M <= {MAX_ENUMERATION_MODES} required, got {modes}")
    mo = moments(parent)
    if abs(mo.mean_sx) <= 1e-12 * parent.spin.s:
        raise DegenerateInput("unpolarized parent: <S_x> = 0")
    q = squeezing(parent)
    pc = extract_pair_correlations(parent)
    two = propagate_mode_moments(pc, SplitConfig.symmetric(2))
    g2 = float(g2_two_mode(two))
    r2 = float(steering_r2(two))
    many = two if modes == 2 else propagate_mode_moments(pc, SplitConfig.symmetric(modes))
    table = {k: float(gk2(many, k)) for k in range(2, modes + 1)}
    checks = [_check("g2 = xi2", g2, q), _check("r2 = 4 xi2", r2, 4.0 * q)]
    checks += [_check(f"gk2[k={k}]", v, gk2_symmetric(q, modes, k)) for k, v in table.items()]
    result = EquivalenceResult(q, g2, r2, table, tuple(checks))
    if strict and not result.passed:
        bad = [c for c in checks if not c[3]]
        raise ConsistencyError(f"identities violated: {bad}")
    return result


@dataclass(frozen=True)
class OccupationStats:
    """Empirical single and pair occupation probabilities with standard errors."""

    single: np.ndarray
    single_se: np.ndarray
    pair: np.ndarray
    pair_se: np.ndarray
    trials: int


def sample_mode_occupation(n: int, cfg: SplitConfig, trials: int, seed: int,
                           chunk_elements: int = 1 << 22) -> OccupationStats:
    """Place each of n particles independently into a mode, ``trials`` times.

    Per trial, ``n_I / n`` estimates ``<Pi^I>`` and
    ``(n_I n_J - delta_IJ n_I) / (n (n - 1))`` estimates the probability that
    particle 1 is in I and particle 2 in J.  Standard errors are sample
    standard deviations over trials divided by sqrt(trials).
    """
    if trials < 2:
        raise DomainError("need at least two trials for standard errors")
    if n < 2:
        raise DomainError("need at least two particles for pair statistics")
    rng = np.random.default_rng(seed)
    m = cfg.modes
    counts = np.empty((trials, m), dtype=np.int64)
    step = max(1, chunk_elements // n)
    for start in range(0, trials, step):
        stop = min(trials, start + step)
        labels = rng.choice(m, size=(stop - start, n), p=cfg.pi)
        counts[start:stop] = np.stack([(labels == i).sum(axis=1) for i in range(m)], axis=1)
    single = counts / n
    prod = counts[:, :, None] * counts[:, None, :] - np.einsum("ti,ij->tij", counts, np.eye(m, dtype=np.int64))
    pair = prod / (n * (n - 1))
    root = np.sqrt(trials)
    return OccupationStats(single.mean(axis=0), single.std(axis=0, ddof=1) / root,
                           pair.mean(axis=0), pair.std(axis=0, ddof=1) / root, trials)
