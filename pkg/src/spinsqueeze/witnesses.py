"""Entanglement, mode-inseparability, depth and steering witnesses.

Everything here works on first and second moments of collective spin
components.  The Wineland coefficient ``xi2 = N Var[S_z] / <S_x>^2`` is the
common currency: most mode criteria reduce to thresholds on it once the state
is symmetric under particle exchange and split symmetrically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import (ConsistencyError, DegenerateInput, DimensionError,
                     DomainError, SizeError, SpinSqueezeError)
from .sm_curves import fs_eval

MAX_ENUMERATION_MODES = 12
# the SM depth scan evaluates F_S for every p up to N
SM_MAX_PARTICLES = 128
REL_TOL = 1e-12


@dataclass(frozen=True)
class CollectiveMoments:
    n_particles: int
    var_sz: float
    mean_sx: float

    def __post_init__(self):
        n = self.n_particles
        if int(n) != n or n < 1:
            raise DomainError(f"n_particles must be a positive integer, got {n!r}")
        object.__setattr__(self, "n_particles", int(n))
        if not (np.isfinite(self.var_sz) and np.isfinite(self.mean_sx)):
            raise DomainError("moments must be finite")
        if self.var_sz < 0.0:
            raise DomainError(f"var_sz must be non-negative, got {self.var_sz!r}")
        if abs(self.mean_sx) > 0.5 * n * (1.0 + REL_TOL):
            raise DomainError(f"|mean_sx| = {abs(self.mean_sx)!r} exceeds N/2 = {n / 2}")
        if self.var_sz > 0.25 * n * n * (1.0 + REL_TOL):
            raise DomainError(f"var_sz = {self.var_sz!r} exceeds N^2/4")

    @property
    def spin(self) -> float:
        return self.n_particles / 2


@dataclass(frozen=True)
class ModeMomentSet:
    """Moments of the collective spins ``S^I`` of M addressable modes.

    ``cov_sy`` may be None when the y-quadrature was not measured; criteria
    that need it then raise DomainError.
    """

    n_particles: int
    pi: np.ndarray
    mean_sx: np.ndarray
    cov_sz: np.ndarray
    cov_sy: np.ndarray | None = None

    def __post_init__(self):
        pi = np.array(self.pi, dtype=float)
        sx = np.array(self.mean_sx, dtype=float)
        m = pi.shape[0]
        if pi.ndim != 1 or m < 2:
            raise DimensionError(f"need at least two modes, got pi of shape {pi.shape}")
        if sx.shape != (m,):
            raise DimensionError(f"mean_sx must have length {m}")
        if np.any(pi <= 0.0) or np.any(pi >= 1.0) or abs(pi.sum() - 1.0) > 1e-9:
            raise DomainError(f"pi must lie in (0, 1) and sum to 1, got {pi.tolist()}")
        covs = []
        for name in ("cov_sz", "cov_sy"):
            c = getattr(self, name)
            if c is None:
                covs.append(None)
                continue
            c = np.array(c, dtype=float)
            if c.shape != (m, m):
                raise DimensionError(f"{name} must be {m}x{m}, got {c.shape}")
            if not np.allclose(c, c.T, rtol=1e-12, atol=1e-12 * max(1.0, np.abs(c).max())):
                raise DomainError(f"{name} is not symmetric")
            if np.any(np.diag(c) < 0.0):
                raise DomainError(f"{name} has a negative variance")
            covs.append(c)
        if covs[0] is None:
            raise DomainError("cov_sz is required")
        for a in [pi, sx] + [c for c in covs if c is not None]:
            a.setflags(write=False)
        object.__setattr__(self, "n_particles", int(self.n_particles))
        object.__setattr__(self, "pi", pi)
        object.__setattr__(self, "mean_sx", sx)
        object.__setattr__(self, "cov_sz", covs[0])
        object.__setattr__(self, "cov_sy", covs[1])

    @property
    def modes(self) -> int:
        return self.pi.shape[0]

    @property
    def var_sz(self) -> np.ndarray:
        return np.diag(self.cov_sz)

    @property
    def var_sy(self) -> np.ndarray:
        return None if self.cov_sy is None else np.diag(self.cov_sy)

    def _require_sy(self) -> np.ndarray:
        if self.cov_sy is None:
            raise DomainError("S_y covariances are required for this criterion")
        return self.cov_sy


@dataclass(frozen=True)
class Partition:
    """Set partition of the mode indices ``0 .. M-1``."""

    blocks: tuple

    def __post_init__(self):
        blocks = tuple(tuple(sorted(b)) for b in self.blocks)
        flat = [i for b in blocks for i in b]
        if not blocks or any(len(b) == 0 for b in blocks):
            raise DomainError("partition blocks must be non-empty")
        if sorted(flat) != list(range(len(flat))):
            raise DomainError(f"blocks must cover 0..M-1 exactly once, got {blocks}")
        object.__setattr__(self, "blocks", tuple(sorted(blocks)))

    @property
    def size(self) -> int:
        return len(self.blocks)

    def __str__(self):
        return "{" + ",".join("{" + ",".join(str(i + 1) for i in b) + "}" for b in self.blocks) + "}"


@dataclass(frozen=True)
class WitnessReport:
    n_particles: int
    xi2: float | None = None
    xi2_db: float | None = None
    g2: float | None = None
    r2: float | None = None
    depth_state_independent: int | None = None
    depth_fisher: int | None = None
    depth_sm: int | None = None
    modes: int | None = None
    mode_insep_k: int | None = None
    gk2: dict = field(default_factory=dict)
    max_entangled_modes: int | None = None
    steering_flags: dict = field(default_factory=dict)
    thresholds: list = field(default_factory=list)
    errors: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "n": self.n_particles,
            "xi2": "undefined" if self.xi2 is None else self.xi2,
            "xi2_db": self.xi2_db,
            "g2": self.g2,
            "r2": self.r2,
            "depth_state_independent": self.depth_state_independent,
            "depth_fisher": self.depth_fisher,
            "depth_sm": self.depth_sm,
            "modes": self.modes,
            "mode_insep_k": self.mode_insep_k,
            "gk2": {str(k): float(v) for k, v in self.gk2.items()},
            "max_entangled_modes": self.max_entangled_modes,
            "steering": {k: bool(v) for k, v in self.steering_flags.items()},
            "thresholds": [[name, value] for name, value in self.thresholds],
            "errors": dict(self.errors),
        }


# ---------------------------------------------------------------- particles

def xi2(m: CollectiveMoments) -> float:
    """Wineland coefficient N Var[S_z] / <S_x>^2."""
    if m.mean_sx == 0.0:
        raise DegenerateInput("mean_sx = 0: squeezing coefficient undefined")
    return m.n_particles * m.var_sz / m.mean_sx ** 2


def to_db(value: float) -> float:
    return 10.0 * math.log10(value)


def depth_bound_state_independent(n: int, p: int) -> float:
    """Smallest xi2 reachable by a p-producible state of n spin-1/2 particles."""
    if not 1 <= p <= n:
        raise DomainError(f"need 1 <= p <= N, got p={p}, N={n}")
    n_p, r = divmod(n, p)
    return n / (n_p * p * p / 2 + r * r / 2 + n)


def sm_xi2_bound(p: int, x: float) -> float:
    """Lower bound on xi2 for p-producible states at polarization x = <S_x>/S."""
    if p < 1:
        raise DomainError(f"p must be >= 1, got {p}")
    if x == 0.0:
        raise DomainError("x = 0: use the limit 1/(1 + p/2)")
    return 2.0 * fs_eval(p / 2, x) / (x * x)


def _sm_term(weight: float, spin: float, x: float) -> float:
    """``weight * F_spin[x]``, with an empty group contributing nothing."""
    return 0.0 if weight == 0 else weight * fs_eval(spin, x)


def sm_variance_bound(n: int, p: int, mean_sx: float, allocation: str = "symmetric") -> float:
    """Smallest Var[S_z] of a p-producible state of n particles with polarization mean_sx.

    The particles form ``N_p = n // p`` groups of spin p/2 plus one group of
    spin r/2.  ``allocation="symmetric"`` assumes the polarization is shared in
    proportion to group size (exchange-symmetric states).  ``"worst"``
    minimizes over how the polarization is divided between the full groups
    and the remainder, which is valid without any symmetry assumption.
    """
    if not 1 <= p <= n:
        raise DomainError(f"need 1 <= p <= N, got p={p}, N={n}")
    total = abs(mean_sx)
    s = n / 2
    if total > s * (1.0 + REL_TOL):
        raise DomainError(f"|mean_sx| = {total!r} exceeds N/2")
    total = min(total, s)
    n_p, r = divmod(n, p)
    big, small = p * n_p / 2, r / 2
    if allocation == "symmetric" or r == 0:
        x = total / s
        return _sm_term(big, p / 2, x) + _sm_term(small, small, x)
    if allocation != "worst":
        raise DomainError(f"unknown allocation {allocation!r}")

    def total_var(a):
        return _sm_term(big, p / 2, a / big) + _sm_term(small, small, (total - a) / small)

    lo, hi = max(0.0, total - small), min(total, big)
    if hi - lo <= 1e-15 * max(1.0, total):
        return total_var(lo)
    res = minimize_scalar(total_var, bounds=(lo, hi), method="bounded",
                          options={"xatol": 1e-10 * max(total, 1e-300)})
    return float(min(res.fun, total_var(lo), total_var(hi)))


def depth_detect(m: CollectiveMoments, method: str) -> int:
    """Entanglement depth certified by one criterion.

    Returns one more than the largest p whose p-producible bound is strictly
    violated, scanning p = 1..N, or 1 when nothing is violated.
    """
    n = m.n_particles
    if method == "fisher":
        q = xi2(m)
        violated = (p for p in range(1, n + 1) if q < 1.0 / p)
    elif method == "tight":
        q = xi2(m)
        violated = (p for p in range(1, n + 1) if q < depth_bound_state_independent(n, p))
    elif method == "sm":
        if m.mean_sx == 0.0:
            raise DegenerateInput("mean_sx = 0: no polarization-dependent bound")
        if n > SM_MAX_PARTICLES:
            raise SizeError(f"N = {n} exceeds the SM scan limit {SM_MAX_PARTICLES}")
        violated = (p for p in range(1, n + 1) if m.var_sz < sm_variance_bound(n, p, m.mean_sx))
    else:
        raise DomainError(f"unknown method {method!r}")
    return min(max(violated, default=0) + 1, n)


# -------------------------------------------------------------------- modes

def _two_mode_variances(mm: ModeMomentSet):
    if mm.modes != 2:
        raise DimensionError(f"two-mode criterion needs M = 2, got M = {mm.modes}")
    cy = mm._require_sy()
    var_z = float(mm.cov_sz.sum())
    var_y = float(cy[0, 0] + cy[1, 1] - 2.0 * cy[0, 1])
    return var_z, var_y


def g2_two_mode(mm: ModeMomentSet) -> float:
    """Two-mode product criterion; mode-separable states give >= 1."""
    var_z, var_y = _two_mode_variances(mm)
    den = (abs(mm.mean_sx[0]) + abs(mm.mean_sx[1])) ** 2
    if den == 0.0:
        raise DegenerateInput("both modes unpolarized")
    return 4.0 * var_z * var_y / den


def steering_r2(mm: ModeMomentSet, steered: int = 1) -> float:
    """Steering criterion for mode ``steered`` (default B); >= 1 without steering."""
    var_z, var_y = _two_mode_variances(mm)
    den = mm.mean_sx[steered] ** 2
    if den == 0.0:
        raise DegenerateInput("steered mode unpolarized")
    r2 = 4.0 * var_z * var_y / den
    if _is_symmetric(mm):
        g2 = g2_two_mode(mm)
        if abs(r2 - 4.0 * g2) > REL_TOL * abs(r2):
            raise ConsistencyError(f"symmetric split but r2 = {r2!r} != 4 g2 = {4 * g2!r}")
    return r2


def _is_symmetric(mm: ModeMomentSet) -> bool:
    sx = mm.mean_sx
    return (np.ptp(mm.pi) <= 1e-12 and np.ptp(sx) <= REL_TOL * np.abs(sx).max())


def ghstar(modes: int) -> tuple[list, list]:
    """Coefficients g* = 1, h*_1 = 1, h*_J = -1/(M-1) as exact fractions."""
    if modes < 2:
        raise DomainError(f"need M >= 2, got {modes}")
    g = [Fraction(1)] * modes
    h = [Fraction(1)] + [Fraction(-1, modes - 1)] * (modes - 1)
    return g, h


def beta_min_closed(modes: int, k: int) -> float:
    """min over partitions with >= k blocks of sum_q |sum_{I in block} g*_I h*_I|."""
    if not 2 <= k <= modes:
        raise DomainError(f"need 2 <= k <= M, got k={k}, M={modes}")
    return 2.0 * (k - 1) / (modes - 1)


def set_partitions(n: int):
    """All set partitions of ``range(n)`` as restricted growth strings.

    Entry i is the block label of element i; labels appear in order of first
    use, so every partition is produced exactly once.
    """
    a = [0] * n

    def rec(i, used):
        if i == n:
            yield tuple(a)
            return
        for v in range(used + 1):
            a[i] = v
            yield from rec(i + 1, max(used, v + 1))

    if n > 0:
        yield from rec(1, 1)


def _blocks(rgs) -> tuple:
    out = {}
    for i, label in enumerate(rgs):
        out.setdefault(label, []).append(i)
    return tuple(tuple(v) for v in out.values())


def _partition_weight(rgs, weights, n_blocks):
    sums = [0] * n_blocks
    for i, label in enumerate(rgs):
        sums[label] += weights[i]
    return sum(abs(s) for s in sums)


def beta_min_enumerate(modes: int, k: int, g, h):
    """Exhaustive minimum of ``sum_q |sum_{I in A_q} g_I h_I|`` over partitions with >= k blocks.

    Arithmetic follows the input type, so Fraction inputs give exact results.

    Returns:
        (value, Partition) for one minimizing partition (first in enumeration order).
    """
    if modes > MAX_ENUMERATION_MODES:
        raise SizeError(f"enumeration limited to M <= {MAX_ENUMERATION_MODES}, got {modes}")
    if not 1 <= k <= modes:
        raise DomainError(f"need 1 <= k <= M, got k={k}, M={modes}")
    if len(g) != modes or len(h) != modes:
        raise DimensionError(f"g and h must have length {modes}")
    weights = [gi * hi for gi, hi in zip(g, h)]
    return _min_partition(modes, k, weights)


def _min_partition(modes, k, weights):
    best, arg = None, None
    for rgs in set_partitions(modes):
        n_blocks = max(rgs) + 1
        if n_blocks < k:
            continue
        v = _partition_weight(rgs, weights, n_blocks)
        if best is None or v < best:
            best, arg = v, rgs
    return best, Partition(_blocks(arg))


def gk2_symmetric(xi2_value: float, modes: int, k: int) -> float:
    """G_k^M(g*, h*)^2 of a symmetrically split exchange-symmetric state."""
    if not 2 <= k <= modes:
        raise DomainError(f"need 2 <= k <= M, got k={k}, M={modes}")
    if xi2_value <= 0.0:
        raise DomainError(f"xi2 must be positive, got {xi2_value!r}")
    return xi2_value * modes * modes * (modes - 1) / (4.0 * (k - 1) ** 2)


def gk2(mm: ModeMomentSet, k: int, g=None, h=None) -> float:
    """G_k^M(g, h)^2 from mode moments, minimizing the bound over partitions.

    The bound of a partition is ``1/2 sum_q |sum_{I in A_q} g_I h_I <S_x^I>|``.
    Defaults to g*, h*.
    """
    modes = mm.modes
    if not 2 <= k <= modes:
        raise DomainError(f"need 2 <= k <= M, got k={k}, M={modes}")
    if modes > MAX_ENUMERATION_MODES:
        raise SizeError(f"enumeration limited to M <= {MAX_ENUMERATION_MODES}, got {modes}")
    gs, hs = ghstar(modes)
    g = np.array(gs if g is None else g, dtype=float)
    h = np.array(hs if h is None else h, dtype=float)
    var_z = float(g @ mm.cov_sz @ g)
    var_y = float(h @ mm._require_sy() @ h)
    beta, _ = _min_partition(modes, k, list(g * h * mm.mean_sx))
    bound = 0.5 * beta
    if bound == 0.0:
        raise DegenerateInput("partition bound vanishes")
    return var_z * var_y / bound ** 2


def mode_threshold(modes: int, k: int) -> float:
    """xi2 below which no partition into k or more modes is separable."""
    if not 2 <= k <= modes:
        raise DomainError(f"need 2 <= k <= M, got k={k}, M={modes}")
    return 4.0 * (k - 1) ** 2 / (modes * modes * (modes - 1))


def mode_insep_k(xi2_value: float, modes: int) -> int | None:
    """Smallest k in [2, M] whose threshold is strictly violated, else None."""
    if modes < 2:
        raise DomainError(f"need M >= 2, got {modes}")
    for k in range(2, modes + 1):
        if xi2_value < mode_threshold(modes, k):
            return k
    return None


def max_entangled_modes(xi2_value: float) -> int:
    """Largest M with M < 2 (1 + sqrt(1 - xi2)) / xi2, or 1 when xi2 >= 1."""
    if not xi2_value > 0.0:
        raise DomainError(f"xi2 must be positive, got {xi2_value!r}")
    if xi2_value >= 1.0:
        return 1
    bound = 2.0 * (1.0 + math.sqrt(1.0 - xi2_value)) / xi2_value
    m = math.ceil(bound) - 1
    # guard the strict inequality against rounding in ceil
    while m + 1 < bound:
        m += 1
    while m >= bound:
        m -= 1
    return m


# ----------------------------------------------------------------- steering

def steering_sm(var_sz: float, mean_sx_b: float, n_b: int, n_total: int | None = None):
    """Steering of mode B from the total variance and B's polarization.

    Returns:
        (violated, bound, weaker_bound); ``weaker_bound`` is None without
        ``n_total``.

    Raises:
        ConsistencyError: the bound falls below the weaker one.
    """
    if n_b < 1:
        raise DomainError(f"n_b must be >= 1, got {n_b}")
    s_b = n_b / 2
    if abs(mean_sx_b) > s_b * (1.0 + REL_TOL):
        raise DomainError(f"|<S_x^B>| = {abs(mean_sx_b)!r} exceeds S_B = {s_b}")
    bound = s_b * fs_eval(s_b, min(abs(mean_sx_b) / s_b, 1.0))
    weaker = None
    if n_total is not None:
        if n_total < n_b:
            raise DomainError(f"n_total = {n_total} is smaller than n_b = {n_b}")
        s = n_total / 2
        weaker = s * fs_eval(s_b, abs(mean_sx_b) / s)
        if bound < weaker - 1e-9:
            raise ConsistencyError(f"steering bound {bound!r} below weaker bound {weaker!r}")
    return bool(var_sz < bound), bound, weaker


# ------------------------------------------------------------ local squeezing

def local_xi2_from_global(xi2_value: float, pi: float, n: int, mean_sx: float) -> float:
    """Squeezing of a mode holding a fraction pi of the particles."""
    if not 0.0 < pi < 1.0:
        raise DomainError(f"pi must lie in (0, 1), got {pi!r}")
    if mean_sx == 0.0:
        raise DegenerateInput("mean_sx = 0: local squeezing undefined")
    if abs(mean_sx) > 0.5 * n * (1.0 + REL_TOL):
        raise DomainError(f"|mean_sx| = {abs(mean_sx)!r} exceeds N/2")
    sx_local = pi * mean_sx
    return xi2_value * pi + (1.0 - pi) * (n * pi / 2 / sx_local) ** 2


def global_local_identity(local_xi2, n: int, modes: int, mean_sx: float) -> float:
    """Global xi2 recovered from the local coefficients of all M modes."""
    local_xi2 = np.asarray(local_xi2, dtype=float)
    if local_xi2.shape != (modes,):
        raise DimensionError(f"expected {modes} local coefficients, got shape {local_xi2.shape}")
    if mean_sx == 0.0:
        raise DegenerateInput("mean_sx = 0")
    return float(local_xi2.sum() - n * n * (modes - 1) / (4.0 * mean_sx ** 2))


# ------------------------------------------------------------------ report

def build_report(m: CollectiveMoments, mm: ModeMomentSet | None = None,
                 modes: int | None = None) -> WitnessReport:
    """Evaluate every applicable criterion, collecting failures per field."""
    out = {"thresholds": [("separable", 1.0)]}
    errors = {}

    def attempt(name, fn):
        try:
            return fn()
        except SpinSqueezeError as exc:
            errors[name] = f"{type(exc).__name__}: {exc}"
            return None

    n = m.n_particles
    q = attempt("xi2", lambda: xi2(m))
    out["xi2"] = q
    if q is not None:
        out["xi2_db"] = to_db(q) if q > 0 else None
        for method, key in (("tight", "depth_state_independent"), ("fisher", "depth_fisher")):
            d = depth_detect(m, method)
            out[key] = d
            if d < n:
                fn = depth_bound_state_independent if method == "tight" else (lambda _n, p: 1.0 / p)
                out["thresholds"].append((f"{method} p={d}", fn(n, d)))
    out["depth_sm"] = attempt("depth_sm", lambda: depth_detect(m, "sm"))

    if mm is not None:
        if modes is not None and modes != mm.modes:
            errors["modes"] = f"DimensionError: M = {modes} but {mm.modes} modes supplied"
        modes = mm.modes
    out["modes"] = modes
    if q is not None and q > 0:
        out["max_entangled_modes"] = max_entangled_modes(q)
        if modes is not None and modes >= 2:
            out["mode_insep_k"] = mode_insep_k(q, modes)
            for k in range(2, modes + 1):
                out["thresholds"].append((f"modes M={modes} k={k}", mode_threshold(modes, k)))

    gk = {}
    if mm is not None:
        if mm.cov_sy is not None and mm.modes <= MAX_ENUMERATION_MODES:
            for k in range(2, mm.modes + 1):
                v = attempt(f"gk2[{k}]", lambda k=k: gk2(mm, k))
                if v is not None:
                    gk[k] = v
        elif q is not None and q > 0 and modes is not None:
            gk = {k: gk2_symmetric(q, modes, k) for k in range(2, modes + 1)}
    elif q is not None and q > 0 and modes is not None and modes >= 2:
        gk = {k: gk2_symmetric(q, modes, k) for k in range(2, modes + 1)}
    out["gk2"] = gk

    flags = {}
    if mm is not None and mm.modes == 2:
        out["g2"] = attempt("g2", lambda: g2_two_mode(mm))
        out["r2"] = attempt("r2", lambda: steering_r2(mm, 1))
        r2_a = attempt("r2_a", lambda: steering_r2(mm, 0))
        if out["r2"] is not None:
            flags["b_by_a"] = out["r2"] < 1.0
        if r2_a is not None:
            flags["a_by_b"] = r2_a < 1.0
        if "b_by_a" in flags and "a_by_b" in flags:
            flags["two_way"] = flags["b_by_a"] and flags["a_by_b"]
        n_b = mm.pi[1] * n
        if abs(n_b - round(n_b)) < 1e-9 and round(n_b) >= 1:
            sm = attempt("steering_sm", lambda: steering_sm(m.var_sz, mm.mean_sx[1], int(round(n_b)), n))
            if sm is not None:
                flags["sm_b_by_a"] = sm[0]
                out["thresholds"].append(("steering_sm", sm[1]))
        else:
            errors["steering_sm"] = "DomainError: mode B particle number is not an integer"
    out["steering_flags"] = flags
    return WitnessReport(n_particles=n, errors=errors, **out)
