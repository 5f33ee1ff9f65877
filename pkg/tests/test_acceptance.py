"""Acceptance criteria, one group of tests per criterion (test_cNN_*).

conftest.py prints one PASS/FAIL line per criterion at the end of the run.
Each criterion's computation runs once in a module fixture so its runtime
can be checked against the stated limit.
"""

import hashlib
import json
import math
import subprocess
import sys
import time
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

import oracles
from golden.regenerate import CASES, run
from spinsqueeze import cli
from spinsqueeze.sm_curves import (build_fs_table, fs_analytic_large_s, fs_eval,
                                   perturbative_moments)
from spinsqueeze.spin_core import build_hamiltonian, dicke_state, ground_state, qfi_pure, squeezing
from spinsqueeze.split_model import SplitConfig, equivalence_check, sample_mode_occupation
from spinsqueeze.witnesses import (CollectiveMoments, beta_min_enumerate, depth_bound_state_independent,
                                   depth_detect, ghstar, global_local_identity,
                                   local_xi2_from_global, set_partitions, sm_variance_bound,
                                   sm_xi2_bound, to_db)

pytestmark = pytest.mark.acceptance
GOLDEN = Path(__file__).parent / "golden"


def timed(fn):
    t0 = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - t0


# ------------------------------------------------- 1. ultimate squeezing limit

C1_SPINS = (1, 2, 5, 10, 50)
C1_PERT_SPINS = (1, 2, 5, 10)
C1_GRID = np.geomspace(1e-6, 1e2, 400)


@pytest.fixture(scope="module")
def c1():
    def compute():
        minima = {s: min(squeezing(ground_state(build_hamiltonian(lam, s))[1]) for lam in C1_GRID)
                  for s in C1_SPINS}
        pert = {s: (squeezing(ground_state(build_hamiltonian(1e-3, s))[1]),
                    perturbative_moments(s, 1e-3)[2]) for s in C1_PERT_SPINS}
        return minima, pert
    return timed(compute)


@pytest.mark.parametrize("s", C1_SPINS)
def test_c01_minimum_over_lambda(c1, s):
    (minima, _), _ = c1
    assert 1 / (1 + s) <= minima[s] <= 1 / (1 + s) + 1e-4


@pytest.mark.parametrize("s", C1_PERT_SPINS)
def test_c01_perturbative_formula(c1, s):
    (_, pert), _ = c1
    exact, approx = pert[s]
    assert abs(exact - approx) <= 1e-8


@pytest.mark.parametrize("s", C1_PERT_SPINS)
def test_c01_exact_value_high_precision(c1, s):
    (_, pert), _ = c1
    assert pert[s][0] == pytest.approx(float(oracles.mp_xi2(s, 1e-3)), rel=1e-12)


def test_c01_runtime(c1):
    assert c1[1] < 5.0


# ------------------------------------------------------ 2. F_S property suite

C2_SPINS = (1, 2, 3, 5, 10)


def _convexity_violation(x, f):
    """Largest amount by which any grid point lies above a chord between grid points."""
    worst = -np.inf
    for i in range(len(x) - 2):
        xk, fk = x[i + 2:], f[i + 2:]
        xj, fj = x[i + 1:-1], f[i + 1:-1]
        # chord from i to every k > j, evaluated at every j in between
        w = (xk[None, :] - xj[:, None]) / (xk[None, :] - x[i])
        chord = w * f[i] + (1 - w) * fk[None, :]
        mask = np.arange(len(xj))[:, None] < np.arange(len(xk))[None, :] + 1
        worst = max(worst, np.max(np.where(mask, fj[:, None] - chord, -np.inf)))
    return worst


@pytest.fixture(scope="module")
def c2():
    def compute():
        tables = {s: build_fs_table(s, 512) for s in C2_SPINS}
        res = {}
        for s, t in tables.items():
            x, f = t.x, t.f
            interior = x[(x > 0) & (x < 1)]
            res[s] = {
                "symmetric": all(fs_eval(s, -v) == fs_eval(s, v) for v in interior),
                "f_one": fs_eval(s, 1.0),
                "f_last": f[-1],
                "f_zero": t.f_at_zero(),
                "convexity": _convexity_violation(x, f),
                "diff_f": np.diff(f),
                "small_x": f[0] / x[0] ** 2,
                "superlinear": np.max(np.triu((x[None, :] / x[:, None]) * f[:, None] - f[None, :], 1)),
                "ordering": {s2: min(fs_eval(s, v) - fs_eval(s2, v) for v in interior)
                             for s2 in C2_SPINS if s2 > s},
                "closed_form": (max(abs(fv - oracles.s1_fs(xv)) for xv, fv in zip(x, f))
                                if s == 1 else None),
            }
        res["large_s_ratio"] = fs_eval(100, 1e-3) / fs_analytic_large_s(100, 1e-3)
        return res
    return timed(compute)


@pytest.mark.parametrize("s", C2_SPINS)
def test_c02_property0_symmetry_and_endpoints(c2, s):
    r = c2[0][s]
    assert r["symmetric"]
    assert abs(r["f_one"] - 0.5) <= 1e-6
    assert abs(r["f_zero"]) <= 1e-12


@pytest.mark.parametrize("s", C2_SPINS)
def test_c02_property0_table_endpoint(c2, s):
    assert abs(c2[0][s]["f_last"] - 0.5) <= 1e-6


@pytest.mark.parametrize("s", C2_SPINS)
def test_c02_property1_convexity(c2, s):
    assert c2[0][s]["convexity"] <= 1e-9


@pytest.mark.parametrize("s", C2_SPINS)
def test_c02_property2_strictly_increasing(c2, s):
    assert np.all(c2[0][s]["diff_f"] > 0)


@pytest.mark.parametrize("s", C2_SPINS[:-1])
def test_c02_property3_spin_ordering(c2, s):
    assert all(v > 0 for v in c2[0][s]["ordering"].values())


@pytest.mark.parametrize("s", C2_SPINS)
def test_c02_property4_small_x(c2, s):
    assert c2[0][s]["small_x"] == pytest.approx(1 / (2 + 2 * s), rel=1e-6)


@pytest.mark.parametrize("s", C2_SPINS)
def test_c02_property5_superlinear(c2, s):
    assert c2[0][s]["superlinear"] <= 1e-9


def test_c02_spin_one_closed_form(c2):
    assert c2[0][1]["closed_form"] <= 1e-9


def test_c02_large_s_factor_two(c2):
    assert abs(c2[0]["large_s_ratio"] / 2 - 1) <= 0.05


def test_c02_runtime(c2):
    assert c2[1] < 30.0


# -------------------------------------------- 3. mode-particle equivalence

C3_SPINS = (1, 2, 5, 10, 25)
C3_LAMBDAS = (0.01, 0.1, 0.5, 1.0, 5.0)


@pytest.fixture(scope="module")
def c3():
    def compute():
        out = []
        for s in C3_SPINS:
            for lam in C3_LAMBDAS:
                parent = ground_state(build_hamiltonian(lam, s))[1]
                q = squeezing(parent)
                for m in range(2, 7):
                    out.append((s, lam, m, q, equivalence_check(parent, m, strict=False)))
        return out
    return timed(compute)


def _rel(a, b):
    return abs(a - b) / abs(b)


def test_c03_g2_and_r2_two_modes(c3):
    results = [r for r in c3[0] if r[2] == 2]
    assert len(results) == 25
    for s, lam, _, q, res in results:
        assert _rel(res.g2, q) <= 1e-12, (s, lam)
        assert _rel(res.r2, 4 * q) <= 1e-12, (s, lam)


def test_c03_gk_identity_all_modes(c3):
    for s, lam, m, q, res in c3[0]:
        assert sorted(res.gk2) == list(range(2, m + 1))
        for k, v in res.gk2.items():
            assert _rel(v, q * m * m * (m - 1) / (4 * (k - 1) ** 2)) <= 1e-12, (s, lam, m, k)


def test_c03_runtime(c3):
    assert c3[1] < 10.0


# ------------------------------------------------------ 4. partition oracle

@pytest.fixture(scope="module")
def c4():
    def compute():
        table = {}
        for m in range(2, 9):
            g, h = ghstar(m)
            for k in range(2, m + 1):
                table[m, k] = beta_min_enumerate(m, k, g, h)[0]
        return table, sum(1 for _ in set_partitions(8))
    return timed(compute)


def test_c04_exact_minimum(c4):
    (table, _), _ = c4
    assert len(table) == 28
    for (m, k), v in table.items():
        assert isinstance(v, Fraction)
        assert v == Fraction(2 * (k - 1), m - 1), (m, k)


def test_c04_bell_enumeration(c4):
    assert c4[0][1] == 4140 == oracles.bell_number(8)


def test_c04_runtime(c4):
    assert c4[1] < 5.0


# ------------------------------------------------------- 5. depth thresholds

def test_c05_depth_n100():
    m = CollectiveMoments(100, 0.13 * 50 ** 2 / 100, 50.0)
    assert depth_detect(m, "tight") == 14 == oracles.depth_scan(0.13, 100, lambda p: oracles.tight_bound(100, p))
    assert depth_detect(m, "fisher") == 8 == oracles.depth_scan(0.13, 100, lambda p: 1 / p)


def test_c05_quarter_implies_more_than_six():
    m = CollectiveMoments(24, 0.2499 * 12 ** 2 / 24, 12.0)
    assert depth_detect(m, "tight") >= 7


# ---------------------------------------------- 6. SM-tight correspondence

@pytest.mark.parametrize("p", (2, 4, 6))
def test_c06_integer_case(p):
    n, x = 4 * p, 1e-3
    tight = depth_bound_state_independent(n, p)
    assert abs(sm_xi2_bound(p, x) - tight) <= 0.01 * tight
    sx = x * n / 2
    via_variance = n * sm_variance_bound(n, p, sx) / sx ** 2
    assert abs(via_variance - tight) <= 0.01 * tight


def test_c06_non_integer_case():
    n, p, x = 10, 4, 1e-3
    target = 10 / (2 * 8 + 2 + 10)
    assert depth_bound_state_independent(n, p) == pytest.approx(target, rel=1e-15)
    sx = x * n / 2
    bound = n * sm_variance_bound(n, p, sx, allocation="worst") / sx ** 2
    assert abs(bound - target) <= 0.01 * target


# ---------------------------------------------------------- 7. twin-Fock QFI

@pytest.mark.parametrize("s", range(1, 21))
def test_c07_twin_fock_qfi(s):
    p = 2 * s
    value = qfi_pure(dicke_state(s, 0))
    assert abs(value - 2 * s * (s + 1)) <= 1e-12
    assert abs(value - p * (1 + p / 2)) <= 1e-12


# -------------------------------------------------------- 8. local squeezing

@pytest.fixture(scope="module")
def c8():
    rng = np.random.default_rng(20240601)
    draws = []
    for _ in range(10_000):
        n = int(rng.integers(2, 10 ** 6))
        m = int(rng.integers(2, 7))
        pi = rng.dirichlet(np.full(m, 0.7))
        pi = np.clip(pi, 1e-6, None)
        pi /= pi.sum()
        sx = float(rng.uniform(1e-3, 1.0)) * n / 2 * float(rng.choice([-1, 1]))
        q = float(rng.uniform(1e-4, 2.0))
        local = np.array([local_xi2_from_global(q, p_i, n, sx) for p_i in pi])
        draws.append((n, m, pi, sx, q, local))
    return draws


def test_c08_local_floor(c8):
    for n, m, pi, sx, q, local in c8:
        assert np.all(local >= 1 - pi - 1e-12)


def test_c08_global_local_identity(c8):
    asymmetric = 0
    for n, m, pi, sx, q, local in c8:
        assert _rel(global_local_identity(local, n, m, sx), q) <= 1e-12 * max(1.0, local.sum() / q)
        asymmetric += np.ptp(pi) > 1e-3
    assert asymmetric > 9000


def _limit_db(pi):
    return to_db(local_xi2_from_global(0.0, pi, 1000, 500.0))


def test_c08_db_limits_exact():
    assert _limit_db(0.5) == pytest.approx(10 * math.log10(0.5), abs=1e-12)
    assert _limit_db(1 / 3) == pytest.approx(10 * math.log10(2 / 3), abs=1e-12)


def test_c08_db_limit_half():
    assert abs(_limit_db(0.5) - (-3.0)) <= 0.01


def test_c08_db_limit_third():
    assert abs(_limit_db(1 / 3) - (-1.76)) <= 0.01


# ------------------------------------------------------ 9. occupation sampler

C9_TRIALS = 100_000
C9_SEED = 12345


def _stats_digest(stats):
    h = hashlib.sha256()
    for a in (stats.single, stats.single_se, stats.pair, stats.pair_se):
        h.update(np.ascontiguousarray(a).tobytes())
    return h.hexdigest()


@pytest.mark.parametrize("m", (2, 3, 4))
def test_c09_statistics_within_five_sigma(m):
    pi = np.arange(1, m + 1, dtype=float)
    cfg = SplitConfig(pi / pi.sum())
    stats = sample_mode_occupation(10, cfg, C9_TRIALS, C9_SEED)
    assert np.all(np.abs(stats.single - cfg.pi) <= 5 * stats.single_se)
    assert np.all(np.abs(stats.pair - np.outer(cfg.pi, cfg.pi)) <= 5 * stats.pair_se)


@pytest.mark.parametrize("m", (2, 3, 4))
def test_c09_bit_identical_reruns(m):
    cfg = SplitConfig.symmetric(m)
    first = _stats_digest(sample_mode_occupation(10, cfg, C9_TRIALS, C9_SEED))
    again = _stats_digest(sample_mode_occupation(10, cfg, C9_TRIALS, C9_SEED))
    code = ("import numpy as np, hashlib;"
            "from spinsqueeze.split_model import SplitConfig, sample_mode_occupation as s;"
            f"r = s(10, SplitConfig.symmetric({m}), {C9_TRIALS}, {C9_SEED});"
            "h = hashlib.sha256();"
            "[h.update(np.ascontiguousarray(a).tobytes()) for a in (r.single, r.single_se, r.pair, r.pair_se)];"
            "print(h.hexdigest())")
    other = subprocess.run([sys.executable, "-c", code], capture_output=True, text=True, check=True)
    assert first == again == other.stdout.strip()


# ------------------------------------------------------------ 10. CLI contract

def test_c10_schema_round_trip(capsys):
    src = json.loads((GOLDEN / "records.json").read_text())
    assert cli.main(["witness", str(GOLDEN / "records.json"), "--format", "json"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert [r["input"] for r in out["reports"]] == src["records"]


def test_c10_exit_codes(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"records": [{"n": 3, "typo": 1}]}', encoding="utf-8")
    assert cli.main(["witness", str(bad)]) == 2
    assert cli.main(["witness", str(GOLDEN / "records.json")]) == 0
    assert cli.main(["split-check", "--spin", "4", "--lambda", "0"]) == 3
    with pytest.raises(SystemExit) as exc:
        cli.main(["fs-curve", "--spin", "2", "--points", "15"])
    assert exc.value.code == 2


@pytest.mark.parametrize("name", sorted(n for n in CASES if n.endswith(".csv")))
def test_c10_csv_golden_bitwise(name):
    first, second = run(CASES[name]), run(CASES[name])
    assert first == second
    assert first[1].encode("utf-8") == (GOLDEN / name).read_bytes()
