import re
import sys
import time
from pathlib import Path

from hypothesis import HealthCheck, settings

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

_CRITERIA = {
    1: "ultimate squeezing limit",
    2: "F_S property suite",
    3: "mode-particle equivalence",
    4: "partition oracle",
    5: "depth thresholds",
    6: "SM-tight correspondence",
    7: "twin-Fock QFI",
    8: "local squeezing",
    9: "occupation sampler",
    10: "CLI contract",
}
_outcomes = {}
_started = []
SUITE_LIMIT_S = 120.0


def pytest_sessionstart(session):
    _started.append(time.perf_counter())


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    match = re.search(r"::test_c(\d+)_", report.nodeid)
    if not match:
        return
    if report.when == "call" or report.failed or report.skipped:
        crit = int(match.group(1))
        name = report.nodeid.split("::", 1)[1]
        _outcomes.setdefault(crit, {})
        if report.passed and report.when == "call":
            _outcomes[crit].setdefault(name, "passed")
        else:
            _outcomes[crit][name] = "failed" if report.failed else "skipped"


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for crit in sorted(_CRITERIA):
        results = _outcomes.get(crit)
        if not results:
            continue
        bad = [n for n, r in results.items() if r != "passed"]
        if crit == 10:
            elapsed = time.perf_counter() - _started[0]
            results = dict(results, suite_runtime="passed" if elapsed < SUITE_LIMIT_S else "failed")
            if elapsed >= SUITE_LIMIT_S:
                bad.append(f"suite_runtime ({elapsed:.0f} s)")
        status = "PASS" if not bad else "FAIL"
        line = f"criterion {crit:>2} {_CRITERIA[crit]:<28} {status} ({len(results) - len(bad)}/{len(results)})"
        if bad:
            line += " failing: " + ", ".join(bad)
        terminalreporter.write_line(line)
