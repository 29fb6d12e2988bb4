import time

import pytest

from galerkin_gates.config import load_config
from galerkin_gates.scenario import run_scenario

ACCEPTANCE_RESULTS = {}


def record_acceptance(criterion: int, part: str, passed: bool, detail: str) -> None:
    ACCEPTANCE_RESULTS.setdefault(criterion, []).append((part, passed, detail))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for crit in sorted(ACCEPTANCE_RESULTS):
        parts = ACCEPTANCE_RESULTS[crit]
        ok = all(p for _, p, _ in parts)
        terminalreporter.write_line(f"criterion {crit}: {'PASS' if ok else 'FAIL'}")
        for name, passed, detail in parts:
            terminalreporter.write_line(f"    [{'pass' if passed else 'FAIL'}] {name}: {detail}")


def _timed_run(config):
    start = time.perf_counter()
    report, traj = run_scenario(config)
    return report, traj, time.perf_counter() - start


@pytest.fixture(scope="session")
def well_gate_run():
    return _timed_run(load_config("well_gate"))


@pytest.fixture(scope="session")
def oscillator_gate_run():
    return _timed_run(load_config("oscillator_gate"))


@pytest.fixture(scope="session")
def oscillator_resonant_run():
    return _timed_run(load_config("oscillator_gate").with_overrides(resonant_periods=True))


@pytest.fixture(scope="session")
def oscillator_480_run():
    return _timed_run(load_config("oscillator_gate").with_overrides(N=480))
