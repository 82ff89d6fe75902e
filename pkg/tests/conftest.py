import functools

import pytest

from eckhaus.cgl import cgl_coefficients
from eckhaus.turing import find_turing_point
from eckhaus.wave import solve_wave
from eckhaus.zoo import builtin

MODELS = ["swift-hohenberg", "brusselator", "hadamard-diffusive", "hadamard-burgers", "keller-segel"]


@functools.lru_cache(maxsize=None)
def setup_model(name):
    m = builtin(name)
    crit = find_turing_point(m)
    return m, crit, cgl_coefficients(m, crit)


@functools.lru_cache(maxsize=None)
def wave(name, eps, kappa, M=16):
    m, crit, cgl = setup_model(name)
    return solve_wave(m, crit, cgl, eps, kappa, M=M)


@pytest.fixture(scope="session")
def pipeline():
    return setup_model


@pytest.fixture(scope="session")
def waves():
    return wave


# ------------------------------------------------------------------ acceptance summary

_CRITERIA = {}


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.failed):
        return
    for mark in getattr(report, "criterion", ()):
        prev = _CRITERIA.get(mark, True)
        _CRITERIA[mark] = prev and report.passed


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    rep.criterion = tuple(m.args[0] for m in item.iter_markers("criterion"))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        terminalreporter.write_line(f"criterion {n}: {'PASS' if _CRITERIA[n] else 'FAIL'}")
