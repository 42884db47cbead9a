"""Shared fixtures.

The full-size Newton solves (N = 10^4 dense LU) take about a minute each, so
they are computed once per session and shared by every module that needs them.
"""

import time
from collections import defaultdict

import numpy as np
import pytest

from coagfrag import Grid, solve_equilibrium

TIMINGS = {}


def _timed(key, fn, *args, **kwargs):
    t0 = time.perf_counter()
    out = fn(*args, **kwargs)
    TIMINGS[key] = time.perf_counter() - t0
    return out


@pytest.fixture(scope="session")
def newton_main():
    """Equilibrium at m1=1, h=0.01, L=100 (five Newton iterations)."""
    return _timed("newton_main", solve_equilibrium, 1.0, Grid(0.01, 100.0), max_iter=5)


@pytest.fixture(scope="session")
def newton_small_sizes():
    """Equilibrium at m1=0.5676, h=0.0005, L=5."""
    return _timed("newton_small_sizes", solve_equilibrium, 0.5676, Grid(0.0005, 5.0), max_iter=5)


@pytest.fixture(scope="session")
def newton_coarse():
    """Cheap equilibrium at m1=1, h=0.1, L=100 for behavioural tests."""
    return solve_equilibrium(1.0, Grid(0.1, 100.0), max_iter=8)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


RATE_TIMES = tuple(float(t) for t in range(20, 30))
TABLE_TIMES = (5.0, 10.0, 15.0, 20.0, 25.0)


def _table_run(init, dt):
    from coagfrag import StepPolicy, evolve

    grid = Grid(0.01, 100.0)
    times = sorted(set(TABLE_TIMES) | set(RATE_TIMES) | {30.0})
    return _timed(f"table_run_{init.__name__}", evolve, init(1.0, grid), 30.0, StepPolicy.fixed(dt), times)


@pytest.fixture(scope="session")
def uniform_run():
    """Uniform start, fixed dt=1, snapshots at the table and rate times."""
    from coagfrag import uniform_init

    return _table_run(uniform_init, 1.0)


@pytest.fixture(scope="session")
def exponential_run():
    """Exponential start, fixed dt=0.5."""
    from coagfrag import exponential_init

    return _table_run(exponential_init, 0.5)


# -- acceptance reporting -----------------------------------------------------
# Tests marked ``@pytest.mark.criterion(n, title)`` are summarised as one
# PASS/FAIL line per criterion at the end of the run.

_CRITERIA = {}
_OUTCOMES = defaultdict(list)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion covered by the test")


def pytest_collection_modifyitems(items):
    for item in items:
        m = item.get_closest_marker("criterion")
        if m:
            _CRITERIA[m.args[0]] = m.args[1]


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    m = item.get_closest_marker("criterion")
    if m and (rep.when == "call" or rep.failed or rep.skipped):
        _OUTCOMES[m.args[0]].append((item.name, rep.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        results = _OUTCOMES.get(n, [])
        if not results:
            status = "NOT RUN"
        elif all(o == "passed" for _, o in results):
            status = "PASS"
        else:
            status = "FAIL"
        detail = ", ".join(f"{name}={o}" for name, o in results)
        tr.write_line(f"criterion {n:2d} {status:7s} {_CRITERIA[n]}  [{detail}]")
