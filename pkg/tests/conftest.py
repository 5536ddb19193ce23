import random

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from kvforge.equations import extend_to_moperad, solve_associator
from kvforge.kv import build_F012, kv_solution
from kvforge.lie import TruncationContext
from kvforge.sampling import random_lie, random_taut, random_tder

settings.register_profile(
    "exact",
    max_examples=25,
    deadline=None,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large],
)
settings.load_profile("exact")

seeds = st.integers(min_value=0, max_value=10**6)


def ctx(n, N=4, offset=False):
    return TruncationContext(n, N, offset)


def lie(n, seed, N=5, top=2, terms=3):
    return random_lie(ctx(n, N), random.Random(seed), terms=terms, max_degree=top)


def tder(n, seed, N=5, top=1):
    return random_tder(ctx(n, N), random.Random(seed), max_degree=top)


def taut(n, seed, N=5, top=1):
    return random_taut(ctx(n, N), random.Random(seed), max_degree=top)


@pytest.fixture(scope="session")
def assoc5():
    return solve_associator(5, 1)


@pytest.fixture(scope="session")
def moperad5(assoc5):
    return extend_to_moperad(assoc5)


@pytest.fixture(scope="session")
def kv5(moperad5):
    return kv_solution(build_F012(moperad5))


@pytest.fixture(scope="session")
def moperad5_alt():
    return extend_to_moperad(solve_associator(5, 1, free_values={3: {(1, 2, 2): 1}}))


# ---------------------------------------------------------------- acceptance report

_CRITERIA: dict[int, tuple[str, bool, float]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): numbered acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or not (rep.when == "call" or rep.failed):
        return
    number, title = mark.args
    _, ok, spent = _CRITERIA.get(number, (title, True, 0.0))
    _CRITERIA[number] = (title, ok and rep.passed, spent + rep.duration)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        title, ok, spent = _CRITERIA[number]
        terminalreporter.write_line(f"criterion {number:2d} {'PASS' if ok else 'FAIL'}  {title}  ({spent:.1f} s)")
