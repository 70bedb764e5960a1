
import numpy as np
import pytest
from hypothesis import HealthCheck, settings


settings.register_profile("peregrine", deadline=None, max_examples=25,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("peregrine")

SWEEP = (0.1, 0.05, 0.025)


@pytest.fixture(scope="session")
def studies():
    """Order studies keyed by (envelope, points_per_period), computed once."""
    from peregrine.experiments import order_study

    cache = {}

    def get(envelope, ppp=32, k=1.0):
        key = (envelope, ppp, k)
        if key not in cache:
            cache[key] = order_study(SWEEP, k, envelope, ppp)
        return cache[key]

    return get


@pytest.fixture(scope="session")
def peregrine_runs():
    """Split-step runs of the standard breather from t = -1 to 0."""
    from peregrine.nls import NlsParams, evolve, evolve_grid, peregrine, peregrine_state

    p = NlsParams.standard()
    g = evolve_grid(p)
    exact = peregrine(p, g.nodes, 0.0)
    out = {}
    for steps in (1000, 2000):
        st = evolve(p, peregrine_state(p, g, -1.0), 1.0, steps)
        out[steps] = (st, float(np.max(np.abs(st.total().values - exact))))
    return out


@pytest.fixture(scope="session")
def compat():
    from peregrine.experiments import compatibility_study

    return compatibility_study(SWEEP, 1.0, "bump")


_CRITERIA = {}


@pytest.fixture
def criterion():
    """Record one PASS/FAIL line per acceptance criterion, then assert it."""

    def record(number, ok, detail):
        line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        _CRITERIA[number] = line
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_CRITERIA, key=lambda k: (int(str(k).rstrip("ab")), str(k))):
        terminalreporter.write_line(_CRITERIA[key])
