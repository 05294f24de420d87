import os
import sys

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

sys.path.insert(0, os.path.dirname(__file__))

from bottleneck_toll.model import Scenario, TravelerGroup, base_case  # noqa: E402

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

_pos = dict(allow_nan=False, allow_infinity=False)


@st.composite
def scenarios(draw, case="reversed"):
    """Valid scenarios; ``case`` is reversed, preserved, degenerate or any."""
    if case == "any":
        case = draw(st.sampled_from(["reversed", "preserved", "degenerate"]))
    b2 = draw(st.floats(0.5, 10.0, **_pos))
    u = draw(st.floats(1.05, 6.0, **_pos))  # alpha2/beta2
    flex = draw(st.floats(1.001, 4.0, **_pos))  # (alpha1/beta1)/(alpha2/beta2)
    if case == "reversed":
        b1 = b2 * draw(st.floats(1.01, 4.0, **_pos))
    elif case == "preserved":
        b1 = b2 / draw(st.floats(1.01, 4.0, **_pos))
    else:
        b1 = b2
    eta = draw(st.floats(1.05, 10.0, **_pos))
    n1 = draw(st.floats(1.0, 100.0, **_pos))
    n2 = draw(st.floats(1.0, 100.0, **_pos))
    d = draw(st.floats(0.5, 50.0, **_pos))
    ts = draw(st.floats(-10.0, 10.0, **_pos))
    g1 = TravelerGroup(b1 * u * flex, b1, eta * b1, n1)
    g2 = TravelerGroup(b2 * u, b2, eta * b2, n2)
    return Scenario(g1, g2, d, ts)


@pytest.fixture
def base() -> Scenario:
    return base_case()


def rel_close(a, b, rtol=1e-9):
    return abs(a - b) <= rtol * max(1.0, abs(a), abs(b))


_CRITERIA = pytest.StashKey[list]()


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or not (rep.when == "call" or rep.failed):
        return
    number, text = mark.args
    status = "PASS" if rep.passed else "FAIL"
    item.config.stash.setdefault(_CRITERIA, []).append(f"{status} criterion {number}: {text}")


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_CRITERIA, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
