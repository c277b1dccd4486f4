import numpy as np
import pytest
from hypothesis import settings
from hypothesis import strategies as st

from curvehash import Curve

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

_ACCEPTANCE: list[str] = []


@pytest.fixture
def report():
    """Record one acceptance line; printed again in the terminal summary."""

    def _report(number: int, name: str, passed: bool, detail: str) -> None:
        line = f"criterion {number:2d} {'PASS' if passed else 'FAIL'}  {name}: {detail}"
        _ACCEPTANCE.append(line)
        print(line)

    return _report


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE):
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


coords = st.floats(min_value=-10, max_value=10, allow_nan=False, allow_infinity=False)


@st.composite
def curves(draw, min_m=1, max_m=6, d=None, max_d=3):
    d = d or draw(st.integers(1, max_d))
    m = draw(st.integers(min_m, max_m))
    pts = draw(st.lists(st.lists(coords, min_size=d, max_size=d), min_size=m, max_size=m))
    return Curve(np.array(pts))


@st.composite
def curve_pairs(draw, min_m=1, max_m=6, max_d=3, d=None):
    d = d or draw(st.integers(1, max_d))
    return draw(curves(min_m, max_m, d=d)), draw(curves(min_m, max_m, d=d))
