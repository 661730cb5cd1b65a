import os
import sys
from fractions import Fraction

from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

from slicefn.cayley_dickson import Element  # noqa: E402
from slicefn.star_poly import StarPolynomial  # noqa: E402

small_fraction = st.fractions(min_value=-3, max_value=3, max_denominator=5)
small_float = st.floats(min_value=-2, max_value=2, allow_nan=False, allow_infinity=False)


def exact_elements(level=3):
    return st.lists(small_fraction, min_size=1 << level, max_size=1 << level).map(Element)


def float_elements(level=3):
    return st.lists(small_float, min_size=1 << level, max_size=1 << level).map(Element)


def nonzero(strategy):
    return strategy.filter(lambda e: not e.is_zero(1e-6))


def exact_polys(level=3, max_degree=3):
    return st.lists(exact_elements(level), min_size=1, max_size=max_degree + 1).map(
        lambda cs: StarPolynomial(cs, level))


def float_polys(level=3, max_degree=3):
    return st.lists(float_elements(level), min_size=1, max_size=max_degree + 1).map(
        lambda cs: StarPolynomial(cs, level))


@st.composite
def slice_points(draw, level=3, beta_min=0.2):
    """``alpha + beta J`` with a random unit built from drawn coordinates."""
    v = draw(st.lists(st.floats(-1, 1), min_size=(1 << level) - 1, max_size=(1 << level) - 1)
             .filter(lambda v: sum(c * c for c in v) > 1e-2))
    n = sum(c * c for c in v) ** 0.5
    J = Element([0.0] + [c / n for c in v])
    alpha = draw(st.floats(-1.5, 1.5))
    beta = draw(st.floats(beta_min, 1.5))
    return J * beta + alpha


def F(*args):
    return Fraction(*args)


# ---------------------------------------------------------------------------
# acceptance criteria report

import time  # noqa: E402
from contextlib import contextmanager  # noqa: E402

import pytest  # noqa: E402

_CRITERIA = pytest.StashKey[dict]()


@pytest.fixture
def criterion(request):
    """Context manager that times a criterion, enforces its budget and records the outcome."""
    store = request.config.stash.setdefault(_CRITERIA, {})

    @contextmanager
    def run(number, title, budget):
        start = time.perf_counter()
        ok = False
        try:
            yield
            ok = True
        finally:
            elapsed = time.perf_counter() - start
            within = elapsed < budget
            store[number] = (title, ok and within, elapsed, budget)
            line = (f"criterion {number} {'PASS' if ok and within else 'FAIL'}: {title} "
                    f"({elapsed:.2f}s, budget {budget:.0f}s)")
            print(line)
        assert within, f"criterion {number} took {elapsed:.1f}s, budget {budget}s"

    return run


def pytest_terminal_summary(terminalreporter, config):
    store = config.stash.get(_CRITERIA, {})
    if not store:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for number in sorted(store):
        title, ok, elapsed, budget = store[number]
        terminalreporter.write_line(
            f"criterion {number} {'PASS' if ok else 'FAIL'}: {title} ({elapsed:.2f}s, budget {budget:.0f}s)")
