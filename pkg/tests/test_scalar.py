import pytest
from hypothesis import given, strategies as st

from rwdro.scalar import bisect_sign, golden_section


@given(st.floats(-5, 5), st.floats(0.1, 10))
def test_golden_quadratic(c, k):
    r = golden_section(lambda x: k * (x - c) ** 2, -6, 6, tol=1e-10)
    assert abs(r.x - c) <= 1e-6
    assert r.lo <= c + 1e-9 and c - 1e-9 <= r.hi


@given(st.floats(-5, 5))
def test_golden_kink(c):
    r = golden_section(lambda x: abs(x - c), -6, 6, tol=1e-10)
    assert abs(r.x - c) <= 1e-9


def test_golden_boundary_minimizer_found_exactly():
    assert golden_section(lambda x: x, 0.0, 3.0).x == 0.0
    assert golden_section(lambda x: -x, 0.0, 3.0).x == 3.0


def test_golden_degenerate_and_empty():
    assert golden_section(lambda x: x * x, 1.0, 1.0).x == 1.0
    with pytest.raises(ValueError):
        golden_section(lambda x: x, 1.0, 0.0)


@given(st.floats(-3, 3))
def test_bisect_sign_returns_nonnegative_side(c):
    x = bisect_sign(lambda t: t - c, -4, 4)
    assert x - c >= 0
    assert x - c <= 1e-14
