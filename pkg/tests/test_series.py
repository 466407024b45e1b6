import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad

from loglab.series import HEAD, TAIL, LogPowerSeries

tail_q = st.floats(2.5, 6.0)
coef = st.floats(-3.0, 3.0).filter(lambda c: abs(c) > 1e-3)


@given(q=tail_q, j=st.integers(0, 2), c=coef, anchor=st.floats(5.0, 50.0))
def test_tail_integral_matches_quad(q, j, c, anchor):
    s = LogPowerSeries.build([(q, j, c)], TAIL, anchor)
    ref, _ = quad(lambda r: c * r ** (1 - q) * math.log(r) ** j, anchor, np.inf, epsabs=0, epsrel=1e-12,
                  limit=200)
    assert s.integral() == pytest.approx(ref, rel=1e-9, abs=1e-14)


@given(q=st.floats(-2.0, 1.5), j=st.integers(0, 2), c=coef, anchor=st.floats(1e-4, 1e-2))
def test_head_integral_matches_quad(q, j, c, anchor):
    s = LogPowerSeries.build([(q, j, c)], HEAD, anchor)
    ref, _ = quad(lambda r: c * r ** (1 - q) * math.log(r) ** j, 0, anchor, epsabs=0, epsrel=1e-11, limit=200)
    assert s.integral() == pytest.approx(ref, rel=1e-8, abs=1e-300)


@given(q=tail_q, j=st.integers(0, 2), c=coef)
def test_tail_antiderivative_differentiates_back(q, j, c):
    s = LogPowerSeries.build([(q, j, c)], TAIL, 10.0)
    G = s.tail_antiderivative()
    r = np.array([12.0, 20.0, 40.0])
    # G'(r) = -f(r) r
    assert np.allclose(G.derivative()(r), -s(r) * r, rtol=1e-10)


def test_head_antiderivative_at_anchor_is_integral():
    s = LogPowerSeries.build([(0.5, 1, 2.0), (-1.0, 0, 1.0)], HEAD, 1e-3)
    H = s.head_antiderivative()
    assert H(np.array([1e-3]))[0] == pytest.approx(s.integral(), rel=1e-12)


def test_log1p_r2_tail_matches_function():
    s = LogPowerSeries.log1p_r2(TAIL, 50.0)
    r = np.array([50.0, 80.0, 500.0])
    assert np.allclose(s(r), np.log1p(r * r), rtol=1e-13)


def test_power_and_log_roundtrip():
    base = LogPowerSeries.build([(4.0, 0, 1.0), (6.0, 0, -2.0)], TAIL, 100.0)
    r = np.array([100.0, 300.0])
    assert np.allclose(base.power(0.5)(r) ** 2, base(r), rtol=1e-12)
    assert np.allclose(base.log()(r), np.log(base(r)), rtol=1e-12)


def test_wrong_side_raises():
    with pytest.raises(ValueError):
        LogPowerSeries.build([(3.0, 0, 1.0)], TAIL, 5.0).head_antiderivative()
    with pytest.raises(ValueError):
        LogPowerSeries.build([(1.5, 0, 1.0)], TAIL, 5.0).integral()
