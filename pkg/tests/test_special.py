import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gammamix.special import digamma, gamma_ratio_half, lgamma, trigamma


def stirling_lgamma(x):
    """Independent route: shift x above 20, then the Stirling series."""
    shift = 0.0
    while x < 20.0:
        shift -= math.log(x)
        x += 1.0
    inv = 1.0 / x
    series = inv / 12 - inv**3 / 360 + inv**5 / 1260 - inv**7 / 1680 + inv**9 / 1188
    return shift + (x - 0.5) * math.log(x) - x + 0.5 * math.log(2 * math.pi) + series


@pytest.mark.parametrize("x", [1e-8, 0.1, 0.5, 1.0, 1.5, 2.7, 3.2, 10.0, 171.3, 1e5, 1e200])
def test_lgamma_matches_mpmath(x):
    ref = float(mpmath.loggamma(mpmath.mpf(x)))
    assert lgamma(x) == pytest.approx(ref, rel=1e-12, abs=1e-14)


@given(st.floats(min_value=1e-3, max_value=1e4))
@settings(max_examples=200, deadline=None)
def test_lanczos_agrees_with_stirling(x):
    ref = stirling_lgamma(x)
    assert abs(lgamma(x) - ref) <= 1e-12 * max(1.0, abs(ref))


def test_lgamma_integers():
    n = np.arange(1, 30)
    fact = np.array([math.lgamma(k) for k in n])
    assert np.allclose(lgamma(n.astype(float)), fact, rtol=1e-13, atol=1e-14)


@pytest.mark.parametrize("x", [1e-6, 0.3, 1.0, 2.7, 3.9, 9.99, 10.0, 55.5, 1e8])
def test_digamma_trigamma_match_mpmath(x):
    mx = mpmath.mpf(x)
    assert digamma(x) == pytest.approx(float(mpmath.digamma(mx)), rel=1e-12)
    assert trigamma(x) == pytest.approx(float(mpmath.psi(1, mx)), rel=1e-12)


def test_digamma_is_derivative_of_lgamma():
    x = np.linspace(0.5, 20, 40)
    h = 1e-5
    fd = (lgamma(x + h) - lgamma(x - h)) / (2 * h)
    assert np.allclose(digamma(x), fd, atol=1e-8)


def test_gamma_ratio_half_large_argument_continuous():
    a = np.array([9999.0, 1e4, 10001.0, 1e7])
    ref = [float(mpmath.loggamma(v + 0.5) - mpmath.loggamma(v)) for v in a]
    assert np.allclose(gamma_ratio_half(a), ref, rtol=1e-12)


@pytest.mark.parametrize("bad", [0.0, -1.0, np.inf, np.nan])
def test_domain(bad):
    for fn in (lgamma, digamma, trigamma):
        with pytest.raises(ValueError):
            fn(bad)
