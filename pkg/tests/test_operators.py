import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from qbhardy.errors import DivergentIntegral, ZeroPsi
from qbhardy.funcspace import ClosedFormFunc, EvaluableFunc, is_quasi_monotone
from qbhardy.operators import PsiKernel, big_psi, hardy, s_psi
from qbhardy.quadrature import riemann_oracle

P = ClosedFormFunc.power
x = np.geomspace(1e-3, 1e3, 200)
probe = np.geomspace(1e-4, 1e4, 300)


def test_hardy_examples():
    np.testing.assert_allclose(hardy(ClosedFormFunc.constant())(x), 1.0, rtol=1e-15)
    for beta in (0.0, -0.4, -0.9):
        np.testing.assert_allclose(hardy(P(beta))(x), x ** beta / (beta + 1), rtol=1e-13)
    r = 2.0
    np.testing.assert_allclose(hardy(ClosedFormFunc.indicator(0, r))(x), np.minimum(1, r / x),
                               rtol=1e-14)


def test_hardy_of_indicator_against_riemann():
    h = hardy(ClosedFormFunc.indicator(0.0, 2.0))
    for xx in (0.5, 3.0, 10.0):
        oracle = riemann_oracle(ClosedFormFunc.indicator(0.0, 2.0), 0.0, xx, 200000) / xx
        assert float(h(np.array([xx]))[0]) == pytest.approx(oracle, rel=1e-5)


def test_hardy_log_depth_one():
    # f = x^{-1} on (1, inf): Hf = ln(x)/x there
    h = hardy(P(-1.0, 1.0, 1.0, math.inf))
    xs = np.array([2.0, 5.0])
    np.testing.assert_allclose(h(xs), np.log(xs) / xs)


def test_hardy_rejects_nonintegrable():
    with pytest.raises(DivergentIntegral):
        hardy(P(-1.0))


def test_opaque_hardy_matches_closed_form():
    f = P(-0.3, 1.0, 0.0, 2.0)
    opaque = EvaluableFunc(lambda t: f(t), singularity_hint=-0.3, breakpoints=(2.0,))
    xs = np.array([0.1, 1.0, 3.0])
    np.testing.assert_allclose(hardy(opaque)(xs), hardy(f)(xs), rtol=1e-9)


def test_big_psi_examples():
    assert big_psi(PsiKernel.ones(), 3.7) == pytest.approx(3.7)
    k = PsiKernel.power(2 - 1 - 0.5)
    assert float(big_psi(k, 1.0)) == pytest.approx(2 / 3)
    chi = PsiKernel(ClosedFormFunc.indicator(0, 1))
    assert float(big_psi(chi, 3.0)) == pytest.approx(1.0)


def test_s_psi_examples():
    f = P(-0.3, 1.0, 0.0, 4.0)
    np.testing.assert_allclose(s_psi(f, PsiKernel.ones())(x), hardy(f)(x))
    for k in (PsiKernel.power(0.7), PsiKernel.power(-0.5), PsiKernel.ones()):
        np.testing.assert_allclose(s_psi(ClosedFormFunc.constant(), k)(x), 1.0, rtol=1e-13)
    for beta, a in ((-0.3, 0.7), (-0.5, 2.0), (0.0, -0.4)):
        got = s_psi(P(beta), PsiKernel.power(a))(x)
        np.testing.assert_allclose(got, x ** beta * (a + 1) / (a + beta + 1), rtol=1e-13)


def test_s_psi_numeric_cross_check():
    k = PsiKernel(EvaluableFunc(lambda s: np.asarray(s, float) ** 0.7, singularity_hint=0.7))
    f = P(-0.3)
    xs = np.array([0.5, 2.0])
    np.testing.assert_allclose(s_psi(f, k)(xs), xs ** -0.3 * 1.7 / 1.4, rtol=1e-8)


def test_zero_psi_near_origin():
    with pytest.raises(ZeroPsi):
        s_psi(ClosedFormFunc.constant(), PsiKernel(ClosedFormFunc.indicator(1, 2)))


family = st.lists(st.tuples(st.floats(-0.9, 0.0), st.floats(0.1, 3.0), st.floats(0.2, 5.0)),
                  min_size=1, max_size=4)


def build(beta, parts):
    f = ClosedFormFunc.zero()
    for shift, c, r in parts:
        f = f + P(beta - abs(shift) * 0.1, c, 0.0, r)
    return f


@given(st.floats(-0.9, 0.0), family)
def test_hardy_preserves_quasi_monotonicity(beta, parts):
    f = build(beta, parts)
    if is_quasi_monotone(f, beta, probe).is_member:
        assert is_quasi_monotone(hardy(f), beta, probe).is_member


@given(family)
def test_averaging_bound(parts):
    f = build(0.0, parts)
    Hf = hardy(f)(x)
    fx = f(x)
    # f is non-increasing here, so sup over (0, x) is the left limit at 0+
    assert np.all(Hf >= fx * (1 - 1e-12))


@given(family, st.floats(0.0, 100.0))
def test_hardy_homogeneity(parts, c):
    f = build(-0.2, parts)
    np.testing.assert_allclose(hardy(f.scale(c))(x), c * hardy(f)(x), rtol=1e-12, atol=1e-300)
