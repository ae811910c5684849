import math

import numpy as np
import pytest

from qbhardy.errors import (BetaOutOfRange, DivergentWI, EmptyGrid, HypothesisNotCertified,
                            NotInClass, NotInHatClass, ParameterOutOfRange)
from qbhardy.extrap import (CertifiedPair, MonotoneFn, grand_factor, truncated_pair_check, truncated_power,
                            averaging_bound_check, grand_extrapolation_constant, grand_hardy_check,
                            grand_hardy_necessity, infinity_extrapolation_constant,
                            interval_extrapolation_constant, extrapolation_check, extrapolation_constant)
from qbhardy.funcspace import ClosedFormFunc, Domain
from qbhardy.operators import PsiKernel
from qbhardy.weightclass import ClassParams, qb_constant

P = ClosedFormFunc.power
ONE = ClosedFormFunc.constant()
CHI = ClosedFormFunc.indicator(0.0, 1.0)


def straight_line_main_constant(p0, p, eps_values):
    """beta = 0, w = 1 on the half-line: [1]_q = q/(q-1), bracket = (p0-eps)/(p0-eps) * p0/eps."""
    best = math.inf
    for e in eps_values:
        q = (p0 - e) * p / p0
        if q > 1:
            best = min(best, q / (q - 1) * (p0 / e) ** (p / p0))
    return best


def test_monotone_fn_specs():
    assert MonotoneFn.from_spec(None)(3.0) == 3.0
    assert MonotoneFn.from_spec({"form": "power", "s": 2})(3.0) == 9.0
    assert MonotoneFn.from_spec({"form": "affine", "a": 2, "b": 1})(3.0) == 7.0
    phi = MonotoneFn.constant(4.0)
    assert MonotoneFn.from_spec(phi.to_spec()) == phi
    with pytest.raises(ParameterOutOfRange):
        MonotoneFn.from_spec({"form": "power", "s": -1})


def test_averaging_bound_is_tight_for_the_indicator():
    chk = averaging_bound_check(CHI, 0.0, 2.0, ONE)
    assert chk.lhs == pytest.approx(2.0, rel=1e-12)
    assert chk.rhs == pytest.approx(2.0, rel=1e-6)
    assert abs(chk.margin) <= 1e-3 * chk.lhs


def test_averaging_bound_examples():
    chk = averaging_bound_check(P(-0.5, 1.0, 0.0, 1.0), -0.5, 2.0, P(0.5))
    assert chk.passed
    assert chk.rhs_constant == pytest.approx(2.0 / 0.25, rel=1e-6)
    zero = averaging_bound_check(ClosedFormFunc.zero(), 0.0, 2.0, ONE)
    assert zero.lhs == 0.0 and zero.passed


@pytest.mark.parametrize("kernel", [PsiKernel.power(0.5), PsiKernel.power(-0.4), PsiKernel.ones()])
def test_averaging_bound_with_kernels_is_tight_for_the_indicator(kernel):
    w = ONE if kernel.is_identity else kernel.psi
    chk = averaging_bound_check(CHI, 0.0, 2.0, w, kernel)
    assert chk.passed
    assert chk.lhs / chk.rhs_base == pytest.approx(chk.rhs_constant, rel=1e-6)


@pytest.mark.parametrize("kernel", [PsiKernel.power(0.5), PsiKernel.ones()])
def test_averaging_bound_with_kernels_on_truncated_members(kernel):
    beta, p = -0.2, 2.0
    w = ONE if kernel.is_identity else kernel.psi
    chk = averaging_bound_check(P(beta, 1.0, 0.0, 1.0), beta, p, w, kernel)
    assert chk.passed


@pytest.mark.parametrize("g, oracle", [(-0.1, 2.2222222222222222), (-0.3, 2.8571428571428571),
                                       (-0.45, 3.6363636363636364)])
def test_averaging_bound_counterexample_for_power_profiles(g, oracle):
    # f = x^g on (0,1), w = 1, beta = 0, p = 2: the stated constant (C+1)/(beta+1)^p = 2
    # is exceeded; the mpmath oracle gives the exact lhs/base ratio
    chk = averaging_bound_check(P(g, 1.0, 0.0, 1.0), 0.0, 2.0, ONE)
    assert chk.rhs_constant == pytest.approx(2.0, rel=1e-6)
    assert chk.lhs / chk.rhs_base == pytest.approx(oracle, rel=1e-8)
    assert not chk.passed


def test_averaging_bound_counterexample_with_decreasing_kernel():
    kernel = PsiKernel.power(-0.4)
    chk = averaging_bound_check(P(-0.2, 1.0, 0.0, 3.0), -0.2, 2.0, kernel.psi, kernel)
    assert chk.lhs / chk.rhs_base == pytest.approx(3.0, rel=1e-6)
    assert not chk.passed


def test_averaging_bound_on_the_interval():
    chk = averaging_bound_check(P(-0.2), -0.2, 2.0, P(0.3), domain=Domain.UNIT_INTERVAL)
    assert chk.passed


def test_averaging_bound_errors():
    with pytest.raises(NotInClass):
        averaging_bound_check(CHI, 0.0, 2.0, P(1.5))
    with pytest.raises(HypothesisNotCertified):
        averaging_bound_check(CHI, -0.5, 2.0, ONE)
    with pytest.raises(BetaOutOfRange):
        averaging_bound_check(CHI, 0.2, 2.0, ONE)


def test_truncated_pair_example_closed_form():
    pair = CertifiedPair.from_averaging_bound(CHI, 0.0, 2.0)
    (chk,) = truncated_pair_check(pair, 0.5, [1.0])
    # F = 1, G = 1 on (0,1), m = x^{0.5}: both integrals 2/3, constant 2*... phi(4) = 4
    assert chk.lhs == pytest.approx(2 / 3)
    assert chk.rhs_base == pytest.approx(2 / 3)
    assert chk.rhs_constant == pytest.approx(4.0)
    assert chk.passed


def test_truncated_pair_checks_over_t():
    pair = CertifiedPair.from_averaging_bound(P(-0.3, 1.0, 0.0, 2.0), -0.3, 1.5, PsiKernel.power(0.4))
    checks = truncated_pair_check(pair, 0.3, np.geomspace(1e-4, 50, 12))
    assert all(c.passed for c in checks)


def test_truncated_pair_identical_pair_and_small_t():
    pair = CertifiedPair.identical(P(-0.2, 1.0, 0.0, 1.0), -0.2, 2.0, MonotoneFn.constant(1.0))
    checks = truncated_pair_check(pair, 0.7, [1e-14, 0.5, 3.0])
    assert all(c.passed for c in checks)
    assert checks[0].lhs < 1e-9 and abs(checks[0].margin) < 1e-9


def test_truncated_pair_divergent_base_is_vacuous():
    pair = CertifiedPair.from_averaging_bound(P(-0.3, 1.0, 0.0, 1.0), 0.0, 2.0)
    (chk,) = truncated_pair_check(pair, 1.9, [0.5])
    assert math.isinf(chk.rhs_base) and chk.passed


def test_truncated_pair_inherits_the_averaging_counterexample():
    # m = x^{0.5} truncated is a class weight, and the power profile beats the stated constant
    pair = CertifiedPair.from_averaging_bound(P(-0.45, 1.0, 0.0, 1.0), 0.0, 2.0)
    assert not all(c.passed for c in truncated_pair_check(pair, 1.0, [0.1, 1.0]))


def test_truncated_pair_refuses_uncertified_input():
    with pytest.raises(HypothesisNotCertified):
        truncated_pair_check((CHI, CHI), 0.5, [1.0])
    with pytest.raises(HypothesisNotCertified):
        CertifiedPair.identical(CHI, 0.0, 2.0, MonotoneFn.constant(0.5))
    with pytest.raises(HypothesisNotCertified):
        CertifiedPair.from_averaging_bound(CHI, -0.5, 2.0)


def test_main_constant_matches_straight_line_reimplementation():
    grid = np.geomspace(1e-3, 0.999, 64)
    got = extrapolation_constant(ONE, 0.0, 1.0, 2.0, eps_grid=grid, refine_iter=0)
    assert got.value == pytest.approx(straight_line_main_constant(1.0, 2.0, grid), rel=1e-6)
    got = extrapolation_constant(ONE, 0.0, 1.5, 3.0, eps_grid=grid * 1.5, refine_iter=0)
    assert got.value == pytest.approx(straight_line_main_constant(1.5, 3.0, grid * 1.5), rel=1e-6)


def test_main_constant_with_constant_phi_at_base_exponent():
    beta, p0, kappa = -0.2, 2.0, 3.0
    w = P(0.3)
    grid = np.geomspace(1e-3, 0.99 * p0 * (beta + 1), 20)
    got = extrapolation_constant(w, beta, p0, p0, MonotoneFn.constant(kappa), eps_grid=grid, refine_iter=0)
    want = min(qb_constant(w, ClassParams(beta, p0 - e)).class_constant
               * ((p0 * (beta + 1) - e) / ((beta + 1) * (p0 - e))) * kappa
               if qb_constant(w, ClassParams(beta, p0 - e)).is_member else math.inf for e in grid)
    assert got.value == pytest.approx(want, rel=1e-9)


def test_main_constant_non_increasing_in_p0_logged():
    vals = [extrapolation_constant(ONE, 0.0, p0, 3.0, refine_iter=10).value for p0 in (1.0, 1.5, 2.0, 3.0)]
    # an empirical trend, recorded rather than enforced
    print("main constant vs p0:", vals)
    assert all(math.isfinite(v) for v in vals)


def test_main_check_examples():
    pair = CertifiedPair.from_averaging_bound(CHI, 0.0, 1.0)
    chk = extrapolation_check(pair, ONE, 2.0)
    assert chk.passed and chk.lhs == pytest.approx(2.0)
    same = CertifiedPair.identical(CHI, 0.0, 1.0)
    assert extrapolation_check(same, P(0.4), 2.5).passed
    pair2 = CertifiedPair.from_averaging_bound(CHI, 0.0, 2.0)
    assert extrapolation_check(pair2, ONE, 2.0).passed


def test_main_constant_errors():
    with pytest.raises(NotInHatClass):
        extrapolation_constant(P(1.5), 0.0, 1.0, 2.0)
    with pytest.raises(ParameterOutOfRange):
        extrapolation_constant(ONE, 0.0, 2.0, 1.5)
    with pytest.raises(EmptyGrid):
        extrapolation_constant(ONE, 0.0, 1.0, 2.0, eps_grid=[0.6, 0.8], check_hat=False)


def test_infinity_constant_unit_weight():
    alphas = np.geomspace(0.1, 64, 64) / 2.0 - 1.0
    r = infinity_extrapolation_constant(ONE, 0.0, 1.0, 2.0, alpha_grid=alphas, refine_iter=0)
    q = 2 * (alphas[-1] + 1)
    assert r.argmin == pytest.approx(alphas[-1])
    assert r.value == pytest.approx(q / (q - 1), rel=1e-6)


def test_infinity_constant_fixed_factor_grows_as_beta_drops():
    grid = np.array([0.1, 0.3])
    vals = [infinity_extrapolation_constant(CHI, b, 1.0, 2.0, alpha_grid=grid, refine_iter=0).value
            for b in (0.0, -0.2, -0.3)]
    assert vals[0] < vals[1] < vals[2]


def test_interval_constant_matches_direct_evaluation():
    grid = np.geomspace(1e-3, 0.999, 24)
    r = interval_extrapolation_constant(ONE, 0.0, 1.0, 2.0, delta_grid=grid, refine_iter=0)
    direct = min(qb_constant(ONE, ClassParams(0.0, 2 * (1 - d), None, Domain.UNIT_INTERVAL)).class_constant
                 * (1 / d) ** 2 for d in grid
                 if qb_constant(ONE, ClassParams(0.0, 2 * (1 - d), None, Domain.UNIT_INTERVAL)).is_member)
    assert r.value == pytest.approx(direct, rel=1e-9)
    # delta -> 0 blows up with phi = identity
    assert r.profile[0][1] > 1e5


def test_grand_factor_arithmetic():
    p, s = 2.0, 0.3
    assert grand_factor(p, 1.0, s, 1.0) == pytest.approx(
        max(1, p * s ** (-1 / (p - s)) * 2 ** ((p - 1 - s) / (p - s))))
    assert grand_factor(p, 1e-12, s, 1.0) == pytest.approx(max(1, 2 ** ((p - 1 - s) / (p - s))), rel=1e-9)
    assert grand_factor(p, 1.0, 1e-8, 1.0) == pytest.approx(
        p * 1e-8 ** (-1 / (p - 1e-8)) * 2 ** ((p - 1 - 1e-8) / (p - 1e-8)))


def test_grand_constant_unit_weight():
    g = grand_extrapolation_constant(ONE, 0.0, 1.25, 2.0, 1.0)
    assert g.W == pytest.approx(1.0)
    assert math.isfinite(g.value) and g.interior_minimum
    for s, fac, sup, prod in g.profile:
        assert fac == pytest.approx(grand_factor(2.0, 1.0, s, 1.0))
        assert prod == pytest.approx(fac * sup)
    sups = [row[2] for row in g.profile]
    assert all(b >= a for a, b in zip(sups, sups[1:]))


def test_grand_constant_errors():
    with pytest.raises(DivergentWI):
        grand_extrapolation_constant(P(-1.0), 0.0, 1.25, 2.0, 1.0)
    with pytest.raises(NotInHatClass):
        grand_extrapolation_constant(P(1.0), 0.0, 1.25, 2.0, 1.0)
    with pytest.raises(ParameterOutOfRange):
        grand_extrapolation_constant(ONE, 0.0, 1.0, 2.0, 1.0)


def test_hardy_grand_examples():
    beta = -0.2
    f = P(beta) * ClosedFormFunc.indicator(0.0, 0.5)
    rep = grand_hardy_check([f, P(beta)], P(0.3), beta, 2.0, 1.0)
    assert rep.all_passed
    # H(x^beta) = x^beta/(beta+1), so the ratio of grand norms is exactly 1/(beta+1)
    homog = rep.checks[1]
    assert homog.lhs / homog.rhs_base == pytest.approx(1 / (1 + beta), rel=1e-9)
    flat = grand_hardy_check([ONE], ONE, 0.0, 2.0, 1.0, constant=rep.constant).checks[0]
    assert flat.lhs == pytest.approx(flat.rhs_base, rel=1e-12)


def test_hardy_grand_rejects_non_members():
    with pytest.raises(HypothesisNotCertified):
        grand_hardy_check([CHI], P(0.3), -0.2, 2.0, 1.0)


def test_necessity_member_weight_is_bounded_and_scale_free():
    rs = [1e-1, 1e-2, 1e-3]
    prof = grand_hardy_necessity(ONE, 0.0, 2.0, 1.0, rs, sufficiency_constant=40.0)
    assert prof.within_bound
    r = 0.01
    f = truncated_power(-0.2, r)
    assert f(np.array([r / 2]))[0] == pytest.approx((r / 2) ** -0.2)
    from qbhardy.norms import GrandParams, grand_norm
    from qbhardy.operators import hardy
    gp = GrandParams(2.0, 1.0)
    a = grand_norm(hardy(f), ONE, gp).value / grand_norm(f, ONE, gp).value
    b = grand_norm(hardy(f.scale(7.0)), ONE, gp).value / grand_norm(f.scale(7.0), ONE, gp).value
    assert a == pytest.approx(b, rel=1e-10)


def test_necessity_profile_matches_mpmath_oracle():
    # w = x, beta = 0, p = 2, theta = 1; oracle values computed with mpmath on a 2000-point eps grid
    prof = grand_hardy_necessity(P(1.0), 0.0, 2.0, 1.0, [1e-1, 1e-2, 1e-3, 1e-4])
    oracle = [4.328566638330682, 5.8590753761107619, 6.9306482911188709, 7.8264111640707545]
    np.testing.assert_allclose(prof.ratios, oracle, rtol=1e-4)
