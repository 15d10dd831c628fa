import numpy as np
import pytest

from divchain import (Domain, RadonMeasure, build_suite, compare,
                      mollification_study, plateau_bump, weak_divergence)

from conftest import sign_field


def test_weak_divergence_of_x(dom11, bump_center):
    # Div(x) = dx, so -int phi' x = int phi
    val, _ = weak_divergence(lambda pts: pts[:, 0][:, None], bump_center, dom11,
                             tol_abs=1e-11, tol_rel=1e-11)
    ref = RadonMeasure.lebesgue(dom11).apply(bump_center)
    assert val == pytest.approx(ref, abs=1e-9)


def test_weak_divergence_of_heaviside(dom11, point_zero, bump_center):
    v = lambda pts: (pts[:, 0] > 0).astype(float)[:, None]
    val, _ = weak_divergence(v, bump_center, dom11, point_zero,
                             tol_abs=1e-11, tol_rel=1e-11)
    assert val == pytest.approx(float(bump_center.value(np.array([[0.0]]))[0]),
                                abs=1e-9)


def test_weak_divergence_cross_refinement(dom11, point_zero, bump_center):
    # v = sign(x) sin(H(x)): Div v = sin(1) delta_0; three refinement levels
    def v(pts):
        h = (pts[:, 0] > 0).astype(float)
        return (np.sign(pts[:, 0]) * np.sin(h))[:, None]

    vals = [weak_divergence(v, bump_center, dom11, point_zero, tol_abs=tol,
                            tol_rel=tol)[0]
            for tol in (1e-8, 1e-10, 1e-12)]
    assert vals[0] == pytest.approx(np.sin(1.0), abs=1e-7)
    assert abs(vals[2] - vals[1]) <= abs(vals[1] - vals[0]) + 1e-12
    assert vals[2] == pytest.approx(np.sin(1.0), abs=1e-10)


def test_suite_invariants(dom11, point_zero):
    suite = build_suite(dom11, point_zero)
    assert len(suite) >= 20
    straddling = 0
    for phi in suite:
        (lo, hi), = phi.support_box
        if lo < 0.0 < hi:
            straddling += 1
    assert straddling >= 3
    for phi in suite:
        assert phi.check_gradient()


def test_compare_passes_on_consistent_pair(dom11, point_zero, bump_center):
    suite = build_suite(dom11, point_zero)
    mu = RadonMeasure.point_mass(dom11, 0.0, 1.0)
    v = lambda pts: (pts[:, 0] > 0).astype(float)[:, None]
    rep = compare(mu, v, suite)
    assert rep["pass"] and rep["max_difference"] < 1e-9


def test_compare_zero_measure_constant_field(dom11):
    suite = build_suite(dom11, None)
    rep = compare(RadonMeasure.zero(dom11),
                  lambda pts: np.full((len(pts), 1), 0.7), suite)
    assert rep["pass"]


def test_compare_negative_control(dom11, point_zero):
    # mu = delta_0 against v = 0 must fail with difference phi(0)
    suite = build_suite(dom11, point_zero)
    mu = RadonMeasure.point_mass(dom11, 0.0, 1.0)
    rep = compare(mu, lambda pts: np.zeros((len(pts), 1)), suite)
    assert not rep["pass"]
    assert rep["max_difference"] > 0.5


def test_mollification_study(dom11, point_zero):
    b = sign_field(dom11, point_zero)
    rep = mollification_study(b, 1.0, [0.0], [0.1, 0.05, 0.025])
    assert rep["nonincreasing_tail"]
    assert all(r["deviation"] < 1e-12 for r in rep["rows"])
    with pytest.raises(ValueError):
        mollification_study(b, 1.0, [0.0], [0.05, 0.1])
