import numpy as np
import pytest

from divchain import (BVFunction, Domain, ParamField, RectifiableSet, ScalarFunction,
                      anzellotti_pairing, chain_bv_scalar, chain_dm, chain_w11,
                      green_check, layer_cake_action, plateau_bump, primitive,
                      product_rule, sigma_of, weak_divergence)
from divchain.errors import GeometryError, WrongRegularityError

from conftest import ONES, ZEROS, sign_field, sign_t_field


def oracle(field, u, phi, dom, singular):
    P = primitive(field)
    v = lambda pts: P.value(pts, u.eval(pts))
    val, _ = weak_divergence(v, phi, dom, singular, tol_abs=1e-11)
    return val


def test_chain_dm_autonomous_heaviside(dom11, heaviside, bump_center):
    b = ParamField(dom11, lambda pts, t: (2 * t * np.ones(len(pts)))[:, None],
                   sup_bound=8.0, t_range=(-3, 3))
    br = chain_dm(b, heaviside)
    # Dv = [u+^2 - u-^2] delta_0 = delta_0; all x-terms vanish
    assert br.total.apply(bump_center) == pytest.approx(1.0)
    assert br.term_diva.apply(bump_center) == 0.0
    assert br.term_ac_u.apply(bump_center) == 0.0
    assert br.term_jump.apply(bump_center) == pytest.approx(1.0)


def test_chain_dm_t_independent_constant(dom11, sign, bump_center):
    c = 0.75
    uc = BVFunction.piecewise_1d(dom11, [], values=[lambda x: c * np.ones_like(x)],
                                 grads=[ZEROS])
    br = chain_dm(sign, uc)
    assert br.total.apply(bump_center) == pytest.approx(2 * c)
    assert br.term_jump.apply(bump_center) == pytest.approx(2 * c)


def test_chain_dm_joint_jump_oracle(dom11, point_zero, heaviside, bump_center):
    b = sign_t_field(dom11, point_zero, factor=2.0)
    br = chain_dm(b, heaviside)
    ref = oracle(b, heaviside, bump_center, dom11, point_zero)
    assert br.total.apply(bump_center) == pytest.approx(ref, abs=1e-8)
    assert br.total.apply(bump_center) == pytest.approx(1.0, abs=1e-9)


def test_symmetric_regrouping_matches(dom11, point_zero, heaviside, bump_center):
    b = sign_t_field(dom11, point_zero, factor=2.0)
    br = chain_dm(b, heaviside)
    assert br.jump_symmetric_view().apply(bump_center) == pytest.approx(
        br.term_jump.apply(bump_center), abs=1e-12)


def test_chain_w11_requires_continuity(dom11, sign, heaviside):
    with pytest.raises(WrongRegularityError):
        chain_w11(sign, heaviside)


def test_chain_w11_examples(dom11, point_zero, sign, bump_center):
    # u = x^2 against sign(x): v = sign(x) x^2 is C^1, total purely a.c.
    u = BVFunction.piecewise_1d(dom11, [], values=[lambda x: x ** 2],
                                grads=[lambda x: 2 * x])
    br = chain_w11(sign, u)
    ref = oracle(sign, u, bump_center, dom11, point_zero)
    assert br.total.apply(bump_center) == pytest.approx(ref, abs=1e-9)
    assert br.term_jump.apply(bump_center) == pytest.approx(0.0, abs=1e-12)

    one = BVFunction.piecewise_1d(dom11, [], values=[ONES], grads=[ZEROS])
    assert chain_w11(sign, one).total.apply(bump_center) == pytest.approx(2.0)

    grow = ParamField(dom11,
                      lambda pts, t: ((1 + t ** 2) * np.sign(pts[:, 0]))[:, None],
                      sup_bound=10.0, singular_set=point_zero,
                      b_plus=lambda pts, t: ((1 + t ** 2) * np.ones(len(pts)))[:, None],
                      b_minus=lambda pts, t: (-(1 + t ** 2) * np.ones(len(pts)))[:, None],
                      t_range=(-3, 3))
    ux = BVFunction.piecewise_1d(dom11, [], values=[lambda x: x], grads=[ONES])
    br3 = chain_w11(grow, ux)
    ref3 = oracle(grow, ux, bump_center, dom11, point_zero)
    assert br3.total.apply(bump_center) == pytest.approx(ref3, abs=1e-8)
    assert br3.term_jump.apply(bump_center) == pytest.approx(0.0, abs=1e-12)


def test_layer_cake_cross_check(dom11, point_zero, sign, bump_center):
    u = BVFunction.piecewise_1d(dom11, [], values=[lambda x: x ** 2],
                                grads=[lambda x: 2 * x])
    br = chain_w11(sign, u)
    lc = layer_cake_action(sign, u, bump_center, t_tol=1e-9)
    xpart = (br.term_diva + br.term_divc + br.term_jump).apply(bump_center)
    assert lc == pytest.approx(xpart, abs=1e-7)


def test_chain_bv_scalar_examples(dom11, point_zero, bump_center):
    # autonomous reduction
    b_auto = ParamField(dom11, lambda pts, t: (2 * t * np.ones(len(pts)))[:, None],
                        sup_bound=8.0, t_range=(-3, 3))
    H = BVFunction.piecewise_1d(dom11, [0.0], values=[ZEROS, ONES],
                                grads=[ZEROS, ZEROS])
    br = chain_bv_scalar(b_auto, H)
    assert br.total.apply(bump_center) == pytest.approx(
        chain_dm(b_auto, H).total.apply(bump_center), abs=1e-12)

    # t-independent: product of BV functions
    sgn = sign_field(dom11, point_zero)
    u = BVFunction.piecewise_1d(dom11, [], values=[lambda x: 0.5 + 0.25 * x],
                                grads=[lambda x: 0.25 * np.ones_like(x)])
    br2 = chain_bv_scalar(sgn, u)
    ref2 = oracle(sgn, u, bump_center, dom11, point_zero)
    assert br2.total.apply(bump_center) == pytest.approx(ref2, abs=1e-9)

    # b = sign(x) t against u = 2H: v = 2H, total = 2 delta_0
    b = sign_t_field(dom11, point_zero)
    u2h = BVFunction.piecewise_1d(dom11, [0.0],
                                  values=[ZEROS, lambda x: 2 * np.ones_like(x)],
                                  grads=[ZEROS, ZEROS])
    br3 = chain_bv_scalar(b, u2h)
    ref3 = oracle(b, u2h, bump_center, dom11, point_zero)
    assert br3.total.apply(bump_center) == pytest.approx(ref3, abs=1e-8)
    assert br3.total.apply(bump_center) == pytest.approx(2.0, abs=1e-9)
    assert br3.total.apply(bump_center) == pytest.approx(
        chain_dm(b, u2h).total.apply(bump_center), abs=1e-10)


def test_product_rule_examples(dom11, point_zero, sign, heaviside, bump_center):
    ident = ScalarFunction(lambda t: np.asarray(t, dtype=float),
                           lambda t: np.ones_like(np.asarray(t, dtype=float)), 1.0)
    # h(t) = t, u smooth: Div(uA) = u(0) 2 delta + sign(x) u'(x) dx
    u = BVFunction.piecewise_1d(dom11, [], values=[lambda x: x], grads=[ONES])
    br = product_rule(sign, ident, u)
    ref = oracle(sign, u, bump_center, dom11, point_zero)
    assert br.total.apply(bump_center) == pytest.approx(ref, abs=1e-9)

    # h(t) = t^2, A smooth constant: Div(A h(u)) = (1 - 0) delta_0
    e1 = ParamField(dom11, lambda pts, t: np.ones((len(pts), 1)), sup_bound=1.0,
                    t_range=(-3, 3))
    sq = ScalarFunction(lambda t: np.asarray(t) ** 2,
                        lambda t: 2 * np.asarray(t, dtype=float), 2.0)
    br2 = product_rule(e1, sq, heaviside)
    assert br2.total.apply(bump_center) == pytest.approx(1.0)

    # h = sin, u = H, A = sign: total = sin(1) delta_0, oracle-confirmed
    hsin = ScalarFunction(np.sin, np.cos, 1.0)
    br3 = product_rule(sign, hsin, heaviside)
    v3 = lambda pts: (np.sign(pts[:, 0]) * np.sin(heaviside.eval(pts)))[:, None]
    ref3, _ = weak_divergence(v3, bump_center, dom11, point_zero, tol_abs=1e-11)
    assert br3.total.apply(bump_center) == pytest.approx(np.sin(1.0), abs=1e-9)
    assert br3.total.apply(bump_center) == pytest.approx(ref3, abs=1e-8)


def test_chain_dm_reduces_to_product_rule(dom11, point_zero, sign, heaviside,
                                          bump_center):
    ident = ScalarFunction(lambda t: np.asarray(t, dtype=float),
                           lambda t: np.ones_like(np.asarray(t, dtype=float)), 1.0)
    br_chain = chain_dm(sign, heaviside)
    br_prod = product_rule(sign, ident, heaviside)
    for k in br_chain.terms():
        assert br_chain.terms()[k].apply(bump_center) == pytest.approx(
            br_prod.terms()[k].apply(bump_center), abs=1e-10)


def test_anzellotti_examples(dom11, point_zero, sign, heaviside, bump_center):
    # A = sign, u = x: (A, Du) = sign(x) dx
    u = BVFunction.piecewise_1d(dom11, [], values=[lambda x: x], grads=[ONES])
    pairing = anzellotti_pairing(sign, u)
    phi_off = plateau_bump([(0.1, 0.9)], [(0.3, 0.7)])
    from divchain.quadrature import integrate_1d
    ref, _ = integrate_1d(lambda x: phi_off.value(x[:, None]) * np.sign(x), 0.1, 0.9)
    assert pairing.apply(phi_off) == pytest.approx(ref, abs=1e-10)

    # A, u smooth: (A, Du) = <A, grad u> dx
    smooth = ParamField(dom11, lambda pts, t: np.cos(pts[:, 0])[:, None], sup_bound=1.0,
                        diva=lambda pts, t: -np.sin(pts[:, 0]), t_range=(-3, 3))
    pairing2 = anzellotti_pairing(smooth, u)
    ref2, _ = integrate_1d(lambda x: bump_center.value(x[:, None]) * np.cos(x),
                           -0.5, 0.5)
    assert pairing2.apply(bump_center) == pytest.approx(ref2, abs=1e-10)

    # A = sign, u = H: Div(uA) = delta_0 and u* Div A = delta_0, so zero
    pairing3 = anzellotti_pairing(sign, heaviside)
    assert pairing3.apply(bump_center) == pytest.approx(0.0, abs=1e-10)


def test_tv_bound(dom11, point_zero, heaviside):
    b = sign_t_field(dom11, point_zero, factor=2.0)
    br = chain_dm(b, heaviside)
    sigma = sigma_of(b, [0.0, 1.0, 2.0])
    ok, lhs, rhs = br.tv_bound_holds(sigma, b.M, heaviside)
    assert ok and lhs <= rhs + 1e-9


def test_degenerate_jump_reported(dom11, point_zero):
    b = sign_field(dom11, point_zero)
    equal = BVFunction.piecewise_1d(dom11, [0.0],
                                    values=[lambda x: 0.3 * np.ones_like(x)] * 2,
                                    grads=[ZEROS, ZEROS])
    br = chain_dm(b, equal)
    assert br.report["degenerate_jump_samples"] > 0


def test_green_examples(dom11, point_zero, sign):
    lin = ParamField(dom11, lambda pts, t: pts[:, 0][:, None], sup_bound=1.0,
                     diva=lambda pts, t: np.ones(len(pts)), t_range=(-3, 3))
    lhs, rhs = green_check(lin, ("box", ((-0.5, 0.5),)), w0=0.02)
    assert rhs == pytest.approx(1.0) and lhs == pytest.approx(rhs, abs=1e-7)

    lhs, rhs = green_check(sign, ("box", ((-0.9, 0.9),)), w0=0.02)
    assert rhs == pytest.approx(2.0) and lhs == pytest.approx(rhs, abs=1e-8)

    dom2 = Domain.box((-1, 1), (-1, 1))
    radial = ParamField(dom2, lambda pts, t: pts.copy(), sup_bound=2.0,
                        diva=lambda pts, t: 2 * np.ones(len(pts)), t_range=(-3, 3))
    lhs, rhs = green_check(radial, ("box", ((-0.5, 0.5), (-0.5, 0.5))), w0=0.03)
    assert rhs == pytest.approx(2.0, abs=1e-10)
    assert lhs == pytest.approx(rhs, rel=1e-6)
    lhs, rhs = green_check(radial, ("disc", ((0.1, -0.1), 0.5)), w0=0.03)
    assert rhs == pytest.approx(2 * np.pi * 0.25, abs=1e-8)
    assert lhs == pytest.approx(rhs, rel=1e-6)


def test_green_tangency_rejected(dom11, point_zero, sign):
    with pytest.raises(GeometryError):
        green_check(sign, ("box", ((0.0, 0.5),)))


def test_orientation_invariance(dom11, point_zero, heaviside, bump_center):
    b = sign_t_field(dom11, point_zero, factor=2.0)
    br = chain_dm(b, heaviside)
    br_f = chain_dm(b.flipped(), heaviside.flipped())
    assert br.total.apply(bump_center) == pytest.approx(
        br_f.total.apply(bump_center), abs=1e-12)
