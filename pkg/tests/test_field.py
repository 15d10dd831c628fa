import numpy as np
import pytest

from divchain import (Domain, ParamField, RectifiableSet, div_decomposition,
                      mollified_normal_trace, plateau_bump, primitive, sigma_of,
                      singular_set_check)
from divchain.cantor import MIDDLE_THIRDS, CantorPart, cantor_function
from divchain.errors import BoundaryError
from divchain.quadrature import integrate_1d

from conftest import sign_field, sign_t_field


@pytest.fixture
def bump(bump_center):
    return bump_center


def weak_action(v_of_t, phi, t, breakpoints=(0.0,)):
    """- int phi' v(., t) dx : brute-force weak divergence for 1D fields."""
    val, _ = integrate_1d(
        lambda x: -phi.gradient(x[:, None])[:, 0] * v_of_t(x[:, None], t)[:, 0],
        phi.support_box[0][0], phi.support_box[0][1],
        breakpoints=breakpoints, tol_abs=1e-12)
    return val


def test_sigma_of_t_scaled_sign(dom11, point_zero, bump):
    b = sign_t_field(dom11, point_zero)
    samples = [0.0, 1.0, 2.0]
    # brute-force: per-sample |Div| via the weak form, then the max
    per_t = []
    for t in samples:
        per_t.append(abs(weak_action(b.eval, bump, t)))
    sigma = sigma_of(b, samples)
    assert sigma.apply(bump) == pytest.approx(max(per_t), abs=1e-9)
    assert sigma.apply(bump) == pytest.approx(4.0, abs=1e-9)


def test_sigma_trivial_cases(dom11, point_zero, bump):
    const = ParamField(dom11, lambda pts, t: np.ones((len(pts), 1)), sup_bound=1.0)
    assert sigma_of(const, [0.0, 1.0]).apply(bump) == pytest.approx(0.0)
    b = sign_field(dom11, point_zero)
    assert sigma_of(b, [0.5]).apply(bump) == pytest.approx(2.0)


def test_singular_set_check(dom11, point_zero):
    b = sign_field(dom11, point_zero)
    rep = singular_set_check(b, sigma_of(b, [1.0]))
    assert rep["consistent"]
    on = [r for r in rep["points"] if r["on_declared_set"]]
    assert on and all(r["positive_density"] for r in on)


def test_singular_set_check_2d():
    from divchain import VerticalSegment
    dom = Domain.box((-1, 1), (-1, 1))
    N = RectifiableSet(2, curves=[VerticalSegment(0.0, -1, 1, +1)])
    b = ParamField(dom, lambda pts, t: np.column_stack([np.sign(pts[:, 0]),
                                                        np.zeros(len(pts))]),
                   sup_bound=1.0, singular_set=N,
                   b_plus=lambda pts, t: np.column_stack([np.ones(len(pts)),
                                                          np.zeros(len(pts))]),
                   b_minus=lambda pts, t: np.column_stack([-np.ones(len(pts)),
                                                           np.zeros(len(pts))]))
    rep = singular_set_check(b, sigma_of(b, [1.0]), radii=(1e-1, 1e-2))
    assert rep["consistent"]


def test_primitive_autonomous(dom11):
    b = ParamField(dom11, lambda pts, t: (2 * t * np.ones(len(pts)))[:, None],
                   sup_bound=6.0, t_range=(-3, 3))
    P = primitive(b)
    pts = dom11.grid(5)
    assert np.allclose(P.value(pts, 1.5)[:, 0], 2.25, atol=1e-12)
    assert P.check_derivative()


def test_primitive_traces(dom11, point_zero):
    b = sign_t_field(dom11, point_zero, factor=2.0)
    P = primitive(b)
    z = np.array([[0.0]])
    assert P.plus(z, 2.0)[0, 0] == pytest.approx(4.0)     # int_0^2 2w dw
    assert P.minus(z, 2.0)[0, 0] == pytest.approx(-4.0)
    assert P.star(z, 2.0)[0, 0] == pytest.approx(0.0)


def test_primitive_divergence_matches_weak_oracle(dom11, point_zero, bump):
    # Div_x B(., t) = [int_0^t dDiv_x b / dsigma] sigma for b = sign e1
    b = sign_field(dom11, point_zero)
    P = primitive(b)
    for t in (0.5, 1.0, 2.0):
        mu = P.div_measure(t)
        ref = weak_action(P.value, bump, t)
        assert mu.apply(bump) == pytest.approx(ref, abs=1e-9)
        assert mu.apply(bump) == pytest.approx(2 * t, abs=1e-9)


def test_div_decomposition_examples(dom11, point_zero, bump):
    b = sign_field(dom11, point_zero)
    assert div_decomposition(b, 1.7).apply(bump) == pytest.approx(2.0)

    lin = ParamField(dom11, lambda pts, t: (pts[:, 0] * t)[:, None], sup_bound=3.0,
                     diva=lambda pts, t: t * np.ones(len(pts)), t_range=(-3, 3))
    mu = div_decomposition(lin, 0.75)
    ref = weak_action(lin.eval, bump, 0.75, breakpoints=())
    assert mu.apply(bump) == pytest.approx(ref, abs=1e-10)


def test_div_decomposition_cantor_oracle():
    # b(x, t) = t C(x): Div_x b(., t) = t (Cantor measure); weak oracle at
    # a fixed refinement depth
    dom = Domain.interval(-0.5, 1.5)
    C = cantor_function()
    b = ParamField(dom, lambda pts, t: (C(pts[:, 0]) * t)[:, None], sup_bound=3.0,
                   divc_part=CantorPart(MIDDLE_THIRDS, 1.0),
                   divc_multiplier=lambda t: np.asarray(t, dtype=float),
                   t_range=(-3, 3))
    phi = plateau_bump([(-0.4, 1.4)], [(-0.1, 1.1)])
    t = 2.0
    mu = div_decomposition(b, t)
    weak, _ = integrate_1d(
        lambda x: -phi.gradient(x[:, None])[:, 0] * t * C(x), -0.4, 1.4,
        tol_abs=3e-7, tol_rel=1e-7)
    measure_side = mu.cantor.apply_at_depth(phi.value_1d, 12)
    assert measure_side == pytest.approx(weak, abs=1e-5)
    assert mu.apply(phi) == pytest.approx(weak, abs=1e-5)


def test_jump_density_is_trace_difference(dom11, point_zero):
    # the interface density of the decomposition equals beta+ - beta-
    b = sign_t_field(dom11, point_zero)
    for t in (0.5, 1.5):
        g = b.jump_density(t)
        val = g(np.array([[0.0]]), np.array([1.0]))[0]
        assert val == pytest.approx(2 * t)


def test_mollified_trace_examples(dom11, point_zero):
    b = sign_field(dom11, point_zero)
    for eps in (0.1, 0.05, 0.025):
        assert abs(mollified_normal_trace(b, 1.0, [0.0], eps)) < 1e-12

    H = ParamField(dom11, lambda pts, t: (pts[:, 0] > 0).astype(float)[:, None],
                   sup_bound=1.0, singular_set=point_zero,
                   b_plus=lambda pts, t: np.ones((len(pts), 1)),
                   b_minus=lambda pts, t: np.zeros((len(pts), 1)))
    assert mollified_normal_trace(H, 0.0, [0.0], 0.05) == pytest.approx(0.5)

    mod = ParamField(dom11, lambda pts, t: (np.sign(pts[:, 0]) * (1 + pts[:, 0] ** 2))[:, None],
                     sup_bound=2.0, singular_set=point_zero,
                     b_plus=lambda pts, t: (1 + pts[:, 0] ** 2)[:, None],
                     b_minus=lambda pts, t: -(1 + pts[:, 0] ** 2)[:, None])
    vals = [abs(mollified_normal_trace(mod, 0.0, [0.0], e)) for e in (0.1, 0.05, 0.025)]
    assert vals[2] <= vals[1] + 1e-12 <= vals[0] + 2e-12


def test_mollified_trace_boundary_error(dom11, point_zero):
    b = sign_field(dom11, point_zero)
    shifted = RectifiableSet(1, [0.95], [1.0])
    b2 = sign_field(dom11, shifted)
    with pytest.raises(BoundaryError):
        mollified_normal_trace(b2, 0.0, [0.95], 0.1)


def test_half_ball_oscillation(dom11, point_zero):
    b = sign_field(dom11, point_zero)
    P = primitive(b)
    rows = P.oscillation([0.0], 1.0, radii=(1e-2, 1e-3))
    assert all(r[1] < 1e-10 and r[2] < 1e-10 for r in rows)
    rows_off = P.oscillation([0.5], 1.0, radii=(1e-2, 1e-3))
    assert rows_off[1][1] <= rows_off[0][1] + 1e-12


def test_lipschitz_diva_validation(dom11):
    b = ParamField(dom11, lambda pts, t: (pts[:, 0] * t)[:, None], sup_bound=3.0,
                   diva=lambda pts, t: t * np.ones(len(pts)),
                   lipschitz_div=lambda pts: np.ones(len(pts)), t_range=(-3, 3))
    rows = {name: ok for name, ok, *_ in b.validate()}
    assert rows["lipschitz_diva"]


def test_bound_validation(dom11, point_zero):
    b = sign_field(dom11, point_zero)
    rows = {name: ok for name, ok, *_ in b.validate()}
    assert rows["bounded_by_M"]
