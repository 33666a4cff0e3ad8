from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dupinkit.catalog import build, product_hypersurface
from dupinkit.conformal import light_cone_signature
from dupinkit.errors import ChartEscapeError, ContractError
from dupinkit.hypersurface import SpaceForm, principal_data
from dupinkit.indefinite import PseudoOrthogonalTransform, boost, inner_product, random_pseudo_orthogonal
from dupinkit.moebius import (
    ProjectiveLightPoint,
    act,
    chart_transition,
    transform_immersion,
    verify_moebius_invariance,
)

SIG4 = light_cone_signature(4)  # R^7_2, for hypersurfaces of dimension 4
SIG3 = light_cone_signature(3)
CYL = product_hypersurface(0, 1, 2.0, 3)
WARPED = build("ex34:p=1,q=1,a=sqrt(2),n=4").immersion


def test_representative_is_normalised():
    pt = ProjectiveLightPoint(np.array([-1.0, 0, 0, 0, 0, 1.0]) * -3)
    assert np.max(np.abs(pt.representative)) == 1.0
    assert 1.0 in pt.representative
    with pytest.raises(ContractError):
        ProjectiveLightPoint(np.zeros(6))
    with pytest.raises(ContractError):
        ProjectiveLightPoint(np.array([1.0, 0, 0, 0, 0, 0]))


def test_identity_action():
    pt = ProjectiveLightPoint.lift(0, [0.3, 0.1, -0.2, 0.5])
    same = act(PseudoOrthogonalTransform.identity(SIG3), pt)
    assert np.allclose(same.representative, pt.representative)


def test_dimension_mismatch():
    with pytest.raises(ContractError):
        act(PseudoOrthogonalTransform.identity(SIG4), ProjectiveLightPoint.lift(0, [0.3, 0.1, -0.2, 0.5]))


@given(st.integers(0, 500), st.lists(st.floats(-2, 2), min_size=5, max_size=5))
@settings(max_examples=40, deadline=None)
def test_action_keeps_lightlike(seed, x):
    T = random_pseudo_orthogonal(SIG4, seed)
    out = act(T, ProjectiveLightPoint.lift(0, x))
    assert abs(inner_product(SIG4, out.representative, out.representative)) < 1e-9


@given(st.lists(st.floats(-2, 2), min_size=4, max_size=4))
@settings(max_examples=40, deadline=None)
def test_flat_chart_round_trip(x):
    back, ok = chart_transition(ProjectiveLightPoint.lift(0, x), 0)
    assert ok
    assert np.allclose(back, x, atol=1e-12 * (1 + np.dot(x, x)))


def test_curved_chart_round_trips():
    xs = np.array([np.sinh(0.4), np.cosh(0.4), 0.0, 0.0, 0.0])  # S^4_1 in R^5_1
    back, ok = chart_transition(ProjectiveLightPoint.lift(1, xs), 1)
    assert ok and np.allclose(back, xs, atol=1e-12)
    xh = np.array([np.cosh(0.4), 0.0, np.sinh(0.4), 0.0, 0.0])  # H^4_1 in R^5_2
    back, ok = chart_transition(ProjectiveLightPoint.lift(-1, xh), -1)
    assert ok and np.allclose(back, xh, atol=1e-12)


def test_boundary_plane_flags():
    pt = ProjectiveLightPoint(np.array([1.0, 0, 0, 0, 0, 1.0]))  # x_first = x_last
    assert chart_transition(pt, 0)[1] is False
    pt = ProjectiveLightPoint(np.array([0.0, 1.0, 0, 0, 1.0, 0.0]))
    assert chart_transition(pt, 1)[1] is False
    assert chart_transition(pt, -1)[1] is False


def test_de_sitter_to_anti_de_sitter():
    xs = np.array([0.3, 0.2, 0.5, 0.1, 0.0])
    xs[-1] = np.sqrt(1 + xs[0] ** 2 - np.sum(xs[1:-1] ** 2))
    x, ok = chart_transition(ProjectiveLightPoint.lift(1, xs), -1)
    assert ok
    assert inner_product(SpaceForm(-1, 3).ambient_signature, x, x) == pytest.approx(-1.0, abs=1e-10)


def test_boost_of_origin_round_trip():
    T = boost(SIG3, 1, 3, 0.3)
    pt = act(T, ProjectiveLightPoint.lift(0, np.zeros(4)))
    x, ok = chart_transition(pt, 0)
    assert ok
    again = chart_transition(ProjectiveLightPoint.lift(0, x), 0)[0]
    assert np.allclose(x, again, atol=1e-9)
    assert np.allclose(ProjectiveLightPoint.lift(0, x).representative, pt.representative, atol=1e-9)


def test_identity_transform_is_pointwise_equal():
    tr = transform_immersion(CYL, PseudoOrthogonalTransform.identity(SIG3))
    P = CYL.grid(3)
    assert tr.coverage == 1.0
    assert np.allclose(tr.immersion(P), CYL(P), atol=1e-12)
    res = verify_moebius_invariance(CYL, PseudoOrthogonalTransform.identity(SIG3), P)
    assert res.deviation < 1e-12


def test_cylinder_into_anti_de_sitter_chart():
    tr = transform_immersion(CYL, PseudoOrthogonalTransform.identity(SIG3), target_c=-1)
    P = CYL.grid(3)
    P = P[tr.immersion.valid(P)]
    x = tr.immersion(P)
    assert np.max(np.abs(tr.immersion.space_form.quadric_residual(x))) < 1e-10
    cd = principal_data(tr.immersion, P[0])
    assert cd.multiplicities in ((1, 2), (2, 1))


def test_cylinder_boost_keeps_b_spectrum():
    res = verify_moebius_invariance(CYL, boost(SIG3, 0, 3, 0.4), CYL.grid(3))
    assert res.patterns_match and res.b_deviation < 1e-6


def test_warped_seed_seven():
    T = random_pseudo_orthogonal(SIG4, 7)
    P = WARPED.grid(3)
    res = verify_moebius_invariance(WARPED, T, P)
    assert res.passed(1e-6)
    new = transform_immersion(WARPED, T).immersion
    vals = principal_data(new, P[new.valid(P)][0]).values
    m = (vals[0] - vals[1]) / (vals[0] - vals[2])
    assert m == pytest.approx(0.5, abs=1e-9)


def test_chart_escape():
    # a normalised representative has |X_0 - X_last| <= 2, so this margin rejects every sample
    with pytest.raises(ChartEscapeError):
        transform_immersion(CYL, PseudoOrthogonalTransform.identity(SIG3), target_c=0, margin=10.0)
