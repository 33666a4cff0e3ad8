from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dupinkit.catalog import CATALOG_IDS, build, perturbed_graph, product_hypersurface
from dupinkit.errors import ContractError, DegenerateError, DomainError, NotSpacelikeError
from dupinkit.hypersurface import (
    Immersion,
    SpaceForm,
    dupin_check,
    fundamental_forms,
    induced_scalar_curvature,
    local_geometry,
    moebius_curvature,
    moebius_table,
    principal_data,
    unit_normal,
)

# H^1(-2) x R^2: I = diag(4, 1, 1), II = diag(-2, 0, 0), lambda = (-1/2, 0, 0)
CYL = product_hypersurface(0, 1, 2.0, 3)


@given(st.floats(-0.5, 0.5), st.floats(-0.9, 0.9), st.floats(-0.9, 0.9))
@settings(max_examples=30, deadline=None)
def test_cylinder_forms(s, y1, y2):
    cd = fundamental_forms(CYL, [s, y1, y2])
    assert np.allclose(cd.I, np.diag([4.0, 1, 1]), atol=1e-12)
    assert np.allclose(cd.II, np.diag([-2.0, 0, 0]), atol=1e-12)
    assert np.allclose(cd.normal, [np.cosh(s), np.sinh(s), 0, 0], atol=1e-12)


def test_cylinder_principal_data():
    cd = principal_data(CYL, [0.1, 0.2, -0.3])
    assert cd.values == pytest.approx([-0.5, 0.0], abs=1e-12)
    assert cd.multiplicities == (1, 2)
    assert cd.H == pytest.approx(-1 / 6, abs=1e-12)
    for cl in cd.clusters:
        assert np.allclose(cl.basis.T @ cd.I @ cl.basis, np.eye(cl.multiplicity), atol=1e-12)
    assert induced_scalar_curvature(cd, 3) == pytest.approx(0.0, abs=1e-12)


def test_de_sitter_product_curvatures():
    imm = product_hypersurface(1, 1, 1.0, 3)
    cd = principal_data(imm, imm.base_point)
    assert sorted(abs(v) for v in cd.values) == pytest.approx([1 / np.sqrt(2), np.sqrt(2)])
    assert abs(cd.values[0] * cd.values[1]) == pytest.approx(1.0)


@pytest.mark.parametrize("entry_id", CATALOG_IDS)
def test_catalog_geometry_is_spacelike(entry_id):
    imm = build(entry_id).immersion
    lg = local_geometry(imm, imm.grid(3))
    assert np.min(np.linalg.eigvalsh(lg.I)) > 0
    sig = imm.space_form.ambient_signature
    e = lg.normal
    assert np.allclose(np.einsum("...k,...k,k->...", e, e, sig.signs), -1.0, atol=1e-12)
    tangent = np.einsum("...ka,...k,k->...a", lg.jacobian, e, sig.signs)
    assert np.max(np.abs(tangent)) < 1e-12
    assert np.max(np.abs(imm.space_form.quadric_residual(lg.x))) < 1e-10


def test_normal_orientation_is_continuous_in_anti_de_sitter():
    imm = build("prod-ads:k=1,a=0.6,n=3").immersion
    lams = local_geometry(imm, imm.grid(4)).lams
    assert np.allclose(lams, lams[0], atol=1e-10)


def test_normal_sign_flips_curvatures():
    p = CYL.base_point
    assert np.allclose(unit_normal(CYL.with_normal_sign(-1), p), -unit_normal(CYL, p))
    assert principal_data(CYL.with_normal_sign(-1), p).values == pytest.approx([0.0, 0.5], abs=1e-12)


def test_timelike_surface_is_rejected():
    imm = Immersion(1, SpaceForm(0, 1), (-1.0,), (1.0,), lambda u: [u[0], 0.5 * u[0]])
    with pytest.raises(NotSpacelikeError):
        local_geometry(imm, [0.0])


def test_chart_domain_is_enforced():
    with pytest.raises(DomainError):
        CYL([5.0, 0.0, 0.0])


def test_immersion_contract():
    with pytest.raises(ContractError):
        Immersion(2, SpaceForm(0, 2), (0.0,), (1.0,), lambda u: u)
    with pytest.raises(ContractError):
        SpaceForm(2, 3)


def test_moebius_curvature():
    lams = [-np.sqrt(2), -1 / np.sqrt(2), 0.0]
    assert moebius_curvature(lams, 0, 1, 2) == pytest.approx(0.5)
    with pytest.raises(DegenerateError):
        moebius_curvature([1.0, 2.0, 1.0], 0, 1, 2)
    table = moebius_table(lams)
    assert table[(0, 1, 2)] == pytest.approx(0.5)
    assert table[(0, 2, 1)] == pytest.approx(2.0)
    assert table[(0, 0, 1)] == 0.0


@given(st.lists(st.floats(-5, 5), min_size=3, max_size=3, unique=True), st.floats(0.2, 5), st.floats(-3, 3))
@settings(max_examples=50, deadline=None)
def test_moebius_curvature_affine_invariance(lams, scale, shift):
    lams = np.asarray(lams)
    if min(abs(lams[0] - lams[2]), abs(lams[0] - lams[1])) < 1e-3:
        return
    moved = scale * lams + shift
    assert moebius_curvature(moved, 0, 1, 2) == pytest.approx(moebius_curvature(lams, 0, 1, 2), rel=1e-9)


@pytest.mark.parametrize("entry_id", CATALOG_IDS)
def test_catalog_is_dupin(entry_id):
    imm = build(entry_id).immersion
    rep = dupin_check(imm, imm.grid(3))
    assert rep.passed and rep.proper


def test_graph_is_not_dupin():
    imm = perturbed_graph(0.1, 3)
    rep = dupin_check(imm, imm.grid(3))
    assert rep.proper and not rep.passed and rep.max_violation > 1e-2


def test_changing_multiplicity_is_not_proper():
    # a Lorentz-graph that is umbilic at the origin only
    imm = Immersion(2, SpaceForm(0, 2), (-0.5, -0.5), (0.5, 0.5), lambda u: [0.1 * (u[0] ** 2 + u[1] ** 2) + 0.1 * u[0] ** 4, u[0], u[1]])
    rep = dupin_check(imm, np.array([[0.0, 0.0], [0.3, 0.2]]), cluster_tol=1e-3)
    assert not rep.proper and not rep.passed
