from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dupinkit import jets as J
from dupinkit.catalog import CATALOG_IDS, build
from dupinkit.errors import ContractError, DomainError
from dupinkit.jets import StencilSpec, field_derivative, field_hessian, jet_eval


def sample_map(u):
    x, y = u
    return [J.sin(x) * J.exp(y), x * x / (1.0 + y * y), J.sqrt(2.0 + J.cosh(x * y)), (x - y) ** 3, J.log(2.0 + x)]


def sample_exact(x, y):
    """Hand-written first and second partials of the sample map's first component."""
    f = np.sin(x) * np.exp(y)
    grad = np.array([np.cos(x) * np.exp(y), f])
    hess = np.array([[-f, np.cos(x) * np.exp(y)], [np.cos(x) * np.exp(y), f]])
    return f, grad, hess


def test_jet_matches_hand_derivatives():
    x, y = 0.4, -0.2
    jet = jet_eval(sample_map, [x, y])
    f, grad, hess = sample_exact(x, y)
    assert jet.value[0] == pytest.approx(f)
    assert np.allclose(jet.jacobian[0], grad, atol=1e-14)
    assert np.allclose(jet.hessian[..., 0], hess, atol=1e-14)


@given(st.floats(-1, 1), st.floats(-1, 1))
@settings(max_examples=40, deadline=None)
def test_jet_agrees_with_finite_differences(x, y):
    p = np.array([x, y])
    jet = jet_eval(sample_map, p)

    def value(q):
        return np.stack(sample_map([q[..., 0], q[..., 1]]), axis=-1)

    fd_jac = field_derivative(value, p)
    fd_hess = np.moveaxis(field_hessian(value, p), 0, -1)
    assert np.allclose(jet.jacobian, fd_jac, atol=1e-9)
    assert np.allclose(jet.hessian, fd_hess, atol=1e-6)


def test_jet_is_batched():
    P = np.array([[0.1, 0.2], [0.3, -0.4], [0.0, 0.5]])
    batch = jet_eval(sample_map, P)
    for s, p in enumerate(P):
        single = jet_eval(sample_map, p)
        assert np.allclose(batch.hessian[s], single.hessian)


@pytest.mark.parametrize("entry_id", CATALOG_IDS)
def test_catalog_jacobians_match_differences(entry_id):
    imm = build(entry_id).immersion
    p = imm.grid(2)
    jac = imm.jet(p).jacobian
    assert np.allclose(jac, field_derivative(imm, p, domain=imm.domain), atol=1e-9)


def test_second_order_stencil_error_scales():
    f = lambda q: np.sin(q[..., 0])  # noqa: E731
    p = np.array([0.3])
    err = [abs(field_derivative(f, p, StencilSpec(h, 2))[0] - np.cos(0.3)) for h in (1e-2, 5e-3)]
    assert err[0] / err[1] == pytest.approx(4.0, rel=0.05)


def test_domain_checks():
    with pytest.raises(DomainError):
        jet_eval(sample_map, [0.0, 0.0], domain=([0.0, -1.0], [1.0, 1.0]))
    f = lambda q: q[..., 0]  # noqa: E731
    with pytest.raises(DomainError):
        field_derivative(f, np.array([0.9995]), domain=(np.array([0.0]), np.array([1.0])))


def test_stencil_contract():
    with pytest.raises(ContractError):
        StencilSpec(step=0.0)
    with pytest.raises(ContractError):
        StencilSpec(order=3)
