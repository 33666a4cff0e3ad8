"""Levi-Civita connection and curvature from metric components and their partials.

Index layout: ``dg[..., a, b, c] = d_c g_ab`` and ``d2g[..., a, b, c, d] = d_c d_d g_ab``.
Curvature follows ``R(X, Y)Z = nabla_X nabla_Y Z - nabla_Y nabla_X Z - nabla_[X,Y] Z``
with ``R_abcd = <R(d_c, d_d) d_b, d_a>``, so ``R_abab`` is the sectional
curvature times ``|d_a ^ d_b|^2``.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from .jets import DEFAULT_STENCIL, StencilSpec, field_derivative, field_hessian


def christoffel_from(g: np.ndarray, dg: np.ndarray) -> np.ndarray:
    """``Gamma[..., a, d, b] = Gamma^a_{db}``."""
    first = 0.5 * (
        np.einsum("...ebd->...edb", dg)
        + np.einsum("...edb->...edb", dg)
        - np.einsum("...dbe->...edb", dg)
    )
    return np.einsum("...ae,...edb->...adb", np.linalg.inv(g), first)


def riemann_from(g: np.ndarray, dg: np.ndarray, d2g: np.ndarray) -> np.ndarray:
    """Fully covariant ``R[..., a, b, c, d]``."""
    ginv = np.linalg.inv(g)
    Gam = christoffel_from(g, dg)
    # d_c Gamma_{e,db} = 1/2 (d_c d_d g_eb + d_c d_b g_ed - d_c d_e g_db)
    dfirst = 0.5 * (
        np.einsum("...ebcd->...edbc", d2g)
        + np.einsum("...edcb->...edbc", d2g)
        - np.einsum("...dbce->...edbc", d2g)
    )
    dginv_first = np.einsum("...af,...fhc,...hdb->...adbc", ginv, dg, Gam)
    dGam = np.einsum("...ae,...edbc->...adbc", ginv, dfirst) - dginv_first  # d_c Gamma^a_db
    R_up = (
        np.einsum("...adbc->...abcd", dGam)
        - np.einsum("...acbd->...abcd", dGam)
        + np.einsum("...ace,...edb->...abcd", Gam, Gam)
        - np.einsum("...ade,...ecb->...abcd", Gam, Gam)
    )
    return np.einsum("...ae,...ebcd->...abcd", g, R_up)


def christoffel_fd(
    metric: Callable, p, stencil: StencilSpec = DEFAULT_STENCIL, domain: tuple | None = None
) -> np.ndarray:
    return christoffel_from(metric(np.asarray(p, dtype=float)), field_derivative(metric, p, stencil, domain))


def riemann_fd(
    metric: Callable, p, stencil: StencilSpec = DEFAULT_STENCIL, domain: tuple | None = None
) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    return riemann_from(
        metric(p),
        field_derivative(metric, p, stencil, domain),
        field_hessian(metric, p, stencil, domain),
    )


def to_frame(T: np.ndarray, E: np.ndarray) -> np.ndarray:
    """Contract every covariant index of ``T`` with frame columns ``E[..., a, i]``."""
    k = T.ndim - E.ndim + 2
    letters = "abcdefgh"[:k]
    out = "ijklmnop"[:k]
    subscripts = "..." + letters + "," + ",".join("..." + letters[m] + out[m] for m in range(k)) + "->..." + out
    return np.einsum(subscripts, T, *([E] * k))


def normalized_scalar_curvature(R_frame: np.ndarray) -> np.ndarray:
    """``kappa = sum_{ij} R_ijij / (n (n - 1))`` from orthonormal-frame components."""
    n = R_frame.shape[-1]
    return np.einsum("...ijij->...", R_frame) / (n * (n - 1))
