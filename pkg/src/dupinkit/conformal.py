"""Conformal invariants of spacelike hypersurfaces via the light-cone model.

A hypersurface ``x`` in the space form of curvature ``c`` is lifted to the null
cone of R^{n+3}_2 (two timelike axes first) by

* ``c = 0``:  ``y = ((<x,x>+1)/2, x, (<x,x>-1)/2)``
* ``c = 1``:  ``y = (1, x)``
* ``c = -1``: ``y = (x, 1)``

and rescaled to the conformal position vector ``Y = e^tau y`` with
``e^{2 tau} = n/(n-1) (|II|^2 - n H^2)``, so that ``<dY, dY> = e^{2 tau} I``.

The moving frame ``{Y, N, Y_i, xi}`` used here is, with ``y_i = dy(e_i)`` and
``y_{n+1}`` the same lift applied to the timelike unit normal ``e``::

    Y_i  = tau_i y + y_i
    xi   = -H y - y_{n+1}
    -e^tau N = 1/2 (|grad tau|^2 - H^2 + c) y + sum_i tau_i y_i - H y_{n+1} + P

where ``P`` is ``(1, 0, 1)``, ``(0, -x)`` or ``(x, 0)`` for ``c = 0, 1, -1``.
Because ``e`` is timelike the ``y_{n+1}`` terms carry the opposite sign to the
Riemannian formulas; with these signs ``<dxi, Y_i>`` reproduces
``B = e^{-tau}(h - H)`` and ``N`` agrees with ``-(1/n) Lap Y - <Lap Y, Lap Y> Y / (2n^2)``.

All tensors are reported in the I-orthonormal principal frame ``e_i``
(equivalently the g-orthonormal frame ``E_i = e^{-tau} e_i``).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import UmbilicError
from .hypersurface import CLUSTER_TOL, CurvatureData, Immersion, SpaceForm, local_geometry
from .indefinite import Signature, cluster_groups, inner_product
from .jets import DEFAULT_STENCIL, StencilSpec, field_derivative, field_hessian
from .tensors import christoffel_from, normalized_scalar_curvature, riemann_from, to_frame

UMBILIC_TOL = 1e-10


def light_cone_signature(n: int) -> Signature:
    return Signature(2, n + 1)


def conformal_factor(cd: CurvatureData, n: int) -> float:
    """``e^{2 tau} = n/(n-1) (|II|^2 - n H^2)``; raises at umbilic points."""
    norm2 = cd.norm2
    e2 = n / (n - 1) * (norm2 - n * cd.H**2)
    if e2 < UMBILIC_TOL * (1.0 + norm2):
        raise UmbilicError("umbilic point: the conformal metric degenerates")
    return float(e2)


def _c_of(space_form) -> int:
    return space_form.c if isinstance(space_form, SpaceForm) else int(space_form)


def sigma_lift(space_form, x) -> np.ndarray:
    """Null lift of ambient point(s) ``x`` into R^{n+3}_2."""
    c = _c_of(space_form)
    x = np.asarray(x, dtype=float)
    one = np.ones(x.shape[:-1] + (1,))
    if c == 0:
        q = inner_product(Signature(1, x.shape[-1] - 1), x, x)
        q = np.asarray(q)[..., None]
        return np.concatenate([(q + 1) / 2, x, (q - 1) / 2], axis=-1)
    if c == 1:
        return np.concatenate([one, x], axis=-1)
    return np.concatenate([x, one], axis=-1)


def lift_tangent(c: int, x: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Differential of the lift applied to ambient vector(s) ``v`` at ``x``."""
    if c == 0:
        xv = np.asarray(inner_product(Signature(1, x.shape[-1] - 1), x, v))[..., None]
        return np.concatenate([xv, v, xv], axis=-1)
    zero = np.zeros(v.shape[:-1] + (1,))
    if c == 1:
        return np.concatenate([zero, v], axis=-1)
    return np.concatenate([v, zero], axis=-1)


def _anchor(c: int, x: np.ndarray) -> np.ndarray:
    if c == 0:
        n_amb = x.shape[-1]
        P = np.zeros(x.shape[:-1] + (n_amb + 2,))
        P[..., 0] = P[..., -1] = 1.0
        return P
    zero = np.zeros(x.shape[:-1] + (1,))
    if c == 1:
        return np.concatenate([zero, -x], axis=-1)
    return np.concatenate([x, zero], axis=-1)


def _e2tau(lg, n: int) -> np.ndarray:
    return n / (n - 1) * (lg.norm2 - n * lg.H**2)


def _check_umbilic(lg, e2) -> None:
    if np.any(e2 < UMBILIC_TOL * (1.0 + lg.norm2)):
        raise UmbilicError("umbilic point: the conformal metric degenerates")


def tau_field(imm: Immersion):
    def f(q):
        return 0.5 * np.log(_e2tau(local_geometry(imm, q), imm.n))

    return f


def position_field(imm: Immersion):
    """Batched ``q -> Y(q)``."""

    def f(q):
        lg = local_geometry(imm, q)
        e2 = _e2tau(lg, imm.n)
        return np.sqrt(e2)[..., None] * sigma_lift(imm.space_form.c, lg.x)

    return f


@dataclass(frozen=True)
class ConformalFrame:
    tau: np.ndarray
    Y: np.ndarray
    lift_y: np.ndarray
    N: np.ndarray | None = None
    xi: np.ndarray | None = None
    Yi: np.ndarray | None = None  # (..., n, n+3): row i is Y_i

    @property
    def vectors(self) -> np.ndarray:
        """``[Y, N, Y_1..Y_n, xi]`` stacked along axis -2."""
        return np.concatenate([self.Y[..., None, :], self.N[..., None, :], self.Yi, self.xi[..., None, :]], axis=-2)

    def gram(self) -> np.ndarray:
        V = self.vectors
        sig = light_cone_signature(V.shape[-1] - 3)
        return np.einsum("...ik,...jk,k->...ij", V, V, sig.signs)


def expected_gram(n: int) -> np.ndarray:
    G = np.zeros((n + 3, n + 3))
    G[0, 1] = G[1, 0] = 1.0
    G[2 : n + 2, 2 : n + 2] = np.eye(n)
    G[-1, -1] = -1.0
    return G


def conformal_position(imm: Immersion, p) -> ConformalFrame:
    lg = local_geometry(imm, p)
    e2 = _e2tau(lg, imm.n)
    _check_umbilic(lg, e2)
    y = sigma_lift(imm.space_form.c, lg.x)
    return ConformalFrame(0.5 * np.log(e2), np.sqrt(e2)[..., None] * y, y)


def conformal_frame(imm: Immersion, p, stencil: StencilSpec = DEFAULT_STENCIL) -> ConformalFrame:
    """Full frame ``{Y, N, Y_i, xi}`` (batched); ``tau_i`` by central differences."""
    p = np.asarray(p, dtype=float)
    c = imm.space_form.c
    lg = local_geometry(imm, p)
    e2 = _e2tau(lg, imm.n)
    _check_umbilic(lg, e2)
    tau = 0.5 * np.log(e2)
    dtau = field_derivative(tau_field(imm), p, stencil, imm.domain)
    tau_i = np.einsum("...a,...ai->...i", dtau, lg.frame)
    y = sigma_lift(c, lg.x)
    tangents = np.einsum("...ka,...ai->...ik", lg.jacobian, lg.frame)  # ambient e_i
    yi = lift_tangent(c, lg.x[..., None, :], tangents)
    yn = lift_tangent(c, lg.x, lg.normal)
    H = lg.H[..., None]
    Y = np.exp(tau)[..., None] * y
    Yi = tau_i[..., None] * y[..., None, :] + yi
    xi = -H * y - yn
    alpha = 0.5 * (np.sum(tau_i**2, axis=-1) - lg.H**2 + c)[..., None]
    W = alpha * y + np.einsum("...i,...ik->...k", tau_i, yi) - H * yn + _anchor(c, lg.x)
    N = -np.exp(-tau)[..., None] * W
    return ConformalFrame(tau, Y, y, N, xi, Yi)


def laplacian_normal(imm: Immersion, p, stencil: StencilSpec = DEFAULT_STENCIL) -> np.ndarray:
    """``N = -(1/n) Lap Y - <Lap Y, Lap Y> Y / (2 n^2)`` with ``Lap`` the Laplacian of g."""
    p = np.asarray(p, dtype=float)
    n = imm.n
    Yf = position_field(imm)

    def metric(q):
        lg = local_geometry(imm, q)
        return _e2tau(lg, n)[..., None, None] * lg.I

    g = metric(p)
    Gam = christoffel_from(g, field_derivative(metric, p, stencil, imm.domain))
    dY = field_derivative(Yf, p, stencil, imm.domain)  # (..., K, n)
    d2Y = field_hessian(Yf, p, stencil, imm.domain)  # (..., K, n, n)
    ginv = np.linalg.inv(g)
    lap = np.einsum("...ab,...kab->...k", ginv, d2Y) - np.einsum("...ab,...cab,...kc->...k", ginv, Gam, dY)
    sig = light_cone_signature(n)
    Y = Yf(p)
    ll = np.asarray(inner_product(sig, lap, lap))[..., None]
    return -lap / n - ll * Y / (2 * n * n)


@dataclass(frozen=True)
class ConformalTensors:
    """Conformal invariants in the principal frame (batched over leading axes).

    ``A``, ``B`` are ``(..., n, n)``, ``C`` is ``(..., n)``; ``riemann`` and
    ``B_cov`` (``B_{ij,k}``) are frame components for the conformal metric.
    """

    c: int
    tau: np.ndarray
    H: np.ndarray
    lams: np.ndarray
    frame: np.ndarray
    h: np.ndarray
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    b: np.ndarray  # e^{-tau}(lam_i - H), ascending
    g_metric: np.ndarray
    kappa_g: np.ndarray
    riemann: np.ndarray
    B_cov: np.ndarray

    @property
    def n(self) -> int:
        return self.A.shape[-1]

    @property
    def e2tau(self) -> np.ndarray:
        return np.exp(2 * self.tau)

    def at(self, idx) -> ConformalTensors:
        """Select one sample of a batched result."""
        return ConformalTensors(
            self.c, *(np.asarray(getattr(self, f))[idx] for f in _BATCH_FIELDS)
        )

    def b_clusters(self, cluster_tol: float = CLUSTER_TOL) -> list[tuple[float, int]]:
        b = np.asarray(self.b)
        return [(float(np.mean(b[g])), len(g)) for g in cluster_groups(self.lams, cluster_tol)]


_BATCH_FIELDS = ("tau", "H", "lams", "frame", "h", "A", "B", "C", "b", "g_metric", "kappa_g", "riemann", "B_cov")


def conformal_tensors(imm: Immersion, p, stencil: StencilSpec = DEFAULT_STENCIL) -> ConformalTensors:
    """Conformal tensors A, B, C plus curvature of g and the covariant derivative of B.

    ``A_ij = e^{-2tau}[tau_i tau_j - tau_{i,j} - h_ij H + (H^2 - |grad tau|^2 + c)/2 delta_ij]``,
    ``B_ij = e^{-tau}(h_ij - H delta_ij)``,
    ``C_i = e^{-2tau}(H tau_i - H_i - sum_j h_ij tau_j)``,
    where ``tau_{i,j}`` is the Hessian of ``tau`` for ``I``.  First and second
    chart derivatives of ``tau``, ``H``, ``g = e^{2tau} I`` and of the chart
    tensor ``e^tau (II - H I)`` come from central differences of pointwise
    exact fields; the Riemann tensor of ``g`` is assembled from ``g``, ``dg``
    and ``d2g``.
    """
    p = np.asarray(p, dtype=float)
    n = imm.n
    c = imm.space_form.c
    lg = local_geometry(imm, p)
    e2 = _e2tau(lg, n)
    _check_umbilic(lg, e2)
    tau = 0.5 * np.log(e2)
    nn = n * n

    def first_fields(q):
        g_ = local_geometry(imm, q)
        e2_ = _e2tau(g_, n)
        Bc = np.sqrt(e2_)[..., None, None] * (g_.II - g_.H[..., None, None] * g_.I)
        flat = q.shape[:-1]
        return np.concatenate(
            [
                0.5 * np.log(e2_)[..., None],
                g_.H[..., None],
                (e2_[..., None, None] * g_.I).reshape(flat + (nn,)),
                Bc.reshape(flat + (nn,)),
            ],
            axis=-1,
        )

    def second_fields(q):
        g_ = local_geometry(imm, q)
        e2_ = _e2tau(g_, n)
        flat = q.shape[:-1]
        return np.concatenate(
            [0.5 * np.log(e2_)[..., None], (e2_[..., None, None] * g_.I).reshape(flat + (nn,))], axis=-1
        )

    D1 = field_derivative(first_fields, p, stencil, imm.domain)
    D2 = field_hessian(second_fields, p, stencil, imm.domain)
    batch = p.shape[:-1]
    dtau, dH = D1[..., 0, :], D1[..., 1, :]
    dg = D1[..., 2 : 2 + nn, :].reshape(batch + (n, n, n))
    dBc = D1[..., 2 + nn :, :].reshape(batch + (n, n, n))
    d2tau = D2[..., 0, :, :]
    d2g = D2[..., 1:, :, :].reshape(batch + (n, n, n, n))

    e = lg.frame
    h = np.swapaxes(e, -1, -2) @ lg.II @ e
    h = 0.5 * (h + np.swapaxes(h, -1, -2))
    H = np.trace(h, axis1=-2, axis2=-1) / n
    eye = np.eye(n)
    tau_i = np.einsum("...a,...ai->...i", dtau, e)
    H_i = np.einsum("...a,...ai->...i", dH, e)
    hess_tau = d2tau - np.einsum("...dab,...d->...ab", lg.christoffel, dtau)
    tau_ij = to_frame(hess_tau, e)
    grad2 = np.sum(tau_i**2, axis=-1)
    em2 = np.exp(-2 * tau)
    Hb = H[..., None, None]
    A = em2[..., None, None] * (
        tau_i[..., :, None] * tau_i[..., None, :]
        - tau_ij
        - h * Hb
        + 0.5 * (H**2 - grad2 + c)[..., None, None] * eye
    )
    B = np.exp(-tau)[..., None, None] * (h - Hb * eye)
    C = em2[..., None] * (H[..., None] * tau_i - H_i - np.einsum("...ij,...j->...i", h, tau_i))

    g = e2[..., None, None] * lg.I
    E = np.exp(-tau)[..., None, None] * e
    R = to_frame(riemann_from(g, dg, d2g), E)
    kappa = normalized_scalar_curvature(R)
    Gam = christoffel_from(g, dg)  # Gam[d, c, a] = Gamma^d_{ca}
    Bc = np.sqrt(e2)[..., None, None] * (lg.II - lg.H[..., None, None] * lg.I)
    cov = dBc - np.einsum("...dca,...db->...abc", Gam, Bc) - np.einsum("...dcb,...ad->...abc", Gam, Bc)
    B_cov = to_frame(cov, E)
    b = np.exp(-tau)[..., None] * (lg.lams - lg.H[..., None])
    return ConformalTensors(c, tau, H, lg.lams, e, h, A, B, C, b, g, kappa, R, B_cov)


def verify_trace_identities(ct: ConformalTensors, n: int | None = None) -> dict[str, np.ndarray]:
    """Residuals of the four trace identities (batched)."""
    n = ct.n if n is None else n
    trB = np.trace(ct.B, axis1=-2, axis2=-1)
    sumB2 = np.sum(ct.B**2, axis=(-2, -1))
    trA = np.trace(ct.A, axis1=-2, axis2=-1)
    divB = np.einsum("...ijj->...i", ct.B_cov)
    return {
        "trace_B": np.abs(trB),
        "norm_B": np.abs(sumB2 - (n - 1) / n),
        "trace_A": np.abs(trA - (n * n * ct.kappa_g - 1) / (2 * n)),
        "div_B": np.max(np.abs((1 - n) * ct.C - divB), axis=-1),
    }


def gauss_rhs(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """``B_il B_jk - B_ik B_jl + A_ik d_jl + A_jl d_ik - A_il d_jk - A_jk d_il``."""
    d = np.eye(A.shape[-1])
    return (
        np.einsum("...il,...jk->...ijkl", B, B)
        - np.einsum("...ik,...jl->...ijkl", B, B)
        + np.einsum("...ik,jl->...ijkl", A, d)
        + np.einsum("...jl,ik->...ijkl", A, d)
        - np.einsum("...il,jk->...ijkl", A, d)
        - np.einsum("...jk,il->...ijkl", A, d)
    )


def gauss_residual(ct: ConformalTensors) -> np.ndarray:
    return np.max(np.abs(ct.riemann - gauss_rhs(ct.A, ct.B)), axis=(-4, -3, -2, -1))


def covariant_derivative_B(imm: Immersion, p, stencil: StencilSpec = DEFAULT_STENCIL) -> np.ndarray:
    return conformal_tensors(imm, p, stencil).B_cov


def codazzi_residual(ct: ConformalTensors) -> np.ndarray:
    """``max |B_{ij,k} - B_{ik,j} - d_ij C_k + d_ik C_j|``."""
    d = np.eye(ct.n)
    Bc = ct.B_cov
    res = (
        Bc
        - np.swapaxes(Bc, -1, -2)
        - np.einsum("ij,...k->...ijk", d, ct.C)
        + np.einsum("ik,...j->...ijk", d, ct.C)
    )
    return np.max(np.abs(res), axis=(-3, -2, -1))


def b_symmetry_residual(ct: ConformalTensors) -> np.ndarray:
    return np.max(np.abs(ct.B_cov - np.swapaxes(ct.B_cov, -3, -2)), axis=(-3, -2, -1))


@dataclass(frozen=True)
class DupinRelation:
    """Terms of ``C_i = E_i(b_i) - e^{-tau} E_i(lambda_i)`` (batched)."""

    C: np.ndarray
    E_b: np.ndarray
    E_lam: np.ndarray  # e^{-tau} E_i(lambda_i)
    residual: np.ndarray


def dupin_conformal_relation(
    imm: Immersion,
    p,
    cluster_tol: float = CLUSTER_TOL,
    stencil: StencilSpec = DEFAULT_STENCIL,
    ct: ConformalTensors | None = None,
) -> DupinRelation:
    """Evaluate both sides of the Dupin relation in the principal frame.

    The index grouping is taken from the first sample; all samples must share
    the same multiplicity pattern.
    """
    p = np.asarray(p, dtype=float)
    n = imm.n
    if ct is None:
        ct = conformal_tensors(imm, p, stencil)
    lams0 = np.asarray(ct.lams).reshape(-1, n)
    groups = cluster_groups(lams0[0], cluster_tol)
    owner = np.empty(n, dtype=int)
    for m, g in enumerate(groups):
        owner[g] = m

    def fields(q):
        lg = local_geometry(imm, q)
        e2 = _e2tau(lg, n)
        lam_m = np.stack([np.mean(lg.lams[..., g], axis=-1) for g in groups], axis=-1)
        b_m = np.exp(-0.5 * np.log(e2))[..., None] * (lam_m - lg.H[..., None])
        return np.concatenate([lam_m, b_m], axis=-1)

    r = len(groups)
    D = field_derivative(fields, p, stencil, imm.domain)  # (..., 2r, n)
    emt = np.exp(-ct.tau)
    E = emt[..., None, None] * ct.frame  # g-orthonormal chart vectors
    dE = np.einsum("...ma,...ai->...mi", D, E)  # E_i(field_m)
    E_lam = np.take_along_axis(dE[..., :r, :], owner[None, :].reshape((1,) * (dE.ndim - 2) + (1, n)), axis=-2)[..., 0, :]
    E_b = np.take_along_axis(dE[..., r:, :], owner[None, :].reshape((1,) * (dE.ndim - 2) + (1, n)), axis=-2)[..., 0, :]
    E_lam = emt[..., None] * E_lam
    residual = np.abs(ct.C - E_b + E_lam)
    return DupinRelation(ct.C, E_b, E_lam, residual)
