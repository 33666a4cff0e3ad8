"""Metric geometry of spacelike hypersurfaces in the Lorentzian space forms.

Conventions
-----------
* Ambient coordinates put the timelike axes first.
* The unit normal ``e`` is timelike, ``<e, e> = -1``, and future pointing:
  ``<e, T(x)> < 0`` for the global timelike field ``T`` of the space form
  (``T = (1, 0, ..., 0)`` for ``c = 0, 1``; ``T = (-x_1, x_0, 0, ..., 0)`` on
  anti-de Sitter space, whose ambient space has two timelike axes).
* ``II_ab = <d_a d_b x, e> = -<dx, de>``.  The Lorentz cylinder
  ``(a cosh s, a sinh s, y)`` therefore has ``II = -a ds^2``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from .errors import ContractError, DegenerateError, DomainError, NotSpacelikeError, RankError
from .indefinite import EigenCluster, Signature, cluster_groups, inner_product
from .jets import DEFAULT_STENCIL, Jet2, StencilSpec, check_domain, field_derivative, jet_eval

CLUSTER_TOL = 1e-6


@dataclass(frozen=True)
class SpaceForm:
    """Lorentzian space form of curvature ``c`` and dimension ``n + 1``.

    ``c = 0`` is Minkowski space itself; ``c = 1`` (de Sitter) and ``c = -1``
    (anti-de Sitter) are realised as the quadric ``<x, x> = c`` in an ambient
    space with one extra axis.
    """

    c: int
    n: int

    def __post_init__(self) -> None:
        if self.c not in (-1, 0, 1):
            raise ContractError(f"space form curvature must be -1, 0 or 1, got {self.c}")
        if self.n < 1:
            raise ContractError("hypersurface dimension must be positive")

    @property
    def ambient_signature(self) -> Signature:
        n = self.n
        return {0: Signature(1, n), 1: Signature(1, n + 1), -1: Signature(2, n)}[self.c]

    @property
    def ambient_dim(self) -> int:
        return self.ambient_signature.dim

    def quadric_residual(self, x) -> np.ndarray | float:
        x = np.asarray(x, dtype=float)
        if self.c == 0:
            return np.zeros(x.shape[:-1]) if x.ndim > 1 else 0.0
        return inner_product(self.ambient_signature, x, x) - self.c

    def time_orientation(self, x) -> np.ndarray:
        """Timelike vector field defining the future cone at ambient point(s) ``x``."""
        x = np.asarray(x, dtype=float)
        T = np.zeros_like(x)
        if self.c == -1:
            T[..., 0] = -x[..., 1]
            T[..., 1] = x[..., 0]
        else:
            T[..., 0] = 1.0
        return T


@dataclass(frozen=True)
class Immersion:
    """Chart map ``x: (lo, hi) -> ambient`` of a spacelike hypersurface.

    ``normal_sign`` flips the orientation convention (used to carry an
    orientation through conformal transformations).  ``valid`` optionally
    restricts the usable part of the chart box.
    """

    n: int
    space_form: SpaceForm
    lo: tuple
    hi: tuple
    map: Callable = field(repr=False)
    label: str = ""
    normal_sign: int = 1
    base: tuple | None = None
    valid: Callable | None = field(default=None, repr=False)

    def __post_init__(self) -> None:
        if len(self.lo) != self.n or len(self.hi) != self.n:
            raise ContractError("chart box must have n lower and n upper bounds")
        if any(a >= b for a, b in zip(self.lo, self.hi)):
            raise ContractError("empty chart box")
        if self.space_form.n != self.n:
            raise ContractError("space form dimension does not match the immersion")

    @property
    def domain(self) -> tuple:
        return (np.asarray(self.lo, dtype=float), np.asarray(self.hi, dtype=float))

    @property
    def base_point(self) -> np.ndarray:
        if self.base is not None:
            return np.asarray(self.base, dtype=float)
        lo, hi = self.domain
        return 0.5 * (lo + hi)

    def check(self, p) -> None:
        check_domain(p, self.domain)
        if self.valid is not None and not np.all(self.valid(np.asarray(p, dtype=float))):
            raise DomainError("chart point outside the valid region of the chart")

    def jet(self, p) -> Jet2:
        self.check(p)
        return jet_eval(self.map, p)

    def __call__(self, p) -> np.ndarray:
        self.check(p)
        p = np.asarray(p, dtype=float)
        comps = self.map([p[..., a] for a in range(self.n)])
        return np.stack([np.broadcast_to(np.asarray(c, dtype=float), p.shape[:-1]) for c in comps], axis=-1)

    def grid(self, k: int, margin: float = 0.0) -> np.ndarray:
        """``k**n`` cell-centred points of the (optionally shrunk) chart box."""
        lo, hi = self.domain
        span = hi - lo
        lo, hi = lo + margin * span, hi - margin * span
        axes = [lo[a] + (hi[a] - lo[a]) * (np.arange(k) + 0.5) / k for a in range(self.n)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)

    def with_normal_sign(self, sign: int) -> Immersion:
        return replace(self, normal_sign=int(sign))


def _raw_normal(imm: Immersion, p, jet: Jet2 | None = None) -> np.ndarray:
    """Unit timelike normal up to sign, batched over leading axes of ``p``."""
    if jet is None:
        jet = imm.jet(p)
    sig = imm.space_form.ambient_signature
    rows = np.swapaxes(jet.jacobian, -1, -2)  # (..., n, D) tangent vectors
    if imm.space_form.c != 0:
        rows = np.concatenate([rows, jet.value[..., None, :]], axis=-2)
    rows = rows * sig.signs
    _, s, vh = np.linalg.svd(rows)
    if np.any(s[..., -1] <= 1e-12 * s[..., 0]):
        raise RankError("chart jacobian is rank deficient")
    e = vh[..., -1, :]
    ee = inner_product(sig, e, e)
    if np.any(np.asarray(ee) >= -1e-12):
        raise NotSpacelikeError("normal is not timelike: the hypersurface is not spacelike")
    return e / np.sqrt(-np.asarray(ee))[..., None]


def unit_normal(imm: Immersion, p, jet: Jet2 | None = None) -> np.ndarray:
    """Oriented unit timelike normal at chart point(s) ``p``."""
    if jet is None:
        jet = imm.jet(p)
    e = _raw_normal(imm, p, jet)
    sig = imm.space_form.ambient_signature
    future = imm.space_form.time_orientation(jet.value)
    flip = np.sign(-np.asarray(inner_product(sig, e, future)))
    flip = np.where(flip == 0, 1.0, flip)
    return e * (flip * imm.normal_sign)[..., None]


@dataclass(frozen=True)
class LocalGeometry:
    """Pointwise exact geometry, batched over the leading axes of ``p``."""

    p: np.ndarray
    x: np.ndarray
    jacobian: np.ndarray  # (..., D, n)
    hessian: np.ndarray  # (..., n, n, D)
    normal: np.ndarray
    I: np.ndarray
    II: np.ndarray
    chol: np.ndarray  # lower factor, I = L L^T
    shape_op: np.ndarray  # L^-1 II L^-T
    lams: np.ndarray  # ascending principal curvatures
    eigvecs: np.ndarray  # orthonormal eigenvectors of shape_op (columns)
    frame: np.ndarray  # I-orthonormal principal chart vectors (columns)
    H: np.ndarray
    norm2: np.ndarray  # |II|^2 = sum lambda^2
    signature: Signature

    @property
    def n(self) -> int:
        return self.I.shape[-1]

    @property
    def christoffel(self) -> np.ndarray:
        """Levi-Civita symbols ``G[..., d, a, b]`` of ``I`` (exact from the 2-jet)."""
        first = np.einsum("...abk,...kc,k->...cab", self.hessian, self.jacobian, self.signature.signs)
        return np.einsum("...dc,...cab->...dab", np.linalg.inv(self.I), first)


def local_geometry(imm: Immersion, p) -> LocalGeometry:
    p = np.asarray(p, dtype=float)
    jet = imm.jet(p)
    sig = imm.space_form.ambient_signature
    e = unit_normal(imm, p, jet)
    J = jet.jacobian
    I = np.einsum("...ka,...kb,k->...ab", J, J, sig.signs)
    II = np.einsum("...abk,...k,k->...ab", jet.hessian, e, sig.signs)
    try:
        L = np.linalg.cholesky(I)
    except np.linalg.LinAlgError as exc:
        raise NotSpacelikeError("induced metric is not positive definite") from exc
    Linv = np.linalg.inv(L)
    S = Linv @ II @ np.swapaxes(Linv, -1, -2)
    S = 0.5 * (S + np.swapaxes(S, -1, -2))
    lams, V = np.linalg.eigh(S)
    frame = np.swapaxes(Linv, -1, -2) @ V
    n = imm.n
    H = np.trace(S, axis1=-2, axis2=-1) / n
    norm2 = np.sum(S * S, axis=(-2, -1))
    return LocalGeometry(p, jet.value, J, jet.hessian, e, I, II, L, S, lams, V, frame, H, norm2, sig)


@dataclass(frozen=True)
class CurvatureData:
    I: np.ndarray
    II: np.ndarray
    normal: np.ndarray
    H: float | None = None
    clusters: tuple[EigenCluster, ...] = ()
    frame: np.ndarray | None = None
    lams: np.ndarray | None = None

    @property
    def n(self) -> int:
        return self.I.shape[0]

    @property
    def norm2(self) -> float:
        return float(np.sum(np.asarray(self.lams) ** 2))

    @property
    def values(self) -> list[float]:
        return [cl.value for cl in self.clusters]

    @property
    def multiplicities(self) -> tuple[int, ...]:
        return tuple(cl.multiplicity for cl in self.clusters)


def _single(p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.ndim != 1:
        raise ContractError("expected a single chart point")
    return p


def fundamental_forms(imm: Immersion, p) -> CurvatureData:
    lg = local_geometry(imm, _single(p))
    return CurvatureData(lg.I, lg.II, lg.normal)


def principal_data(imm: Immersion, p, cluster_tol: float = CLUSTER_TOL) -> CurvatureData:
    """Principal curvatures grouped into clusters, with an I-orthonormal frame.

    Cluster bases are chart vectors (columns), orthonormal for ``I``.
    """
    lg = local_geometry(imm, _single(p))
    return curvature_from_geometry(lg, cluster_tol)


def curvature_from_geometry(lg: LocalGeometry, cluster_tol: float = CLUSTER_TOL) -> CurvatureData:
    groups = cluster_groups(lg.lams, cluster_tol)
    clusters = tuple(
        EigenCluster(float(np.mean(lg.lams[g])), len(g), lg.frame[:, g].copy()) for g in groups
    )
    # Snap each eigenvalue onto its cluster mean so sums over clusters are exact.
    lams = np.concatenate([np.full(cl.multiplicity, cl.value) for cl in clusters])
    return CurvatureData(lg.I, lg.II, lg.normal, float(np.mean(lams)), clusters, lg.frame, lams)


def moebius_curvature(lams: Sequence[float], i: int, j: int, k: int) -> float:
    """``(lam_i - lam_j) / (lam_i - lam_k)``."""
    li, lj, lk = float(lams[i]), float(lams[j]), float(lams[k])
    den = li - lk
    if abs(den) <= 1e-14 * max(1.0, abs(li), abs(lk)):
        raise DegenerateError(f"lambda_{i} equals lambda_{k}")
    return (li - lj) / den


def moebius_table(values: Sequence[float]) -> dict[tuple[int, int, int], float]:
    """All defined Moebius curvatures over distinct cluster values (0-based keys)."""
    r = len(values)
    return {
        (i, j, k): moebius_curvature(values, i, j, k)
        for i in range(r)
        for j in range(r)
        for k in range(r)
        if k != i
    }


def induced_scalar_curvature(cd: CurvatureData, n: int, c: int = 0) -> float:
    """Normalised scalar curvature of ``I`` from the Gauss equation.

    ``kappa = c + (|II|^2 - n^2 H^2) / (n (n - 1))``; the ambient curvature ``c``
    enters because the space form itself is curved for ``c != 0``.
    """
    if n < 2:
        raise ContractError("scalar curvature needs n >= 2")
    return c + (cd.norm2 - n * n * cd.H**2) / (n * (n - 1))


def cluster_value_field(imm: Immersion, groups: list[list[int]]) -> Callable:
    """Batched field ``p -> (..., r)`` of cluster means for a fixed index grouping."""

    def f(q):
        lams = local_geometry(imm, q).lams
        return np.stack([np.mean(lams[..., g], axis=-1) for g in groups], axis=-1)

    return f


@dataclass
class DupinReport:
    passed: bool
    proper: bool
    max_violation: float
    violations: list[float]
    patterns: list[tuple[int, ...]]
    notes: list[str] = field(default_factory=list)


def dupin_check(
    imm: Immersion,
    points,
    cluster_tol: float = CLUSTER_TOL,
    deriv_tol: float = 1e-6,
    stencil: StencilSpec = DEFAULT_STENCIL,
) -> DupinReport:
    """Check that each principal curvature is constant along its own principal space.

    For every sample and cluster the chart gradient of the cluster value is
    contracted with the cluster's principal directions; the sample passes when
    ``|X(lam)| < deriv_tol * (1 + |lam|)``.  A changing multiplicity pattern is
    reported as "not proper" rather than raised.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    lg = local_geometry(imm, points)
    all_groups = [cluster_groups(l, cluster_tol) for l in lg.lams]
    patterns = [tuple(len(g) for g in groups) for groups in all_groups]
    if len(set(patterns)) > 1:
        return DupinReport(False, False, float("nan"), [], patterns, ["multiplicity pattern changes: not proper"])
    groups = all_groups[0]
    grads = field_derivative(cluster_value_field(imm, groups), points, stencil, imm.domain)  # (N, r, n)
    violations = []
    for s in range(points.shape[0]):
        worst = 0.0
        for m, g in enumerate(groups):
            lam = float(np.mean(lg.lams[s, g]))
            X = lg.frame[s][:, g]
            worst = max(worst, float(np.max(np.abs(grads[s, m] @ X))) / (1.0 + abs(lam)))
        violations.append(worst)
    worst = max(violations)
    return DupinReport(worst < deriv_tol, True, worst, violations, patterns)
