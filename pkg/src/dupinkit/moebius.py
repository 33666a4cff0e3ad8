"""Action of O(n+3,2) on the projective light cone and induced maps between charts.

A transform acts on row vectors, ``X -> X T``.  Chart inverses:

* ``c = 0``:  ``x = X[1:-1] / (X_0 - X_last)``, undefined on ``X_0 = X_last``
* ``c = 1``:  ``x = X[1:] / X_0``, undefined on ``X_0 = 0``
* ``c = -1``: ``x = X[:-1] / X_last``, undefined on ``X_last = 0``
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .conformal import conformal_frame, light_cone_signature, sigma_lift
from .errors import ChartEscapeError, ContractError
from .hypersurface import CLUSTER_TOL, Immersion, SpaceForm, local_geometry, moebius_table
from .indefinite import PseudoOrthogonalTransform, cluster_groups, inner_product

CHART_TOL = 1e-9
LIGHTLIKE_TOL = 1e-10


def _normalize(X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    idx = np.argmax(np.abs(X), axis=-1)
    pivot = np.take_along_axis(X, idx[..., None], axis=-1)
    if np.any(pivot == 0):
        raise ContractError("the zero vector is not a point of the light cone")
    return X / pivot


@dataclass(frozen=True)
class ProjectiveLightPoint:
    """A null line in R^{n+3}_2, stored with its largest-magnitude component equal to +1."""

    representative: np.ndarray

    def __post_init__(self) -> None:
        rep = _normalize(self.representative)
        sig = light_cone_signature(rep.shape[-1] - 3)
        if abs(inner_product(sig, rep, rep)) > LIGHTLIKE_TOL:
            raise ContractError("representative is not lightlike")
        object.__setattr__(self, "representative", rep)

    @property
    def dim(self) -> int:
        return self.representative.shape[-1]

    @classmethod
    def lift(cls, c: int, x) -> ProjectiveLightPoint:
        return cls(sigma_lift(c, np.asarray(x, dtype=float)))


def act(T: PseudoOrthogonalTransform, pt: ProjectiveLightPoint) -> ProjectiveLightPoint:
    if T.matrix.shape[0] != pt.dim:
        raise ContractError("transform and point dimensions differ")
    return ProjectiveLightPoint(pt.representative @ T.matrix)


def _chart_denominator(X, c: int):
    if c == 0:
        return X[..., 0] - X[..., -1]
    if c == 1:
        return X[..., 0]
    if c == -1:
        return X[..., -1]
    raise ContractError("chart index must be -1, 0 or 1")


def in_chart(X: np.ndarray, c: int, threshold: float = CHART_TOL) -> np.ndarray:
    """Whether null vector(s) ``X`` avoid the boundary plane of chart ``c``."""
    return np.abs(_chart_denominator(_normalize(X), c)) > threshold


def chart_transition(pt: ProjectiveLightPoint, target_c: int) -> tuple[np.ndarray, bool]:
    """Point of the target space form represented by ``pt`` and an in-chart flag."""
    X = pt.representative
    ok = bool(in_chart(X, target_c))
    if not ok:
        return np.full(X.shape[-1] - 2, np.nan), False
    return np.array(_chart_inverse(list(X), target_c), dtype=float), True


def _chart_inverse(comps: list, c: int):
    """Chart inverse on a list of components (arrays or jets)."""
    if c == 0:
        den = comps[0] - comps[-1]
        out = [x / den for x in comps[1:-1]]
    elif c == 1:
        out = [x / comps[0] for x in comps[1:]]
    else:
        out = [x / comps[-1] for x in comps[:-1]]
    return out


def _lift_comps(comps: list, c: int) -> list:
    if c == 0:
        q = -comps[0] * comps[0]
        for x in comps[1:]:
            q = q + x * x
        return [(q + 1) * 0.5] + list(comps) + [(q - 1) * 0.5]
    if c == 1:
        return [1.0] + list(comps)
    return list(comps) + [1.0]


def _apply_rows(comps: list, M: np.ndarray) -> list:
    out = []
    for j in range(M.shape[1]):
        acc = 0.0
        for k, comp in enumerate(comps):
            w = M[k, j]
            if w != 0.0:
                acc = comp * w + acc
        out.append(acc)
    return out


@dataclass(frozen=True)
class TransformedImmersion:
    immersion: Immersion
    coverage: float
    orientation_flipped: bool


def transform_immersion(
    imm: Immersion,
    T: PseudoOrthogonalTransform,
    target_c: int | None = None,
    grid: int = 4,
    margin: float = 1e-3,
) -> TransformedImmersion:
    """Immersion ``p -> chart_inverse(sigma_c(x(p)) T)`` in the target space form.

    Chart points whose image comes within ``margin`` (on the normalised
    representative) of the target chart's boundary plane are declared invalid;
    ``coverage`` is the valid fraction of a ``grid**n`` sample.  The orientation
    is chosen so that the conformal frame transforms as ``(Y, xi) -> s (Y T, xi T)``
    for a common sign ``s``, which keeps the conformal principal curvatures invariant.
    """
    c = imm.space_form.c
    target_c = c if target_c is None else target_c
    n = imm.n
    M = np.asarray(T.matrix, dtype=float)
    if M.shape[0] != n + 3:
        raise ContractError("transform dimension does not match the immersion")

    def map_(u):
        return _chart_inverse(_apply_rows(_lift_comps(list(imm.map(u)), c), M), target_c)

    def valid(p):
        X = sigma_lift(c, imm(p)) @ M
        return in_chart(X, target_c, margin)

    samples = imm.grid(grid)
    mask = valid(samples)
    coverage = float(np.mean(mask))
    if coverage == 0.0:
        raise ChartEscapeError("transformed immersion leaves the target chart at every sample")
    base = imm.base_point if bool(valid(imm.base_point)) else samples[np.flatnonzero(mask)[0]]
    new = Immersion(
        n, SpaceForm(target_c, n), imm.lo, imm.hi, map_, f"T({imm.label})", 1, tuple(base), valid
    )
    old_frame = conformal_frame(imm, base)
    new_frame = conformal_frame(new, base)
    sY = np.sign(np.dot(new_frame.Y, old_frame.Y @ M))
    sig = light_cone_signature(n)
    s_xi = -np.sign(inner_product(sig, new_frame.xi, old_frame.xi @ M))
    flipped = bool(sY != s_xi)
    if flipped:
        new = new.with_normal_sign(-1)
    return TransformedImmersion(new, coverage, flipped)


@dataclass(frozen=True)
class InvarianceResult:
    moebius_deviation: float
    b_deviation: float
    patterns_match: bool
    surviving: int
    coverage: float
    notes: tuple = ()

    @property
    def deviation(self) -> float:
        return max(self.moebius_deviation, self.b_deviation)

    def passed(self, tol: float) -> bool:
        return self.patterns_match and self.surviving > 0 and self.deviation < tol


def _clustered(lg, cluster_tol: float):
    """Per sample: clusters ordered by conformal principal curvature."""
    out = []
    n = lg.lams.shape[-1]
    e_tau = np.sqrt(n / (n - 1) * (lg.norm2 - n * lg.H**2))
    for s in range(lg.lams.shape[0]):
        groups = cluster_groups(lg.lams[s], cluster_tol)
        lam = [float(np.mean(lg.lams[s, g])) for g in groups]
        b = [(v - lg.H[s]) / e_tau[s] for v in lam]
        order = np.argsort(b)
        out.append(([lam[i] for i in order], [b[i] for i in order], tuple(len(groups[i]) for i in order)))
    return out


def verify_moebius_invariance(
    imm: Immersion,
    T: PseudoOrthogonalTransform,
    samples,
    tol: float = 1e-6,
    target_c: int | None = None,
    cluster_tol: float = CLUSTER_TOL,
) -> InvarianceResult:
    """Compare Moebius curvatures and clustered conformal principal curvatures before and after ``T``."""
    samples = np.atleast_2d(np.asarray(samples, dtype=float))
    tr = transform_immersion(imm, T, target_c)
    new = tr.immersion
    keep = samples[np.asarray(new.valid(samples), dtype=bool)]
    if keep.shape[0] == 0:
        return InvarianceResult(float("nan"), float("nan"), False, 0, tr.coverage, ("no surviving samples",))
    before = _clustered(local_geometry(imm, keep), cluster_tol)
    after = _clustered(local_geometry(new, keep), cluster_tol)
    m_dev = b_dev = 0.0
    match = True
    for (l0, b0, k0), (l1, b1, k1) in zip(before, after):
        if k0 != k1:
            match = False
            continue
        b_dev = max(b_dev, float(np.max(np.abs(np.subtract(b0, b1)))))
        if len(l0) >= 3:
            t0, t1 = moebius_table(l0), moebius_table(l1)
            m_dev = max(m_dev, max(abs(t0[key] - t1[key]) for key in t0))
    notes = () if match else ("multiplicity patterns differ",)
    return InvarianceResult(m_dev, b_dev, match, keep.shape[0], tr.coverage, notes)
