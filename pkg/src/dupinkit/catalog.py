"""Constructors for the standard spacelike Dupin examples and the two-curvature classifier.

Charts
------
* ``H^m(-r)`` (the hyperboloid ``<v,v> = -r^2``, ``v_0 > 0``): for ``m = 1``
  ``(r cosh s, r sinh s)``; for ``m >= 2`` hyperbolic-polar
  ``(r cosh rho, r sinh rho * omega)`` with ``omega`` on the unit sphere.
* ``S^k(r)``: hyperspherical angles, all kept in ``(0.5, 2.6)`` away from the poles.

Every factor puts its timelike coordinate first; in the anti-de Sitter products
both timelike coordinates are moved to the front of the ambient vector.

Catalog ids look like ``"cyl:a=2,k=1,n=3"``; values may be written ``sqrt(2)``.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import jets as J
from .conformal import conformal_frame, conformal_tensors, light_cone_signature
from .errors import NotApplicableError, ParameterError
from .hypersurface import CLUSTER_TOL, Immersion, SpaceForm, local_geometry, moebius_table
from .indefinite import cluster_groups, inner_product

HYPERBOLIC_ANGLE = (-0.6, 0.6)
RADIAL = (0.2, 1.0)
ANGLE = (0.5, 2.6)
FLAT = (-1.0, 1.0)
CONE_T = (0.4, 2.2)


def unit_sphere(angles: list) -> list:
    """Hyperspherical embedding of ``k`` angles into ``k+1`` components."""
    comps, prod = [], 1.0
    for th in angles:
        comps.append(prod * J.cos(th))
        prod = prod * J.sin(th)
    comps.append(prod)
    return comps


def hyperboloid_factor(coords: list, radius: float) -> list:
    if len(coords) == 1:
        s = coords[0]
        return [radius * J.cosh(s), radius * J.sinh(s)]
    rho = coords[0]
    sh = radius * J.sinh(rho)
    return [radius * J.cosh(rho)] + [sh * w for w in unit_sphere(coords[1:])]


def sphere_factor(coords: list, radius: float) -> list:
    return [radius * w for w in unit_sphere(coords)]


def hyperboloid_box(m: int) -> list[tuple[float, float]]:
    return [HYPERBOLIC_ANGLE] if m == 1 else [RADIAL] + [ANGLE] * (m - 1)


def hyperboloid(k: int, a: float) -> Immersion:
    """Umbilic ``H^k(-a)`` in R^{k+1}_1 (a base for cylinders; no conformal invariants)."""
    if not (k >= 1 and a > 0):
        raise ParameterError("need k >= 1 and a > 0")
    lo, hi = zip(*hyperboloid_box(k))
    return Immersion(k, SpaceForm(0, k), lo, hi, lambda u: hyperboloid_factor(list(u), a), f"H^{k}(-{a:g})")


def spectrum_deviation(computed, expected) -> float:
    """Max deviation of two principal spectra, allowing for the opposite orientation."""
    c = np.sort(np.asarray(computed, dtype=float))
    e = np.sort(np.asarray(expected, dtype=float))
    return float(min(np.max(np.abs(c - e)), np.max(np.abs(c - np.sort(-e)))))


def expand(pairs) -> np.ndarray:
    """``[(value, multiplicity), ...]`` to a flat ascending array."""
    return np.sort(np.concatenate([[v] * m for v, m in pairs]))


def product_hypersurface(c: int, k: int, a: float, n: int) -> Immersion:
    """Isoparametric product hypersurface with two principal curvatures.

    * ``c = 0``:  ``H^k(-a) x R^{n-k}`` in R^{n+1}_1
    * ``c = 1``:  ``S^k(sqrt(1+a^2)) x H^{n-k}(-a)`` in S^{n+1}_1, chart ``(H coords, S coords)``
    * ``c = -1``: ``H^k(-a) x H^{n-k}(-sqrt(1-a^2))`` in H^{n+1}_1
    """
    if c not in (-1, 0, 1):
        raise ParameterError("c must be -1, 0 or 1")
    if not (1 <= k <= n - 1):
        raise ParameterError("need 1 <= k <= n-1 (otherwise the hypersurface is umbilic)")
    if not a > 0 or (c == -1 and not a < 1):
        raise ParameterError("radius out of range" + (" (need 0 < a < 1)" if c == -1 else " (need a > 0)"))
    if c == 0:
        box = hyperboloid_box(k) + [FLAT] * (n - k)

        def map_(u):
            return hyperboloid_factor(u[:k], a) + list(u[k:])

        label = f"H^{k}(-{a:g}) x R^{n - k}"
    elif c == 1:
        r = math.sqrt(1 + a * a)
        box = hyperboloid_box(n - k) + [ANGLE] * k

        def map_(u):
            return hyperboloid_factor(u[: n - k], a) + sphere_factor(u[n - k :], r)

        label = f"S^{k}({r:g}) x H^{n - k}(-{a:g})"
    else:
        r = math.sqrt(1 - a * a)
        box = hyperboloid_box(k) + hyperboloid_box(n - k)

        def map_(u):
            v = hyperboloid_factor(u[:k], a)
            w = hyperboloid_factor(u[k:], r)
            return [v[0], w[0]] + v[1:] + w[1:]

        label = f"H^{k}(-{a:g}) x H^{n - k}(-{r:g})"
    lo, hi = zip(*box)
    return Immersion(n, SpaceForm(c, n), lo, hi, map_, label)


def product_curvatures(c: int, k: int, a: float, n: int) -> list[tuple[float, int]]:
    """Principal curvatures (value, multiplicity) for the normal pointing along the position."""
    if c == 0:
        pairs = [(-1 / a, k), (0.0, n - k)]
    elif c == 1:
        r = math.sqrt(1 + a * a)
        pairs = [(-a / r, k), (-r / a, n - k)]
    else:
        r = math.sqrt(1 - a * a)
        pairs = [(-r / a, k), (a / r, n - k)]
    return sorted(pairs)


def cylinder_over(u: Immersion, n: int, flat: tuple = FLAT) -> Immersion:
    """``(p, y) -> (u(p), y)`` for ``u`` into R^{k+1}_1."""
    if u.space_form.c != 0:
        raise ParameterError("cylinder needs a hypersurface of Minkowski space")
    if n <= u.n:
        raise ParameterError("cylinder dimension must exceed that of the base")
    k = u.n

    def map_(q):
        return list(u.map(q[:k])) + list(q[k:])

    lo = tuple(u.lo) + (flat[0],) * (n - k)
    hi = tuple(u.hi) + (flat[1],) * (n - k)
    return Immersion(n, SpaceForm(0, n), lo, hi, map_, f"cylinder over {u.label}")


def cone_over(u: Immersion, n: int | None = None, t_range: tuple = CONE_T, flat: tuple = FLAT) -> Immersion:
    """``(p, t, y) -> (t u(p), y)`` for ``u`` into S^{k+1}_1."""
    if u.space_form.c != 1:
        raise ParameterError("cone needs a hypersurface of de Sitter space")
    if not t_range[0] > 0:
        raise ParameterError("cone parameter t must stay positive")
    k = u.n
    n = k + 1 if n is None else n
    if n < k + 1:
        raise ParameterError("cone dimension must exceed that of the base")

    def map_(q):
        t = q[k]
        return [t * comp for comp in u.map(q[:k])] + list(q[k + 1 :])

    lo = tuple(u.lo) + (t_range[0],) + (flat[0],) * (n - k - 1)
    hi = tuple(u.hi) + (t_range[1],) + (flat[1],) * (n - k - 1)
    return Immersion(n, SpaceForm(0, n), lo, hi, map_, f"cone over {u.label}")


def three_curvature_construction(m1: int, m2: int, m3: int, a: float = 0.8) -> Immersion:
    """Cylinder over the cone over ``S^{m1} x H^{m2}``: three clusters of multiplicities ``m1, m2, m3``."""
    if min(m1, m2, m3) < 1:
        raise ParameterError("multiplicities must be positive")
    u = product_hypersurface(1, m1, a, m1 + m2)
    x = cone_over(u)
    return x if m3 == 1 else cylinder_over(x, m1 + m2 + m3)


def warped_map(p: int, q: int, a: float, n: int) -> Callable:
    """Direct chart map ``(u', u'', t, y) -> (t u', t u'', y)`` with ``u'`` in H^q(-b), ``u''`` in S^p(a)."""
    b = math.sqrt(a * a - 1)

    def map_(u):
        t = u[p + q]
        hyp = hyperboloid_factor(u[:q], b)
        sph = sphere_factor(u[q : p + q], a)
        return [t * c for c in hyp] + [t * c for c in sph] + list(u[p + q + 1 :])

    return map_


@dataclass(frozen=True)
class CatalogEntry:
    id: str
    family: str
    params: dict
    immersion: Immersion
    expected: dict = field(default_factory=dict)
    notes: tuple = ()
    control: bool = False

    @property
    def n(self) -> int:
        return self.immersion.n

    def expected_curvatures(self, p) -> list[tuple[float, int]] | None:
        """Expected principal clusters at chart point ``p`` (cone entries scale with ``1/t``)."""
        pairs = self.expected.get("curvatures")
        if pairs is None:
            return None
        t_axis = self.expected.get("t_axis")
        scale = 1.0 if t_axis is None else 1.0 / float(np.asarray(p)[t_axis])
        return [(v * scale, m) for v, m in pairs]


def _expected_from_curvatures(pairs: list[tuple[float, int]], n: int) -> dict:
    lams = np.concatenate([[v] * m for v, m in pairs])
    H = float(np.mean(lams))
    e2 = n / (n - 1) * (float(np.sum(lams**2)) - n * H * H)
    b = (lams - H) / math.sqrt(e2)
    values = [v for v, _ in pairs]
    return {
        "curvatures": pairs,
        "H": H,
        "e2tau": e2,
        "b": [float(x) for x in b],
        "moebius": {key: float(val) for key, val in moebius_table(values).items()} if len(values) >= 3 else {},
    }


def two_curvature_closed_form(n: int, k: int) -> float:
    """Magnitude of the conformal principal curvature of a multiplicity-``k`` cluster."""
    return math.sqrt((n - 1) * (n - k) / k) / n


WARPED_NOTE = (
    "c^2 discrepancy: the closed form c^2 = [p(n-p)b^4 - 2pq a^2 b^2 + q(n-q)a^4]/(n-1) "
    "equals a^2 b^2 t^2 e^(2tau), not t^2 e^(2tau); conformal principal curvatures here use "
    "e^(2tau) = n/(n-1)(|II|^2 - nH^2), for which sum b_i^2 = (n-1)/n"
)


def warped_example(p: int, q: int, a: float, n: int) -> CatalogEntry:
    """Cylinder over the cone over ``H^q(-b) x S^p(a)``, ``b = sqrt(a^2-1)``: three constant b's."""
    if not a > 1:
        raise ParameterError("need a > 1")
    if not (p >= 1 and q >= 1 and p + q < n):
        raise ParameterError("need p, q >= 1 and p + q < n")
    b = math.sqrt(a * a - 1)
    u = product_hypersurface(1, p, b, p + q)
    x = cone_over(u)
    if n > p + q + 1:
        x = cylinder_over(x, n)
    pairs = sorted([(-a / b, q), (-b / a, p), (0.0, n - p - q)])
    exp = _expected_from_curvatures(pairs, n)
    exp["t_axis"] = p + q
    exp["H_formula"] = -(p * b * b + q * a * a) / (n * a * b)  # at t = 1
    closed = (p * (n - p) * b**4 - 2 * p * q * a * a * b * b + q * (n - q) * a**4) / (n - 1)
    exp["closed_form_c2"] = closed
    exp["c2_from_metric"] = exp["e2tau"] * a * a * b * b
    entry_id = f"ex34:p={p},q={q},a={_fmt(a)},n={n}"
    return CatalogEntry(entry_id, "ex34", {"p": p, "q": q, "a": a, "n": n}, x, exp, (WARPED_NOTE,))


def perturbed_graph(eps: float = 0.1, n: int = 3) -> Immersion:
    """Graph ``u -> (eps exp(-|u|^2), u)`` in R^{n+1}_1: rotational, not Dupin."""
    if not 0 < eps < 0.5:
        raise ParameterError("need 0 < eps < 0.5 to stay spacelike")

    def map_(u):
        r2 = sum(c * c for c in u)
        return [eps * J.exp(-r2)] + list(u)

    return Immersion(n, SpaceForm(0, n), (0.3,) * n, (0.9,) * n, map_, f"graph eps={eps:g}")


def _fmt(v: float) -> str:
    for base in (2, 3, 5):
        if abs(v - math.sqrt(base)) < 1e-12:
            return f"sqrt({base})"
    return f"{v:g}"


_NUM = re.compile(r"^\s*(?:sqrt\(([^)]+)\)|([-+0-9.eE]+))\s*$")


def parse_value(text: str) -> float:
    m = _NUM.match(text)
    if not m:
        raise ParameterError(f"cannot parse parameter value {text!r}")
    try:
        return math.sqrt(float(m.group(1))) if m.group(1) is not None else float(m.group(2))
    except ValueError as exc:
        raise ParameterError(f"cannot parse parameter value {text!r}") from exc


def parse_id(entry_id: str) -> tuple[str, dict]:
    family, sep, rest = entry_id.partition(":")
    if not sep or not family:
        raise ParameterError(f"malformed surface id {entry_id!r}")
    params = {}
    for item in filter(None, rest.split(",")):
        key, eq, val = item.partition("=")
        if not eq:
            raise ParameterError(f"malformed parameter {item!r}")
        params[key.strip()] = parse_value(val)
    return family.strip(), params


def _as_int(params: dict, key: str) -> int:
    try:
        v = params[key]
    except KeyError as exc:
        raise ParameterError(f"missing parameter {key!r}") from exc
    if v != int(v):
        raise ParameterError(f"parameter {key!r} must be an integer")
    return int(v)


def _need(params: dict, *keys: str) -> None:
    missing = [k for k in keys if k not in params]
    extra = set(params) - set(keys)
    if missing or extra:
        raise ParameterError(f"expected parameters {keys}, got {tuple(params)}")


def _product_entry(c: int, family: str):
    def build(entry_id: str, params: dict) -> CatalogEntry:
        _need(params, "k", "a", "n")
        k, n, a = _as_int(params, "k"), _as_int(params, "n"), params["a"]
        imm = product_hypersurface(c, k, a, n)
        exp = _expected_from_curvatures(product_curvatures(c, k, a, n), n)
        return CatalogEntry(entry_id, family, {"c": c, "k": k, "a": a, "n": n}, imm, exp)

    return build


def _warped_entry(entry_id: str, params: dict) -> CatalogEntry:
    _need(params, "p", "q", "a", "n")
    e = warped_example(_as_int(params, "p"), _as_int(params, "q"), params["a"], _as_int(params, "n"))
    return CatalogEntry(entry_id, e.family, e.params, e.immersion, e.expected, e.notes)


def _graph_entry(entry_id: str, params: dict) -> CatalogEntry:
    _need(params, "eps", "n")
    imm = perturbed_graph(params["eps"], _as_int(params, "n"))
    return CatalogEntry(entry_id, "graph", dict(params), imm, {}, ("non-Dupin control",), control=True)


BUILDERS: dict[str, Callable[[str, dict], CatalogEntry]] = {
    "cyl": _product_entry(0, "cyl"),
    "prod-ds": _product_entry(1, "prod-ds"),
    "prod-ads": _product_entry(-1, "prod-ads"),
    "ex34": _warped_entry,
    "graph": _graph_entry,
}

CATALOG_IDS = (
    "cyl:a=2,k=1,n=3",
    "prod-ds:k=1,a=1,n=3",
    "prod-ads:k=1,a=0.6,n=3",
    "ex34:p=1,q=1,a=sqrt(2),n=4",
)
CONTROL_IDS = ("graph:eps=0.1,n=3",)


def build(entry_id: str) -> CatalogEntry:
    family, params = parse_id(entry_id)
    try:
        builder = BUILDERS[family]
    except KeyError as exc:
        raise ParameterError(f"unknown surface family {family!r}") from exc
    return builder(entry_id, params)


def catalog(include_controls: bool = False) -> list[CatalogEntry]:
    ids = CATALOG_IDS + (CONTROL_IDS if include_controls else ())
    return [build(i) for i in ids]


@dataclass(frozen=True)
class ClassificationResult:
    """Fit ``A = mu B + lambda_hat g`` for a two-curvature Dupin hypersurface.

    ``e_norm`` is ``mu^2 - 2 lambda_hat``.  ``e_inner`` is ``<e, e>`` measured
    from the frame for the constant vector ``e = N - lambda_hat Y - mu xi``;
    since ``xi`` is timelike it equals ``-mu^2 - 2 lambda_hat`` and decides ``case``.
    """

    mu: float
    lambda_hat: float
    e_norm: float
    e_inner: float
    case: str
    fit_residual: float
    multiplicities: tuple[int, int]
    b_values: tuple[float, float]
    b_closed_form: tuple[float, float]
    b_residual: float
    e_spread: float
    notes: tuple = ()


CASES = {
    "lightlike": "flat cylinder family H^k x R^(n-k) in R^(n+1)_1",
    "spacelike": "product family in H^(n+1)_1",
    "timelike": "product family in S^(n+1)_1",
}


def classify_two_curvature(
    imm: Immersion, samples, tol: float = 1e-7, cluster_tol: float = CLUSTER_TOL, causal_tol: float = 1e-8
) -> ClassificationResult:
    samples = np.atleast_2d(np.asarray(samples, dtype=float))
    n = imm.n
    ct = conformal_tensors(imm, samples)
    groups = [cluster_groups(l, cluster_tol) for l in ct.lams]
    if any(len(g) != 2 for g in groups):
        raise NotApplicableError("classification needs exactly two principal curvatures at every sample")
    g0 = groups[0]
    mult = (len(g0[0]), len(g0[1]))
    diagA = np.einsum("sii->si", ct.A)
    a_m = np.stack([diagA[:, g].mean(axis=1) for g in g0], axis=1)
    b_m = np.stack([ct.b[:, g].mean(axis=1) for g in g0], axis=1)
    mu_s = (a_m[:, 0] - a_m[:, 1]) / (b_m[:, 0] - b_m[:, 1])
    lam_s = np.trace(ct.A, axis1=1, axis2=2) / n
    mu, lam_hat = float(mu_s.mean()), float(lam_s.mean())
    eye = np.eye(n)
    fit = float(np.max(np.abs(ct.A - mu * ct.B - lam_hat * eye)))
    closed = tuple(two_curvature_closed_form(n, m) for m in mult)
    b_vals = tuple(float(v) for v in b_m.mean(axis=0))
    b_res = float(max(np.max(np.abs(np.abs(b_m[:, i]) - closed[i])) for i in range(2)))
    notes = []
    if np.any(np.sign(b_m[:, 0]) == np.sign(b_m[:, 1])):
        notes.append("conformal principal curvatures do not have opposite signs")
        b_res = float("inf")
    if fit > tol:
        notes.append(f"A - mu B - lambda_hat g residual {fit:.3g} exceeds {tol:g}")

    frame = conformal_frame(imm, samples)
    e_vec = frame.N - lam_hat * frame.Y - mu * frame.xi
    sig = light_cone_signature(n)
    e_inner = float(np.mean(inner_product(sig, e_vec, e_vec)))
    spread = float(np.max(np.abs(e_vec - e_vec[0])))
    if abs(e_inner) < causal_tol:
        case = "lightlike"
    else:
        case = "spacelike" if e_inner > 0 else "timelike"
    return ClassificationResult(
        mu, lam_hat, mu * mu - 2 * lam_hat, e_inner, case, fit, mult, b_vals, closed, b_res, spread, tuple(notes)
    )


def principal_pattern(imm: Immersion, p, cluster_tol: float = CLUSTER_TOL) -> tuple[int, ...]:
    lams = local_geometry(imm, np.asarray(p, dtype=float)).lams
    return tuple(len(g) for g in cluster_groups(lams, cluster_tol))
