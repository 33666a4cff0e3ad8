"""Second-order jets of chart maps and finite-difference derivatives of fields.

Immersion maps are plain Python callables ``map(u) -> sequence`` where ``u`` is a
sequence of ``n`` chart coordinates.  They are written with the elementary
functions exported here (``sin``, ``cosh``, ``sqrt``...), which accept numpy arrays
as well as :class:`Jet` objects, so the same map serves value evaluation and
exact differentiation.

Everything is batched: chart points carry arbitrary leading axes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import ContractError, DomainError


class Jet:
    """Truncated second-order Taylor expansion of a scalar in ``n`` variables.

    ``val`` has the batch shape ``B``; ``grad`` is ``B + (n,)`` and ``hess`` is
    ``B + (n, n)``.
    """

    __slots__ = ("val", "grad", "hess")
    __array_ufunc__ = None  # make numpy defer to the reflected operators

    def __init__(self, val, grad, hess):
        self.val = val
        self.grad = grad
        self.hess = hess

    @property
    def nvars(self) -> int:
        return self.grad.shape[-1]

    def _lift(self, other) -> Jet:
        if isinstance(other, Jet):
            return other
        other = np.asarray(other, dtype=float)
        shape = np.broadcast_shapes(other.shape, np.shape(self.val))
        n = self.nvars
        return Jet(np.broadcast_to(other, shape), np.zeros(shape + (n,)), np.zeros(shape + (n, n)))

    def __neg__(self) -> Jet:
        return Jet(-self.val, -self.grad, -self.hess)

    def __pos__(self) -> Jet:
        return self

    def __add__(self, other) -> Jet:
        if isinstance(other, Jet):
            return Jet(self.val + other.val, self.grad + other.grad, self.hess + other.hess)
        other = np.asarray(other, dtype=float)
        shape = np.broadcast_shapes(other.shape, np.shape(self.val))
        n = self.nvars
        return Jet(
            self.val + other,
            np.broadcast_to(self.grad, shape + (n,)),
            np.broadcast_to(self.hess, shape + (n, n)),
        )

    __radd__ = __add__

    def __sub__(self, other) -> Jet:
        return self + (-other)

    def __rsub__(self, other) -> Jet:
        return (-self) + other

    def __mul__(self, other) -> Jet:
        if not isinstance(other, Jet):
            c = np.asarray(other, dtype=float)
            return Jet(self.val * c, self.grad * c[..., None], self.hess * c[..., None, None])
        a, b = self, other
        ag, bg = a.grad, b.grad
        outer = ag[..., :, None] * bg[..., None, :]
        return Jet(
            a.val * b.val,
            a.val[..., None] * bg + b.val[..., None] * ag,
            a.val[..., None, None] * b.hess
            + b.val[..., None, None] * a.hess
            + outer
            + np.swapaxes(outer, -1, -2),
        )

    __rmul__ = __mul__

    def __truediv__(self, other) -> Jet:
        if not isinstance(other, Jet):
            return self * (1.0 / np.asarray(other, dtype=float))
        return self * other.reciprocal()

    def __rtruediv__(self, other) -> Jet:
        return self.reciprocal() * other

    def __pow__(self, power) -> Jet:
        if isinstance(power, Jet):
            return exp(log(self) * power)
        p = float(power)
        if p == 2.0:
            return self * self
        v = self.val
        return self._apply(v**p, p * v ** (p - 1), p * (p - 1) * v ** (p - 2))

    def reciprocal(self) -> Jet:
        v = self.val
        inv = 1.0 / v
        return self._apply(inv, -inv * inv, 2.0 * inv * inv * inv)

    def _apply(self, f, df, d2f) -> Jet:
        g = self.grad
        return Jet(
            f,
            df[..., None] * g,
            df[..., None, None] * self.hess + d2f[..., None, None] * g[..., :, None] * g[..., None, :],
        )

    def __repr__(self) -> str:
        return f"Jet(val={self.val!r}, grad={self.grad!r}, hess={self.hess!r})"


def _unary(f: Callable, df: Callable, d2f: Callable):
    def op(x):
        if isinstance(x, Jet):
            v = x.val
            return x._apply(f(v), df(v), d2f(v))
        return f(x)

    return op


sin = _unary(np.sin, np.cos, lambda v: -np.sin(v))
cos = _unary(np.cos, lambda v: -np.sin(v), lambda v: -np.cos(v))
exp = _unary(np.exp, np.exp, np.exp)
log = _unary(np.log, lambda v: 1.0 / v, lambda v: -1.0 / (v * v))
sqrt = _unary(np.sqrt, lambda v: 0.5 / np.sqrt(v), lambda v: -0.25 / (v * np.sqrt(v)))
cosh = _unary(np.cosh, np.sinh, np.cosh)
sinh = _unary(np.sinh, np.cosh, np.sinh)


def seed(p) -> list[Jet]:
    """Independent-variable jets for chart point(s) ``p`` of shape ``(..., n)``."""
    p = np.asarray(p, dtype=float)
    n = p.shape[-1]
    batch = p.shape[:-1]
    eye = np.eye(n)
    zeros = np.zeros(batch + (n, n))
    return [Jet(p[..., a], np.broadcast_to(eye[a], batch + (n,)), zeros) for a in range(n)]


@dataclass(frozen=True)
class Jet2:
    """Value, jacobian ``(..., D, n)`` and hessian ``(..., n, n, D)`` of a vector map."""

    value: np.ndarray
    jacobian: np.ndarray
    hessian: np.ndarray

    def components(self) -> list[Jet]:
        """Split into per-component scalar jets (for composing maps)."""
        return [
            Jet(self.value[..., k], self.jacobian[..., k, :], self.hessian[..., k])
            for k in range(self.value.shape[-1])
        ]


def stack_jets(comps: Sequence, n: int, batch: tuple) -> Jet2:
    vals, grads, hessians = [], [], []
    for comp in comps:
        if isinstance(comp, Jet):
            vals.append(np.broadcast_to(comp.val, batch))
            grads.append(np.broadcast_to(comp.grad, batch + (n,)))
            hessians.append(np.broadcast_to(comp.hess, batch + (n, n)))
        else:
            vals.append(np.broadcast_to(np.asarray(comp, dtype=float), batch))
            grads.append(np.zeros(batch + (n,)))
            hessians.append(np.zeros(batch + (n, n)))
    return Jet2(
        np.stack(vals, axis=-1),
        np.stack(grads, axis=-2),
        np.stack(hessians, axis=-1),
    )


def jet_eval(map_: Callable, p, domain: tuple | None = None) -> Jet2:
    """Exact value, first and second partials of ``map_`` at chart point(s) ``p``.

    ``domain`` is an optional ``(lo, hi)`` open box; points outside raise
    :class:`DomainError`.
    """
    p = np.asarray(p, dtype=float)
    if domain is not None:
        check_domain(p, domain)
    comps = map_(seed(p))
    return stack_jets(comps, p.shape[-1], p.shape[:-1])


def check_domain(p, domain: tuple) -> None:
    lo, hi = (np.asarray(b, dtype=float) for b in domain)
    p = np.asarray(p, dtype=float)
    if not (np.all(p > lo) and np.all(p < hi)):
        raise DomainError("chart point outside the chart domain")


# Central first-derivative stencils: offsets and weights (divide by step).
_STENCILS = {
    2: (np.array([-1.0, 1.0]), np.array([-0.5, 0.5])),
    4: (np.array([-2.0, -1.0, 1.0, 2.0]), np.array([1.0, -8.0, 8.0, -1.0]) / 12.0),
}


@dataclass(frozen=True)
class StencilSpec:
    step: float = 1e-3
    order: int = 4

    def __post_init__(self) -> None:
        if not self.step > 0:
            raise ContractError("stencil step must be positive")
        if self.order not in _STENCILS:
            raise ContractError(f"unsupported stencil order {self.order}")

    @property
    def reach(self) -> float:
        return float(np.max(np.abs(_STENCILS[self.order][0]))) * self.step


DEFAULT_STENCIL = StencilSpec()


def field_derivative(
    field: Callable, p, stencil: StencilSpec = DEFAULT_STENCIL, domain: tuple | None = None
) -> np.ndarray:
    """Central-difference first partials of a batched field.

    ``field`` maps chart points ``(..., n)`` to tensors ``(..., *T)``; the result
    has shape ``(..., *T, n)`` with the derivative index last.  Fields may
    themselves call ``field_derivative`` (nesting yields higher derivatives).
    """
    p = np.asarray(p, dtype=float)
    n = p.shape[-1]
    offsets, weights = _STENCILS[stencil.order]
    h = stencil.step
    disp = np.eye(n)[:, None, :] * (offsets[None, :, None] * h)  # (n, m, n)
    nodes = p[..., None, None, :] + disp
    if domain is not None:
        check_domain(nodes, domain)
    vals = np.asarray(field(nodes))
    batch_nd = p.ndim - 1
    tshape = vals.shape[batch_nd + 2 :]
    deriv = np.tensordot(vals, weights, axes=([batch_nd + 1], [0])) / h  # (..., n, *T)
    return np.moveaxis(deriv, batch_nd, -1) if tshape else deriv


def field_hessian(
    field: Callable, p, stencil: StencilSpec = DEFAULT_STENCIL, domain: tuple | None = None
) -> np.ndarray:
    """Second partials ``(..., *T, n, n)`` by nesting two first-derivative passes."""
    inner = lambda q: field_derivative(field, q, stencil, domain)  # noqa: E731
    H = field_derivative(inner, p, stencil, domain)
    return 0.5 * (H + np.swapaxes(H, -1, -2))
