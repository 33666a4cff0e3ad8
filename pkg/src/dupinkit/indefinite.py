"""Pseudo-Euclidean linear algebra with timelike coordinates first."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ContractError

GROUP_TOL = 1e-12


@dataclass(frozen=True)
class Signature:
    """Metric signature: the first ``negatives`` axes carry sign -1."""

    negatives: int
    positives: int

    def __post_init__(self) -> None:
        if self.negatives < 0 or self.positives < 0:
            raise ContractError(f"invalid signature {self}")

    @property
    def dim(self) -> int:
        return self.negatives + self.positives

    @property
    def signs(self) -> np.ndarray:
        return np.concatenate([-np.ones(self.negatives), np.ones(self.positives)])

    @property
    def gram(self) -> np.ndarray:
        return np.diag(self.signs)


def inner_product(sig: Signature, X, Y) -> np.ndarray | float:
    """Indefinite product ``-sum_{i<=s} x_i y_i + sum_{j>s} x_j y_j``.

    Broadcasts over leading axes; the last axis is the vector index.
    """
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if X.shape[-1] != sig.dim or Y.shape[-1] != sig.dim:
        raise ContractError(
            f"dimension mismatch: got {X.shape[-1]} and {Y.shape[-1]}, signature has {sig.dim}"
        )
    out = np.sum(X * Y * sig.signs, axis=-1)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class PseudoOrthogonalTransform:
    """Element ``T`` of O(p, q) acting on row vectors by ``X -> X @ T``."""

    matrix: np.ndarray
    signature: Signature
    check_tol: float = field(default=1e-12, repr=False, compare=False)

    def __post_init__(self) -> None:
        T = np.array(self.matrix, dtype=float)
        d = self.signature.dim
        if T.shape != (d, d):
            raise ContractError(f"matrix shape {T.shape} does not match signature dim {d}")
        G = self.signature.gram
        if np.max(np.abs(T.T @ G @ T - G)) >= self.check_tol:
            raise ContractError("matrix does not preserve the indefinite product")
        T.setflags(write=False)
        object.__setattr__(self, "matrix", T)

    @classmethod
    def identity(cls, sig: Signature) -> PseudoOrthogonalTransform:
        return cls(np.eye(sig.dim), sig)

    def apply(self, X) -> np.ndarray:
        return np.asarray(X, dtype=float) @ self.matrix

    def __matmul__(self, other: PseudoOrthogonalTransform) -> PseudoOrthogonalTransform:
        return PseudoOrthogonalTransform(self.matrix @ other.matrix, self.signature)

    def inverse(self) -> PseudoOrthogonalTransform:
        G = self.signature.gram
        return PseudoOrthogonalTransform(G @ self.matrix.T @ G, self.signature)

    def defect(self) -> float:
        G = self.signature.gram
        return float(np.max(np.abs(self.matrix.T @ G @ self.matrix - G)))


def boost(sig: Signature, i: int, j: int, rapidity: float) -> PseudoOrthogonalTransform:
    """Hyperbolic rotation in the plane of timelike axis ``i`` and spacelike axis ``j``."""
    if not (0 <= i < sig.negatives <= j < sig.dim):
        raise ContractError(f"boost needs a timelike and a spacelike axis, got ({i}, {j})")
    T = np.eye(sig.dim)
    ch, sh = np.cosh(rapidity), np.sinh(rapidity)
    T[i, i] = T[j, j] = ch
    T[i, j] = T[j, i] = sh
    return PseudoOrthogonalTransform(T, sig)


def _haar_orthogonal(rng: np.random.Generator, k: int) -> np.ndarray:
    if k == 0:
        return np.zeros((0, 0))
    Q, R = np.linalg.qr(rng.standard_normal((k, k)))
    return Q * np.sign(np.diag(R))


def random_pseudo_orthogonal(
    sig: Signature, seed: int, max_rapidity: float = 0.5
) -> PseudoOrthogonalTransform:
    """Seeded random element of O(p, q).

    Built as (block rotation) x (one boost per timelike axis) x (block rotation),
    where block rotations act separately on the timelike and spacelike blocks and
    every rapidity is uniform in ``[-max_rapidity, max_rapidity]``.
    """
    rng = np.random.default_rng(seed)
    s, d = sig.negatives, sig.dim

    def block() -> np.ndarray:
        M = np.zeros((d, d))
        M[:s, :s] = _haar_orthogonal(rng, s)
        M[s:, s:] = _haar_orthogonal(rng, d - s)
        return M

    M = block()
    if sig.positives > 0:
        for i in range(s):
            j = int(rng.integers(s, d))
            M = M @ boost(sig, i, j, rng.uniform(-max_rapidity, max_rapidity)).matrix
    M = M @ block()
    return PseudoOrthogonalTransform(M, sig)


@dataclass(frozen=True)
class EigenCluster:
    """Eigenvalue cluster: mean value, multiplicity and orthonormal basis (columns)."""

    value: float
    multiplicity: int
    basis: np.ndarray


def cluster_groups(values, cluster_tol: float = 1e-6) -> list[list[int]]:
    """Split ascending ``values`` into runs whose consecutive gaps are below tolerance."""
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        return []
    groups = [[0]]
    for idx in range(1, values.size):
        prev = values[idx - 1]
        if values[idx] - prev < cluster_tol * max(1.0, abs(prev)):
            groups[-1].append(idx)
        else:
            groups.append([idx])
    return groups


def symmetric_eigen_grouped(S, cluster_tol: float = 1e-6) -> list[EigenCluster]:
    """Eigendecomposition of a symmetric matrix with near-equal eigenvalues merged."""
    S = np.asarray(S, dtype=float)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise ContractError(f"expected a square matrix, got shape {S.shape}")
    if cluster_tol <= 0:
        raise ContractError("cluster_tol must be positive")
    if np.max(np.abs(S - S.T), initial=0.0) > 1e-10 * max(1.0, np.max(np.abs(S), initial=0.0)):
        raise ContractError("matrix is not symmetric")
    w, V = np.linalg.eigh(0.5 * (S + S.T))
    return [
        EigenCluster(float(np.mean(w[g])), len(g), V[:, g].copy())
        for g in cluster_groups(w, cluster_tol)
    ]
