"""Orthonormal Legendre polynomial chaos.

Univariate recurrences, total-degree multi-index sets, the tensor-product
multivariate basis on [-1, 1]^K with the uniform probability weight
(1/2)^K, Gauss-Legendre quadrature, the triple-product tensor, and moment
extraction from expansion coefficients.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product

import numpy as np
from numpy.polynomial.legendre import leggauss

from .errors import DomainError

__all__ = [
    "MultiIndexSet",
    "ChaosBasis",
    "QuadratureRule",
    "TripleTensor",
    "multi_index_set",
    "legendre_orthonormal",
    "gauss_legendre",
    "chaos_basis",
    "basis_eval_all",
    "gram_matrix",
    "triple_tensor",
    "triple_tensor_triplets",
    "pce_mean",
    "pce_variance",
    "pce_realize",
]

INDEX_COUNT_CAP = 10_000

# entries smaller than this (relative to slice max) are structural zeros of
# the three-term recurrence and are stored as exact zeros so block assembly
# can key off the sparsity pattern
_TENSOR_EPS = 1e-13


@dataclass(frozen=True)
class MultiIndexSet:
    """Total-degree multi-index set: all K-tuples with sum <= P, graded-lex."""

    K: int
    P: int
    indices: tuple[tuple[int, ...], ...]

    def __len__(self) -> int:
        return len(self.indices)


@dataclass(frozen=True)
class ChaosBasis:
    """Orthonormal multivariate Legendre basis Phi_i(Theta) = prod_r phi_{i_r}(xi_r).

    Orthonormal means <Phi_i, Phi_j> = delta_ij against the uniform
    probability density (1/2)^K on [-1, 1]^K.
    """

    index_set: MultiIndexSet

    @property
    def K(self) -> int:
        return self.index_set.K

    @property
    def P(self) -> int:
        return self.index_set.P

    @property
    def size(self) -> int:
        """Basis count m + 1 = (K+P)! / (K! P!)."""
        return len(self.index_set)


@dataclass(frozen=True)
class QuadratureRule:
    """Gauss-Legendre rule normalized to the uniform probability density.

    Weights sum to 1 (the density 1/2 on [-1, 1] is absorbed), and the
    q-node rule integrates polynomials of degree <= 2q-1 exactly.
    """

    nodes: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        self.nodes.setflags(write=False)
        self.weights.setflags(write=False)


@dataclass(frozen=True)
class TripleTensor:
    """T[k][i][j] = <xi_k Phi_i, Phi_j>, shape K x (m+1) x (m+1).

    Symmetric in (i, j); T[k][i][j] is nonzero only when the multi-indices
    of i and j differ in coordinate k alone, by exactly 1.
    """

    entries: np.ndarray

    def __post_init__(self):
        self.entries.setflags(write=False)

    @property
    def K(self) -> int:
        return self.entries.shape[0]

    @property
    def size(self) -> int:
        return self.entries.shape[1]


def multi_index_set(K: int, P: int, cap: int = INDEX_COUNT_CAP) -> MultiIndexSet:
    """All multi-indices of total degree <= P in K variables, graded-lex order.

    The zero tuple comes first and degree never decreases along the list.
    Rejects combinations whose count (K+P)!/(K!P!) exceeds ``cap``.
    """
    if K < 1:
        raise DomainError(f"need K >= 1, got {K}")
    if P < 0:
        raise DomainError(f"need P >= 0, got {P}")
    count = math.comb(K + P, P)
    if count > cap:
        raise DomainError(f"index count {count} exceeds cap {cap}")
    idx = [t for t in product(range(P + 1), repeat=K) if sum(t) <= P]
    idx.sort(key=lambda t: (sum(t), t))
    return MultiIndexSet(K=K, P=P, indices=tuple(idx))


def chaos_basis(K: int, P: int) -> ChaosBasis:
    return ChaosBasis(index_set=multi_index_set(K, P))


def legendre_orthonormal(degree: int, xi, allow_outside: bool = False):
    """Orthonormal Legendre value sqrt(2*degree+1) * L_degree(xi).

    Evaluated by the stable three-term recurrence
    (n+1) L_{n+1} = (2n+1) xi L_n - n L_{n-1}.  Scalar in, scalar out;
    arrays broadcast.  ``allow_outside`` lifts the [-1, 1] domain check for
    diagnostics.
    """
    if degree < 0:
        raise DomainError(f"need degree >= 0, got {degree}")
    x = np.asarray(xi, dtype=float)
    if not allow_outside and (np.any(x < -1.0) or np.any(x > 1.0)):
        raise DomainError("xi outside [-1, 1]")
    prev = np.ones_like(x)
    if degree == 0:
        out = prev
    else:
        cur = x.copy()
        for nn in range(1, degree):
            prev, cur = cur, ((2 * nn + 1) * x * cur - nn * prev) / (nn + 1)
        out = cur
    out = np.sqrt(2.0 * degree + 1.0) * out
    return float(out) if np.isscalar(xi) else out


def gauss_legendre(q: int) -> QuadratureRule:
    """q-node Gauss-Legendre rule with weights normalized to sum 1."""
    if q < 1:
        raise DomainError(f"need q >= 1, got {q}")
    nodes, weights = leggauss(q)
    return QuadratureRule(nodes=nodes, weights=weights / 2.0)


def basis_eval_all(basis: ChaosBasis, theta) -> np.ndarray:
    """Values (Phi_0(Theta), ..., Phi_m(Theta)) at one parameter point."""
    th = np.atleast_1d(np.asarray(theta, dtype=float))
    if th.size != basis.K:
        raise DomainError(f"theta has {th.size} components, basis needs {basis.K}")
    if np.any(np.abs(th) > 1.0):
        raise DomainError("theta outside [-1, 1]^K")
    # univariate values up to degree P per variable, then product per index
    uni = np.empty((basis.K, basis.P + 1))
    for r in range(basis.K):
        for d in range(basis.P + 1):
            uni[r, d] = legendre_orthonormal(d, float(th[r]))
    out = np.empty(basis.size)
    for pos, ind in enumerate(basis.index_set.indices):
        v = 1.0
        for r, d in enumerate(ind):
            v *= uni[r, d]
        out[pos] = v
    return out


def _univariate_products(P: int, q: int):
    # M0[a, b] = <phi_a phi_b>, M1[a, b] = <xi phi_a phi_b> under density 1/2
    rule = gauss_legendre(q)
    V = np.empty((P + 1, q))
    for d in range(P + 1):
        V[d] = legendre_orthonormal(d, rule.nodes)
    W = rule.weights
    M0 = np.einsum("aq,bq,q->ab", V, V, W)
    M1 = np.einsum("aq,bq,q->ab", V, V, W * rule.nodes)
    return M0, M1


def gram_matrix(basis: ChaosBasis, q: int | None = None) -> np.ndarray:
    """Gram matrix <Phi_i, Phi_j> by tensorized Gauss quadrature.

    Identity to round-off for q >= P+1; used as an orthonormality check.
    """
    q = basis.P + 1 if q is None else q
    M0, _ = _univariate_products(basis.P, q)
    idx = basis.index_set.indices
    G = np.empty((basis.size, basis.size))
    for i, a in enumerate(idx):
        for j, b in enumerate(idx):
            v = 1.0
            for r in range(basis.K):
                v *= M0[a[r], b[r]]
            G[i, j] = v
    return G


def triple_tensor(basis: ChaosBasis, q: int | None = None) -> TripleTensor:
    """The coupling tensor T[k][i][j] = <xi_k Phi_i, Phi_j>.

    Computed through the product structure of the basis: each entry factors
    into K univariate Gauss integrals (q >= P+2 nodes integrates the
    degree-(2P+1) integrands exactly), so assembly is O(K (m+1)^2 q) rather
    than O(q^K).  Entries below the structural-zero threshold are stored as
    exact zeros.
    """
    q = basis.P + 2 if q is None else q
    if q < basis.P + 2:
        raise DomainError(f"need q >= P+2 = {basis.P + 2} for exactness, got {q}")
    M0, M1 = _univariate_products(basis.P, q)
    idx = basis.index_set.indices
    m1 = basis.size
    T = np.empty((basis.K, m1, m1))
    for k in range(basis.K):
        for i, a in enumerate(idx):
            for j in range(i, m1):
                b = idx[j]
                v = 1.0
                for r in range(basis.K):
                    v *= (M1 if r == k else M0)[a[r], b[r]]
                T[k, i, j] = v
                T[k, j, i] = v
    scale = max(np.abs(T).max(), 1.0)
    T[np.abs(T) < _TENSOR_EPS * scale] = 0.0
    return TripleTensor(entries=T)


def triple_tensor_triplets(tensor: TripleTensor) -> list[tuple[int, int, int, float]]:
    """Nonzero entries as (k, i, j, value) rows for text export."""
    k, i, j = np.nonzero(tensor.entries)
    return [
        (int(kk), int(ii), int(jj), float(tensor.entries[kk, ii, jj]))
        for kk, ii, jj in zip(k, i, j)
    ]


def pce_mean(coeffs: np.ndarray) -> np.ndarray:
    """Mean field of an orthonormal expansion: the 0-th coefficient."""
    coeffs = np.asarray(coeffs)
    if coeffs.shape[0] < 1:
        raise DomainError("empty coefficient list")
    return coeffs[0]


def pce_variance(coeffs: np.ndarray) -> np.ndarray:
    """Variance field: pointwise sum of squares of coefficients 1..m."""
    coeffs = np.asarray(coeffs)
    if coeffs.shape[0] < 1:
        raise DomainError("empty coefficient list")
    if coeffs.shape[0] == 1:
        return np.zeros_like(coeffs[0])
    return np.sum(coeffs[1:] ** 2, axis=0)


def pce_realize(coeffs: np.ndarray, basis: ChaosBasis, theta) -> np.ndarray:
    """Realization sum_i u_i * Phi_i(Theta) at one parameter point."""
    coeffs = np.asarray(coeffs)
    if coeffs.shape[0] != basis.size:
        raise DomainError(
            f"{coeffs.shape[0]} coefficient fields for a basis of size {basis.size}"
        )
    phi = basis_eval_all(basis, theta)
    return np.tensordot(phi, coeffs, axes=(0, 0))
