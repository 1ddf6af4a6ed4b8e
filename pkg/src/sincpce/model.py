"""SPDE problem definition and stochastic Galerkin assembly.

The model problem is -div(a(x,y,Theta) grad u) = f(x,y) on a rectangle
with homogeneous Dirichlet data, where the diffusion coefficient is the
affine expansion a = a0(x,y) + b0 * sum_k xi_k a_k(x,y) in uniform random
variables xi_k on [-1, 1].  Projecting the residual onto the orthonormal
chaos basis turns this into m+1 coupled deterministic elliptic equations
whose coupling coefficients come from the triple-product tensor.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import expressions as ex
from .chaos import ChaosBasis, TripleTensor
from .errors import CoercivityError, DomainError
from .expressions import Expr

__all__ = [
    "SpdeProblem",
    "CoupledSystem",
    "parse_coefficient",
    "validate_coercivity",
    "galerkin_assemble",
    "realized_coefficient",
]

# the name config/model callers use for the expression parser
parse_coefficient = ex.parse


@dataclass(frozen=True)
class SpdeProblem:
    """Rectangle domain, affine random diffusion field, deterministic forcing.

    ``domain`` is ((x_lo, x_hi), (y_lo, y_hi)).  ``coercivity_floor`` is
    populated by validate_coercivity; None means not yet certified.
    """

    domain: tuple[tuple[float, float], tuple[float, float]]
    K: int
    a0: Expr
    b0: float
    a_k: tuple[Expr, ...]
    f: Expr
    coercivity_floor: float | None = None

    def __post_init__(self):
        (xl, xh), (yl, yh) = self.domain
        if not (xl < xh and yl < yh):
            raise DomainError(f"degenerate domain {self.domain}")
        if self.K < 1:
            raise DomainError(f"need K >= 1, got {self.K}")
        if len(self.a_k) != self.K:
            raise DomainError(
                f"{len(self.a_k)} coefficient fields for K = {self.K} variables"
            )


@dataclass(frozen=True)
class CoupledSystem:
    """The (m+1)-block deterministic system from Galerkin projection.

    Equation j reads  -sum_i sum_{(c, a) in terms[j, i]} c * div(a grad u_i)
    = F_j, with F_0 = f and F_j = 0 otherwise (orthonormal basis,
    deterministic forcing).  The diagonal carries the mean-field operator
    (coefficient lambda_{ji} = delta_{ji} on the a0 term); off-diagonal
    coupling coefficients are b0 * T[k][i][j], inheriting the tensor's
    symmetry and sparsity.
    """

    problem: SpdeProblem
    basis: ChaosBasis
    terms: dict[tuple[int, int], tuple[tuple[float, Expr], ...]]

    @property
    def m_plus_1(self) -> int:
        return self.basis.size

    def laplacian_weight(self, j: int, i: int) -> float:
        """Weight of the a0 divergence term in block (j, i): delta_{ji}."""
        return 1.0 if i == j else 0.0

    def rhs_expr(self, j: int) -> Expr | None:
        """Forcing of equation j; None encodes the zero field."""
        return self.problem.f if j == 0 else None

    def block_pairs(self) -> list[tuple[int, int]]:
        """Structurally nonzero (j, i) pairs, row-major order."""
        return sorted(self.terms.keys())


def validate_coercivity(p: SpdeProblem, sample_density: int = 201) -> float:
    """Certified lower bound for a(x,y,Theta) over the parameter box.

    Evaluates a0 - |b0| * sum_k |a_k| on a dense spatial sample (the worst
    case over Theta in [-1,1]^K by the triangle inequality) and returns the
    minimum; raises CoercivityError if it is not positive.
    """
    if sample_density < 2:
        raise DomainError(f"need sample_density >= 2, got {sample_density}")
    (xl, xh), (yl, yh) = p.domain
    xs = np.linspace(xl, xh, sample_density)
    ys = np.linspace(yl, yh, sample_density)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    worst = np.asarray(ex.evaluate(p.a0, X, Y), dtype=float).copy()
    worst = np.broadcast_to(worst, X.shape).copy()
    for ak in p.a_k:
        worst -= abs(p.b0) * np.abs(ex.evaluate(ak, X, Y))
    pos = int(np.argmin(worst))
    floor = float(worst.flat[pos])
    if floor <= 0.0:
        ix, iy = np.unravel_index(pos, X.shape)
        raise CoercivityError(floor, (float(xs[ix]), float(ys[iy])))
    return floor


def certify(p: SpdeProblem, sample_density: int = 201) -> SpdeProblem:
    """Return a copy of the problem carrying its certified coercivity floor."""
    return replace(p, coercivity_floor=validate_coercivity(p, sample_density))


def galerkin_assemble(
    p: SpdeProblem, basis: ChaosBasis, tensor: TripleTensor
) -> CoupledSystem:
    """Project the SPDE onto the chaos basis.

    Block (j, i) collects the a0 term (diagonal only, weight 1) and one
    divergence-form term (b0 * T[k][i][j], a_k) per random dimension with a
    structurally nonzero tensor entry.  Blocks with no terms are absent
    from the map, which is what makes sparse assembly possible at K = 5.
    """
    if p.K != basis.K:
        raise DomainError(f"problem K = {p.K} but basis K = {basis.K}")
    if tensor.size != basis.size or tensor.K != basis.K:
        raise DomainError(
            f"tensor shaped {tensor.entries.shape} does not match basis "
            f"(K={basis.K}, size={basis.size})"
        )
    m1 = basis.size
    terms: dict[tuple[int, int], list[tuple[float, Expr]]] = {}
    for j in range(m1):
        terms[(j, j)] = [(1.0, p.a0)]
    T = tensor.entries
    for k in range(p.K):
        for i, j in zip(*np.nonzero(T[k])):
            c = p.b0 * float(T[k, i, j])
            if c != 0.0:
                terms.setdefault((int(j), int(i)), []).append((c, p.a_k[k]))
    return CoupledSystem(
        problem=p,
        basis=basis,
        terms={ji: tuple(ts) for ji, ts in terms.items()},
    )


def realized_coefficient(p: SpdeProblem, theta) -> Expr:
    """The deterministic coefficient a(x, y, theta) at a fixed parameter point.

    Returns the expression a0 + sum_k (b0 * theta_k) * a_k, folded so that
    constant coefficients stay recognizably constant.
    """
    th = np.atleast_1d(np.asarray(theta, dtype=float))
    if th.size != p.K:
        raise DomainError(f"theta has {th.size} components, problem has K={p.K}")
    if np.any(np.abs(th) > 1.0):
        raise DomainError("theta outside [-1, 1]^K")
    acc: Expr = p.a0
    for k in range(p.K):
        scale = p.b0 * float(th[k])
        if scale != 0.0:
            acc = ex.Add(acc, ex.Mul(ex.Num(scale), p.a_k[k]))
    return ex._fold(acc)
