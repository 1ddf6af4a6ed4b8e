"""Poly-Sinc collocation of the coupled deterministic system.

Each chaos coefficient field u_i is represented by its values on the tensor
Sinc grid and interpolated with the stable Lagrange basis.  Collocating the
divergence-form operators at all interior nodes and appending tau-weighted
interpolation rows at boundary points yields one tall least-squares system
for all blocks at once.

Sign convention: interior rows impose

    sum_i sum_{(c,a)} c * div(a grad u_i) = -F_j   at every grid node,

i.e. the assembled operator is +div(a grad .), so a problem written as
-div(a grad u) = F gets its forcing negated on the right-hand side.  For
the single-field helper deterministic_solve the equation is taken directly
as div(a grad u) = f (no negation), matching the classical u_xx + u_yy = f
layout.
"""
from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from . import expressions as ex
from .chaos import ChaosBasis, basis_eval_all, chaos_basis
from .errors import DomainError, SolveError
from .expressions import Expr
from .model import CoupledSystem
from .sincgrid import (
    SincGrid,
    TensorInterpolant,
    lagrange_basis_matrix,
    second_derivative_matrix,
)

__all__ = [
    "GlobalSystem",
    "PceSolution",
    "build_global_system",
    "solve_least_squares",
    "deterministic_solve",
    "DENSE_COLUMN_LIMIT",
]

# widest system the dense QR path is allowed to take; larger problems go
# through the sparse normal-equation path
DENSE_COLUMN_LIMIT = 2500

_NORMAL_EQ_RTOL = 1e-10


@dataclass(frozen=True)
class GlobalSystem:
    """Assembled least-squares system A x = rhs for all coefficient fields.

    Row layout: m+1 interior blocks of nx*ny collocation rows, then m+1
    boundary blocks of 2*(nx+ny) tau-weighted interpolation rows.  Column
    layout: unknown i at node (ix, iy) sits at i*nx*ny + ix*ny + iy.
    """

    matrix: object  # ndarray or scipy.sparse matrix
    rhs: np.ndarray
    tau: float
    grid_x: SincGrid
    grid_y: SincGrid
    m_plus_1: int

    @property
    def is_sparse(self) -> bool:
        return sp.issparse(self.matrix)

    @property
    def columns(self) -> int:
        return self.matrix.shape[1]

    @property
    def interior_rows(self) -> int:
        return self.m_plus_1 * self.grid_x.n * self.grid_y.n

    @property
    def boundary_rows(self) -> int:
        return self.m_plus_1 * 2 * (self.grid_x.n + self.grid_y.n)

    def triplets(self) -> list[tuple[int, int, float]]:
        """Nonzero entries as (row, col, value), row-major sorted."""
        if self.is_sparse:
            coo = self.matrix.tocoo()
            items = zip(coo.row.tolist(), coo.col.tolist(), coo.data.tolist())
        else:
            r, c = np.nonzero(self.matrix)
            items = zip(r.tolist(), c.tolist(), self.matrix[r, c].tolist())
        return sorted((int(r), int(c), float(v)) for r, c, v in items)


@dataclass(frozen=True)
class PceSolution:
    """Chaos coefficient fields on the Sinc grid plus solver diagnostics."""

    basis: ChaosBasis
    grid_x: SincGrid
    grid_y: SincGrid
    coeffs: np.ndarray  # (m+1, nx, ny)
    residual_norm: float
    method: str
    elapsed: float

    @property
    def m_plus_1(self) -> int:
        return self.coeffs.shape[0]

    def coeff_interpolant(self, i: int) -> TensorInterpolant:
        return TensorInterpolant((self.grid_x, self.grid_y), self.coeffs[i])

    def coeff_lattice(self, i: int, xs, ys) -> np.ndarray:
        """Coefficient field u_i evaluated on the tensor lattice xs x ys."""
        bx = lagrange_basis_matrix(self.grid_x, xs)
        by = lagrange_basis_matrix(self.grid_y, ys)
        return bx @ self.coeffs[i] @ by.T

    def mean_lattice(self, xs, ys) -> np.ndarray:
        """E[u] on the tensor lattice xs x ys (coefficient 0)."""
        return self.coeff_lattice(0, xs, ys)

    def variance_lattice(self, xs, ys) -> np.ndarray:
        """Var[u] = sum_{i>=1} u_i^2 on the lattice; nonnegative by form."""
        bx = lagrange_basis_matrix(self.grid_x, xs)
        by = lagrange_basis_matrix(self.grid_y, ys)
        out = np.zeros((len(np.atleast_1d(xs)), len(np.atleast_1d(ys))))
        for i in range(1, self.m_plus_1):
            out += (bx @ self.coeffs[i] @ by.T) ** 2
        return out

    def realize(self, theta) -> TensorInterpolant:
        """Deterministic field at a parameter point: sum_i Phi_i(theta) u_i."""
        phi = basis_eval_all(self.basis, np.asarray(theta, dtype=float))
        vals = np.tensordot(phi, self.coeffs, axes=(0, 0))
        return TensorInterpolant((self.grid_x, self.grid_y), vals)

    def coefficient_maxima(self, xs, ys) -> np.ndarray:
        """max |u_i| over the lattice, i = 0..m; input to decay fitting."""
        return np.array(
            [
                float(np.max(np.abs(self.coeff_lattice(i, xs, ys))))
                for i in range(self.m_plus_1)
            ]
        )


def _node_mesh(gx: SincGrid, gy: SincGrid):
    return np.meshgrid(gx.points, gy.points, indexing="ij")


def _divergence_operator(a: Expr, gx: SincGrid, gy: SincGrid, ops, sparse: bool):
    """Matrix of div(a grad .) on the flattened nx*ny node set.

    Written as a*(u_xx + u_yy) + a_x u_x + a_y u_y; gradient terms are
    skipped entirely when a is constant.
    """
    dmx, dmy = ops
    nx, ny = gx.n, gy.n
    X, Y = _node_mesh(gx, gy)
    aval = np.broadcast_to(np.asarray(ex.evaluate(a, X, Y), dtype=float), X.shape)
    if sparse:
        lap = sp.kron(sp.csr_matrix(dmx.d2), sp.identity(ny, format="csr")) + sp.kron(
            sp.identity(nx, format="csr"), sp.csr_matrix(dmy.d2)
        )
        out = sp.diags(aval.ravel()) @ lap
    else:
        lap = np.kron(dmx.d2, np.eye(ny)) + np.kron(np.eye(nx), dmy.d2)
        out = aval.ravel()[:, None] * lap
    if ex.constant_value(a) is None:
        ax = np.broadcast_to(
            np.asarray(ex.evaluate(ex.diff(a, "x"), X, Y), dtype=float), X.shape
        )
        ay = np.broadcast_to(
            np.asarray(ex.evaluate(ex.diff(a, "y"), X, Y), dtype=float), X.shape
        )
        if sparse:
            dx = sp.kron(sp.csr_matrix(dmx.d1), sp.identity(ny, format="csr"))
            dy = sp.kron(sp.identity(nx, format="csr"), sp.csr_matrix(dmy.d1))
            out = out + sp.diags(ax.ravel()) @ dx + sp.diags(ay.ravel()) @ dy
        else:
            dx = np.kron(dmx.d1, np.eye(ny))
            dy = np.kron(np.eye(nx), dmy.d1)
            out = out + ax.ravel()[:, None] * dx + ay.ravel()[:, None] * dy
    return out


def _boundary_rows(gx: SincGrid, gy: SincGrid, tau: float, sparse: bool):
    """tau-weighted interpolation rows at the 2*(nx+ny) edge points.

    Edge points are (x_lo, y_q), (x_hi, y_q) for every y node and
    (x_p, y_lo), (x_p, y_hi) for every x node; all are distinct because
    Sinc nodes are strictly interior, so no corner duplication can occur.
    Returns (rows_matrix, point_list) with points ordered to match rows.
    """
    nx, ny = gx.n, gy.n
    bxl = lagrange_basis_matrix(gx, np.array([gx.a]))[0]
    bxh = lagrange_basis_matrix(gx, np.array([gx.b]))[0]
    byl = lagrange_basis_matrix(gy, np.array([gy.a]))[0]
    byh = lagrange_basis_matrix(gy, np.array([gy.b]))[0]
    iy = np.eye(ny)
    ix = np.eye(nx)
    rows = np.vstack(
        [
            np.kron(bxl, iy),
            np.kron(bxh, iy),
            np.kron(ix, byl),
            np.kron(ix, byh),
        ]
    ) * tau
    pts = (
        [(gx.a, y) for y in gy.points]
        + [(gx.b, y) for y in gy.points]
        + [(x, gy.a) for x in gx.points]
        + [(x, gy.b) for x in gx.points]
    )
    if sparse:
        return sp.csr_matrix(rows), pts
    return rows, pts


def _assemble(
    term_map: dict[tuple[int, int], tuple[tuple[float, Expr], ...]],
    m1: int,
    gx: SincGrid,
    gy: SincGrid,
    tau: float,
    interior_rhs: dict[int, np.ndarray],
    dirichlet: Optional[Callable[[float, float], float]],
    sparse: bool,
) -> GlobalSystem:
    if tau <= 0.0:
        raise DomainError(f"need tau > 0, got {tau}")
    nxy = gx.n * gy.n
    nb = 2 * (gx.n + gy.n)
    ops = (second_derivative_matrix(gx), second_derivative_matrix(gy))
    op_cache: dict[int, object] = {}

    def div_op(a: Expr):
        key = id(a)
        if key not in op_cache:
            op_cache[key] = _divergence_operator(a, gx, gy, ops, sparse)
        return op_cache[key]

    brows, bpts = _boundary_rows(gx, gy, tau, sparse)
    rhs = np.zeros(m1 * nxy + m1 * nb)
    for j, vals in interior_rhs.items():
        rhs[j * nxy : (j + 1) * nxy] = vals.ravel()
    if dirichlet is not None:
        for i in range(m1):
            base = m1 * nxy + i * nb
            for q, (px, py) in enumerate(bpts):
                rhs[base + q] = tau * dirichlet(px, py)

    if sparse:
        blocks = [[None] * m1 for _ in range(m1)]
        for (j, i), terms in term_map.items():
            acc = None
            for c, a in terms:
                piece = div_op(a) * c
                acc = piece if acc is None else acc + piece
            blocks[j][i] = acc.tocsr()
        interior = sp.bmat(blocks, format="csr")
        brow_blocks = []
        for i in range(m1):
            row = [None] * m1
            row[i] = brows
            brow_blocks.append(row)
        boundary = sp.bmat(brow_blocks, format="csr")
        matrix = sp.vstack([interior, boundary], format="csr")
    else:
        matrix = np.zeros((m1 * nxy + m1 * nb, m1 * nxy))
        for (j, i), terms in term_map.items():
            blk = matrix[j * nxy : (j + 1) * nxy, i * nxy : (i + 1) * nxy]
            for c, a in terms:
                blk += c * div_op(a)
        for i in range(m1):
            r0 = m1 * nxy + i * nb
            matrix[r0 : r0 + nb, i * nxy : (i + 1) * nxy] = brows
    return GlobalSystem(
        matrix=matrix, rhs=rhs, tau=tau, grid_x=gx, grid_y=gy, m_plus_1=m1
    )


def build_global_system(
    system: CoupledSystem,
    gx: SincGrid,
    gy: SincGrid,
    tau: float = 1e3,
    sparse: Optional[bool] = None,
) -> GlobalSystem:
    """Assemble the collocation least-squares system for a coupled problem.

    Boundary data is homogeneous.  ``sparse`` defaults to automatic
    selection by DENSE_COLUMN_LIMIT.
    """
    m1 = system.m_plus_1
    cols = m1 * gx.n * gy.n
    if sparse is None:
        sparse = cols > DENSE_COLUMN_LIMIT
    X, Y = _node_mesh(gx, gy)
    fvals = np.broadcast_to(
        np.asarray(ex.evaluate(system.problem.f, X, Y), dtype=float), X.shape
    )
    # model is -div(...) = F, assembled operator is +div(...): negate forcing
    interior_rhs = {0: -fvals}
    return _assemble(
        dict(system.terms), m1, gx, gy, tau, interior_rhs, None, sparse
    )


def _solve_dense(matrix: np.ndarray, rhs: np.ndarray):
    x, _, rank, _ = sla.lstsq(matrix, rhs, lapack_driver="gelsy")
    if rank < matrix.shape[1]:
        raise SolveError(
            f"rank-deficient collocation system: rank {rank} < {matrix.shape[1]}"
        )
    return x, "dense-qr"


def _solve_sparse(matrix, rhs: np.ndarray):
    """Normal equations with Jacobi-preconditioned CG, direct fallback."""
    ata = (matrix.T @ matrix).tocsr()
    atb = matrix.T @ rhs
    d = ata.diagonal()
    if np.any(d <= 0.0):
        raise SolveError("normal-equation diagonal not positive")
    precond = sp.diags(1.0 / d)
    try:
        x, info = spla.cg(ata, atb, M=precond, rtol=1e-14, atol=0.0, maxiter=8000)
    except TypeError:  # older scipy spells rtol as tol
        x, info = spla.cg(ata, atb, M=precond, tol=1e-14, atol=0.0, maxiter=8000)
    bnorm = float(np.linalg.norm(atb))
    if info == 0 and bnorm > 0.0:
        rel = float(np.linalg.norm(ata @ x - atb)) / bnorm
        if rel <= _NORMAL_EQ_RTOL:
            return x, "normal-cg"
    # CG stalled: factor the (SPD) normal matrix directly
    try:
        factor = spla.splu(ata.tocsc())
        x = factor.solve(atb)
        rel = float(np.linalg.norm(ata @ x - atb)) / max(bnorm, 1e-300)
        if rel <= _NORMAL_EQ_RTOL:
            return x, "normal-splu"
    except (MemoryError, RuntimeError):
        pass
    c, low = sla.cho_factor(ata.toarray())
    x = sla.cho_solve((c, low), atb)
    return x, "normal-cholesky"


def solve_least_squares(gsys: GlobalSystem, basis: Optional[ChaosBasis] = None) -> PceSolution:
    """Minimize ||A x - rhs|| and reshape x into coefficient fields.

    Dense QR (column pivoting) when the system has at most
    DENSE_COLUMN_LIMIT columns, sparse normal equations above that.  The
    residual norm reported is the plain Euclidean norm of A x - rhs for
    the assembled (tau-weighted) system.
    """
    t0 = time.perf_counter()
    if gsys.is_sparse:
        x, method = _solve_sparse(gsys.matrix, gsys.rhs)
    else:
        x, method = _solve_dense(gsys.matrix, gsys.rhs)
    if not np.all(np.isfinite(x)):
        raise SolveError("non-finite entries in least-squares solution")
    residual = float(np.linalg.norm(gsys.matrix @ x - gsys.rhs))
    if basis is None:
        basis = chaos_basis(1, gsys.m_plus_1 - 1) if gsys.m_plus_1 > 1 else chaos_basis(1, 0)
    if basis.size != gsys.m_plus_1:
        raise DomainError(
            f"basis size {basis.size} does not match system blocks {gsys.m_plus_1}"
        )
    coeffs = x.reshape(gsys.m_plus_1, gsys.grid_x.n, gsys.grid_y.n)
    return PceSolution(
        basis=basis,
        grid_x=gsys.grid_x,
        grid_y=gsys.grid_y,
        coeffs=coeffs,
        residual_norm=residual,
        method=method,
        elapsed=time.perf_counter() - t0,
    )


def deterministic_solve(
    a: Expr | float,
    f: Expr,
    gx: SincGrid,
    gy: SincGrid,
    tau: float = 1e3,
    dirichlet: Optional[Callable[[float, float], float]] = None,
) -> TensorInterpolant:
    """Collocation solve of div(a grad u) = f with Dirichlet data.

    ``dirichlet`` is a callable g(x, y) for the boundary trace; None means
    homogeneous.  Returns the Poly-Sinc interpolant of the solution.
    """
    if isinstance(a, (int, float)):
        a = ex.Num(float(a))
    X, Y = _node_mesh(gx, gy)
    fvals = np.broadcast_to(np.asarray(ex.evaluate(f, X, Y), dtype=float), X.shape)
    gsys = _assemble(
        {(0, 0): ((1.0, a),)}, 1, gx, gy, tau, {0: fvals}, dirichlet, sparse=False
    )
    sol = solve_least_squares(gsys, chaos_basis(1, 0))
    return sol.coeff_interpolant(0)
