import numpy as np
import pytest
import scipy.linalg as sla

import sincpce as sp
from sincpce.colloc import (
    DENSE_COLUMN_LIMIT,
    build_global_system,
    deterministic_solve,
    solve_least_squares,
)
from sincpce.errors import DomainError
from sincpce.expressions import parse
from sincpce.model import SpdeProblem, galerkin_assemble
from sincpce.sincgrid import (
    interp_eval_lattice,
    second_derivative_matrix,
    sinc_points,
)


def _single_field_system(a0="1", f="1", domain=((0.0, 1.0), (0.0, 1.0))):
    # K=1 with a zero fluctuation field collapses to one deterministic block
    p = SpdeProblem(
        domain=domain, K=1, a0=parse(a0), b0=0.0, a_k=(parse("0"),), f=parse(f)
    )
    basis = sp.chaos_basis(1, 0)
    tensor = sp.triple_tensor(basis)
    return galerkin_assemble(p, basis, tensor)


def test_pure_poisson_interior_block_is_tensor_laplacian():
    system = _single_field_system()
    gx = sinc_points(0.0, 1.0, 3)
    gy = sinc_points(0.0, 1.0, 3)
    gsys = build_global_system(system, gx, gy, tau=1e3)
    n = gx.n
    d2x = second_derivative_matrix(gx).d2
    d2y = second_derivative_matrix(gy).d2
    expect = np.kron(d2x, np.eye(n)) + np.kron(np.eye(n), d2y)
    interior = gsys.matrix[: n * n, : n * n]
    assert np.array_equal(interior, expect)


def test_row_and_column_counts(example1_config):
    cfg = example1_config
    basis = sp.chaos_basis(cfg.K, cfg.P)
    coupled = galerkin_assemble(cfg.problem, basis, sp.triple_tensor(basis))
    gx = sinc_points(-1.0, 1.0, 4)
    gy = sinc_points(-1.0, 1.0, 4)
    gsys = build_global_system(coupled, gx, gy, tau=1e3)
    m1, n = 4, gx.n
    assert gsys.matrix.shape == (m1 * n * n + m1 * 4 * n, m1 * n * n)
    assert gsys.interior_rows == m1 * n * n
    assert gsys.boundary_rows == m1 * 4 * n


def test_boundary_rows_scale_linearly_with_tau():
    system = _single_field_system()
    gx = sinc_points(0.0, 1.0, 2)
    gy = sinc_points(0.0, 1.0, 2)
    g1 = build_global_system(system, gx, gy, tau=100.0)
    g2 = build_global_system(system, gx, gy, tau=1000.0)
    ni = gx.n * gy.n
    assert np.array_equal(g1.matrix[:ni], g2.matrix[:ni])
    assert np.allclose(g2.matrix[ni:], 10.0 * g1.matrix[ni:], rtol=1e-15)
    assert np.array_equal(g1.rhs, g2.rhs)  # homogeneous boundary data


def test_boundary_rows_interpolate_edge_points():
    # each boundary row applied to samples of a smooth function must
    # reproduce the function at its edge point (times tau)
    system = _single_field_system()
    gx = sinc_points(0.0, 1.0, 3)
    gy = sinc_points(0.0, 1.0, 3)
    tau = 50.0
    gsys = build_global_system(system, gx, gy, tau=tau)
    n = gx.n
    # polynomial of degree <= n-1 in each variable: interpolation is exact
    f = lambda x, y: (x**2 + 1.0) * (y**3 - 2.0 * y)
    X, Y = np.meshgrid(gx.points, gy.points, indexing="ij")
    vals = f(X, Y).ravel()
    edge_pts = (
        [(gx.a, y) for y in gy.points]
        + [(gx.b, y) for y in gy.points]
        + [(x, gy.a) for x in gx.points]
        + [(x, gy.b) for x in gx.points]
    )
    rows = gsys.matrix[n * n :, :]
    got = rows @ vals
    expect = tau * np.array([f(px, py) for px, py in edge_pts])
    assert np.max(np.abs(got - expect)) <= 1e-9 * tau


def test_deterministic_solve_manufactured_sine():
    f = parse("-2*pi*pi * sin(pi*x) * sin(pi*y)")
    gx = sinc_points(0.0, 1.0, 5)
    gy = sinc_points(0.0, 1.0, 5)
    u = deterministic_solve(1.0, f, gx, gy)
    xs = np.linspace(0.0, 1.0, 101)
    vals = interp_eval_lattice(u, xs, xs)
    X, Y = np.meshgrid(xs, xs, indexing="ij")
    exact = np.sin(np.pi * X) * np.sin(np.pi * Y)
    assert np.max(np.abs(vals - exact)) <= 1e-6


def test_deterministic_solve_polynomial_dirichlet():
    # u = x^2 + y^2 solves div(grad u) = 4 and is inside the polynomial
    # space, so the collocation solution is exact to rounding
    g = lambda x, y: x * x + y * y
    gx = sinc_points(-1.0, 1.0, 3)
    gy = sinc_points(-1.0, 1.0, 3)
    u = deterministic_solve(1.0, parse("4"), gx, gy, dirichlet=g)
    xs = np.linspace(-1.0, 1.0, 41)
    vals = interp_eval_lattice(u, xs, xs)
    X, Y = np.meshgrid(xs, xs, indexing="ij")
    assert np.max(np.abs(vals - g(X, Y))) <= 1e-8


def test_deterministic_solve_variable_coefficient():
    # manufactured: u = sin(pi x) sin(pi y), a = 1 + x/2
    # div(a grad u) = a (u_xx + u_yy) + a_x u_x
    fsrc = (
        "-(1 + x/2) * 2*pi*pi * sin(pi*x)*sin(pi*y)"
        " + 1/2 * pi * cos(pi*x)*sin(pi*y)"
    )
    gx = sinc_points(0.0, 1.0, 6)
    gy = sinc_points(0.0, 1.0, 6)
    u = deterministic_solve(parse("1 + x/2"), parse(fsrc), gx, gy)
    xs = np.linspace(0.0, 1.0, 101)
    vals = interp_eval_lattice(u, xs, xs)
    X, Y = np.meshgrid(xs, xs, indexing="ij")
    exact = np.sin(np.pi * X) * np.sin(np.pi * Y)
    assert np.max(np.abs(vals - exact)) <= 1e-5


def test_duplicated_rows_preserve_consistent_minimizer():
    # for a consistent system the least-squares minimizer is unchanged by
    # duplicating equations (only the residual weighting would change)
    system = _single_field_system(f="4", domain=((-1.0, 1.0), (-1.0, 1.0)))
    gx = sinc_points(-1.0, 1.0, 3)
    gy = sinc_points(-1.0, 1.0, 3)
    gsys = build_global_system(system, gx, gy, tau=10.0)
    x1, *_ = sla.lstsq(gsys.matrix, gsys.rhs, lapack_driver="gelsy")
    A2 = np.vstack([gsys.matrix, gsys.matrix])
    b2 = np.concatenate([gsys.rhs, gsys.rhs])
    x2, *_ = sla.lstsq(A2, b2, lapack_driver="gelsy")
    # consistency: u = -(x^2+y^2)/2 + c fits interior rows exactly? not
    # needed; agreement of minimizers is what the weighting argument gives
    assert np.max(np.abs(x1 - x2)) <= 1e-8 * max(1.0, np.max(np.abs(x1)))


def test_dense_and_sparse_paths_agree(example1_config):
    cfg = example1_config
    basis = sp.chaos_basis(cfg.K, cfg.P)
    coupled = galerkin_assemble(cfg.problem, basis, sp.triple_tensor(basis))
    gx = sinc_points(-1.0, 1.0, 3)
    gy = sinc_points(-1.0, 1.0, 3)
    gd = build_global_system(coupled, gx, gy, 1e3, sparse=False)
    gs = build_global_system(coupled, gx, gy, 1e3, sparse=True)
    assert np.max(np.abs(gd.matrix - gs.matrix.toarray())) == 0.0
    sd = solve_least_squares(gd, basis)
    ss = solve_least_squares(gs, basis)
    assert sd.method == "dense-qr"
    assert ss.method.startswith("normal-")
    assert np.max(np.abs(sd.coeffs - ss.coeffs)) <= 1e-8


def test_residual_and_normal_equation_orthogonality(example1_solution):
    sol, gsys, _ = example1_solution
    # collocation least squares leaves a PDE-truncation residual; freeze a
    # regression bound rather than pretending it vanishes
    assert 0.0 < sol.residual_norm <= 0.5
    r = gsys.matrix @ sol.coeffs.ravel() - gsys.rhs
    atr = gsys.matrix.T @ r
    atb = gsys.matrix.T @ gsys.rhs
    assert np.linalg.norm(atr) / np.linalg.norm(atb) <= 1e-8


def test_solution_evaluators(example1_solution):
    sol, _, _ = example1_solution
    xs = np.linspace(-1.0, 1.0, 11)
    # realize at theta must equal the coefficient expansion
    theta = np.array([0.4])
    field = sol.realize(theta)
    manual = np.zeros_like(sol.coeffs[0])
    from sincpce.chaos import basis_eval_all

    w = basis_eval_all(sol.basis, theta)
    for i in range(sol.m_plus_1):
        manual += w[i] * sol.coeffs[i]
    assert np.max(np.abs(field.values - manual)) <= 1e-12
    # variance is a sum of squares: nonnegative everywhere
    assert np.min(sol.variance_lattice(xs, xs)) >= 0.0
    # coefficient lattice at the nodes returns the stored values
    lat = sol.coeff_lattice(2, sol.grid_x.points, sol.grid_y.points)
    assert np.max(np.abs(lat - sol.coeffs[2])) <= 1e-12


def test_mean_realize_consistency(example1_solution):
    # averaging realizations over a fine Gauss rule reproduces the mean
    # coefficient field (the chaos basis integrates to delta_0k)
    sol, _, _ = example1_solution
    from sincpce.chaos import gauss_legendre

    rule = gauss_legendre(12)
    acc = np.zeros_like(sol.coeffs[0])
    for t, w in zip(rule.nodes, rule.weights):
        acc += w * sol.realize(np.array([t])).values
    assert np.max(np.abs(acc - sol.coeffs[0])) <= 1e-12


def test_basis_size_mismatch_raises(example1_config):
    cfg = example1_config
    basis = sp.chaos_basis(cfg.K, cfg.P)
    coupled = galerkin_assemble(cfg.problem, basis, sp.triple_tensor(basis))
    gx = sinc_points(-1.0, 1.0, 2)
    gy = sinc_points(-1.0, 1.0, 2)
    gsys = build_global_system(coupled, gx, gy, 1e3)
    with pytest.raises(DomainError):
        solve_least_squares(gsys, sp.chaos_basis(1, 5))


def test_tau_validation(example1_config):
    cfg = example1_config
    basis = sp.chaos_basis(cfg.K, cfg.P)
    coupled = galerkin_assemble(cfg.problem, basis, sp.triple_tensor(basis))
    gx = sinc_points(-1.0, 1.0, 2)
    gy = sinc_points(-1.0, 1.0, 2)
    with pytest.raises(DomainError):
        build_global_system(coupled, gx, gy, tau=0.0)


def test_sparse_selection_is_automatic(example2_config):
    # K=5 P=3 N=4 exceeds the dense column limit and must pick sparse
    p = example2_config.problem
    basis = sp.chaos_basis(5, 3)
    coupled = galerkin_assemble(p, basis, sp.triple_tensor(basis))
    gx = sinc_points(0.0, 1.0, 4)
    gy = sinc_points(0.0, 1.0, 4)
    gsys = build_global_system(coupled, gx, gy, 1e3)
    assert gsys.columns == 56 * 81
    assert gsys.columns > DENSE_COLUMN_LIMIT
    assert gsys.is_sparse


def test_triplet_dump_round_trip():
    system = _single_field_system()
    gx = sinc_points(0.0, 1.0, 1)
    gy = sinc_points(0.0, 1.0, 1)
    gsys = build_global_system(system, gx, gy, tau=7.0)
    rebuilt = np.zeros(gsys.matrix.shape)
    for r, c, v in gsys.triplets():
        rebuilt[r, c] = v
    assert np.array_equal(rebuilt, gsys.matrix)
