import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sincpce.errors import DomainError
from sincpce.sincgrid import (
    SincGrid,
    TensorInterpolant,
    classic_step,
    default_step,
    interp_eval,
    interp_eval_lattice,
    lagrange_basis_eval,
    lagrange_basis_matrix,
    lebesgue_estimate,
    lebesgue_measured,
    second_derivative_matrix,
    sinc_points,
)

grids = st.builds(
    lambda a, width, N, h: sinc_points(a, a + width, N, h),
    st.floats(-5.0, 5.0),
    st.floats(0.5, 10.0),
    st.integers(1, 8),
    st.floats(0.3, 1.8),
)


def test_step_rules():
    assert default_step(3) == pytest.approx(4.0 * math.pi / 9.0, rel=1e-15)
    assert classic_step(4) == pytest.approx(math.pi / 2.0, rel=1e-15)


def test_point_count_and_ordering():
    g = sinc_points(-1.0, 1.0, 5)
    assert g.n == 11
    assert np.all(np.diff(g.points) > 0)
    assert g.points[0] > -1.0 and g.points[-1] < 1.0


def test_center_point_on_tanh_formula():
    # on (-1, 1) the map reduces to x_k = tanh(k h / 2)
    h = 0.7
    g = sinc_points(-1.0, 1.0, 3, h)
    for k in range(-3, 4):
        assert g.points[k + 3] == pytest.approx(math.tanh(k * h / 2.0), abs=1e-15)


@given(grids)
@settings(max_examples=40, deadline=None)
def test_point_symmetry(g):
    # stable evaluation keeps x_{-k} + x_k = a + b to rounding
    s = g.points + g.points[::-1]
    assert np.max(np.abs(s - (g.a + g.b))) <= 1e-14 * max(1.0, abs(g.a) + abs(g.b))


def test_large_argument_stability():
    # far tails: no overflow, points stay in the closed interval even when
    # they saturate at the endpoints in float64
    g = sinc_points(0.0, 1.0, 400, 2.0)
    assert np.all(np.isfinite(g.points))
    assert np.all((g.points >= 0.0) & (g.points <= 1.0))
    # below the saturation threshold the points are strictly interior
    g = sinc_points(0.0, 1.0, 40, 0.8)
    assert np.all((g.points > 0.0) & (g.points < 1.0))
    assert np.all(np.diff(g.points) > 0)


@pytest.mark.parametrize(
    "bad",
    [
        lambda: sinc_points(1.0, 1.0, 3),
        lambda: sinc_points(2.0, 1.0, 3),
        lambda: sinc_points(0.0, 1.0, 0),
        lambda: sinc_points(0.0, 1.0, 3, -0.1),
        lambda: sinc_points(0.0, 1.0, 3, 0.0),
    ],
)
def test_invalid_grid_arguments(bad):
    with pytest.raises(DomainError):
        bad()


def test_basis_delta_property():
    g = sinc_points(-2.0, 3.0, 4)
    B = lagrange_basis_matrix(g, g.points)
    assert np.array_equal(B, np.eye(g.n))


@given(grids, st.floats(0.0, 1.0))
@settings(max_examples=60, deadline=None)
def test_partition_of_unity(g, t):
    x = g.a + t * (g.b - g.a)
    w = lagrange_basis_eval(g, x)
    assert abs(w.sum() - 1.0) <= 1e-12 * max(1.0, np.abs(w).sum())


def test_basis_outside_domain_raises():
    g = sinc_points(0.0, 1.0, 3)
    with pytest.raises(DomainError):
        lagrange_basis_matrix(g, [1.5])
    with pytest.raises(DomainError):
        lagrange_basis_matrix(g, [-0.001])


def test_basis_endpoint_allowed():
    g = sinc_points(0.0, 1.0, 3)
    w = lagrange_basis_eval(g, 0.0)
    assert np.all(np.isfinite(w))
    assert w.sum() == pytest.approx(1.0, abs=1e-11)


@pytest.mark.parametrize("N", [1, 2, 4, 7])
def test_derivative_matrices_exact_on_polynomials(N):
    # the interpolant reproduces degree <= n-1, so its derivative matrices
    # must close polynomial differentiation exactly at the nodes
    rng = np.random.default_rng(42 + N)
    g = sinc_points(-1.0, 2.5, N)
    d = second_derivative_matrix(g)
    n = g.n
    coeff = rng.standard_normal(n)  # degree n-1
    p = np.polynomial.Polynomial(coeff)
    vals = p(g.points)
    d1_exact = p.deriv(1)(g.points)
    d2_exact = p.deriv(2)(g.points)
    scale1 = max(1.0, np.max(np.abs(d1_exact)))
    scale2 = max(1.0, np.max(np.abs(d2_exact)))
    assert np.max(np.abs(d.d1 @ vals - d1_exact)) / scale1 <= 1e-9
    assert np.max(np.abs(d.d2 @ vals - d2_exact)) / scale2 <= 1e-9


def test_derivative_matrices_identity_block():
    g = sinc_points(0.0, 1.0, 3)
    d = second_derivative_matrix(g)
    assert np.array_equal(d.d0, np.eye(g.n))


def test_interpolation_convergence_1d():
    # smooth non-polynomial target; sup error must fall monotonically in N
    f = lambda x: np.exp(x) / (1.0 + x**2)
    xs = np.linspace(-1.0, 1.0, 1001)
    errs = []
    for N in (2, 4, 6, 8, 10):
        g = sinc_points(-1.0, 1.0, N)
        interp = TensorInterpolant((g,), f(g.points))
        B = lagrange_basis_matrix(g, xs)
        errs.append(float(np.max(np.abs(B @ interp.values - f(xs)))))
    assert all(e1 > e2 for e1, e2 in zip(errs, errs[1:]))
    assert errs[-1] <= 1e-6


def test_interpolation_convergence_2d():
    f = lambda X, Y: np.sin(np.pi * X) * np.sin(np.pi * Y)
    xs = np.linspace(0.0, 1.0, 201)
    errs = []
    for N in range(2, 7):
        g = sinc_points(0.0, 1.0, N)
        X, Y = np.meshgrid(g.points, g.points, indexing="ij")
        interp = TensorInterpolant((g, g), f(X, Y))
        vals = interp_eval_lattice(interp, xs, xs)
        XX, YY = np.meshgrid(xs, xs, indexing="ij")
        errs.append(float(np.max(np.abs(vals - f(XX, YY)))))
    assert all(e1 > e2 for e1, e2 in zip(errs, errs[1:]))
    assert errs[-1] <= 1e-9


def test_interp_eval_matches_lattice_and_nodes():
    g = sinc_points(0.0, 2.0, 3)
    rng = np.random.default_rng(7)
    vals = rng.standard_normal((g.n, g.n))
    interp = TensorInterpolant((g, g), vals)
    # exact at nodes
    assert interp(g.points[2], g.points[5]) == pytest.approx(vals[2, 5], abs=1e-12)
    xs = np.linspace(0.0, 2.0, 7)
    lat = interp_eval_lattice(interp, xs, xs)
    for i in (0, 3, 6):
        for j in (1, 4):
            assert lat[i, j] == pytest.approx(interp(xs[i], xs[j]), abs=1e-12)


def test_tensor_interpolant_shape_check():
    g = sinc_points(0.0, 1.0, 2)
    with pytest.raises(DomainError):
        TensorInterpolant((g, g), np.zeros((g.n, g.n + 1)))


def test_interp_eval_outside_raises():
    g = sinc_points(0.0, 1.0, 2)
    interp = TensorInterpolant((g, g), np.zeros((g.n, g.n)))
    with pytest.raises(DomainError):
        interp_eval(interp, (1.2, 0.5))


def test_lebesgue_estimate_values():
    assert lebesgue_estimate(1) == pytest.approx(math.log(2.0) / math.pi + 1.07618, rel=1e-12)
    assert lebesgue_estimate(11) == pytest.approx(math.log(12.0) / math.pi + 1.07618, rel=1e-12)
    with pytest.raises(DomainError):
        lebesgue_estimate(0)


def test_lebesgue_measured_resolution_guard():
    g = sinc_points(-1.0, 1.0, 2)
    with pytest.raises(DomainError):
        lebesgue_measured(g, resolution=10)


def test_lebesgue_measured_lower_bound():
    # the node set itself gives sum |b_k| = 1, so the measured max is >= 1
    g = sinc_points(-1.0, 1.0, 3)
    assert lebesgue_measured(g, resolution=1000) >= 1.0


def test_lebesgue_ratio_smallest_grid():
    g = sinc_points(-1.0, 1.0, 1)
    ratio = lebesgue_measured(g, resolution=10_000) / lebesgue_estimate(g.n)
    assert 0.8 <= ratio <= 1.25


@pytest.mark.xfail(
    reason=(
        "measured Lebesgue constants of Sinc-point Lagrange bases grow "
        "much faster than the logarithmic estimate: the ratio leaves "
        "[0.8, 1.25] from n=5 upward at every step size (minimum "
        "attainable ratios over h: 1.24 at n=5 up to 6.6 at n=13)"
    ),
    strict=True,
)
def test_lebesgue_ratio_band_all_small_grids():
    for n in (3, 5, 7, 9, 11, 13):
        g = sinc_points(-1.0, 1.0, (n - 1) // 2)
        ratio = lebesgue_measured(g, resolution=max(10_000, 20 * n)) / lebesgue_estimate(n)
        assert 0.8 <= ratio <= 1.25, f"n={n}: ratio {ratio:.3f}"


def test_default_step_beats_classic_for_interpolation():
    # the balanced step keeps off-node amplification much lower on fine grids
    g_bal = sinc_points(-1.0, 1.0, 5)
    g_cls = sinc_points(-1.0, 1.0, 5, classic_step(5))
    lb = lebesgue_measured(g_bal, 10_000)
    lc = lebesgue_measured(g_cls, 10_000)
    assert lb < lc
