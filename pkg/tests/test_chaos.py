import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import eval_legendre

from sincpce.chaos import (
    basis_eval_all,
    chaos_basis,
    gauss_legendre,
    gram_matrix,
    legendre_orthonormal,
    multi_index_set,
    pce_mean,
    pce_realize,
    pce_variance,
    triple_tensor,
    triple_tensor_triplets,
)
from sincpce.errors import DomainError


def test_index_counts():
    assert len(multi_index_set(5, 3).indices) == 56
    assert len(multi_index_set(1, 3).indices) == 4
    assert len(multi_index_set(2, 0).indices) == 1


@given(st.integers(1, 6), st.integers(0, 6))
@settings(max_examples=40, deadline=None)
def test_index_count_formula(K, P):
    assert len(multi_index_set(K, P).indices) == math.comb(K + P, K)


def test_index_cap():
    with pytest.raises(DomainError):
        multi_index_set(10, 10)


def test_graded_lexicographic_order():
    idx = multi_index_set(2, 2).indices
    assert list(idx) == [(0, 0), (0, 1), (1, 0), (0, 2), (1, 1), (2, 0)]
    # degree never decreases along the list
    degs = [sum(t) for t in multi_index_set(3, 4).indices]
    assert degs == sorted(degs)


def test_first_index_is_constant_term():
    for K in (1, 3, 5):
        assert multi_index_set(K, 3).indices[0] == (0,) * K


def test_orthonormal_legendre_values():
    xi = np.linspace(-1.0, 1.0, 17)
    for d in range(6):
        expect = math.sqrt(2 * d + 1) * eval_legendre(d, xi)
        got = legendre_orthonormal(d, xi)
        assert np.max(np.abs(got - expect)) <= 1e-13 * max(1.0, np.max(np.abs(expect)))


def test_orthonormal_legendre_at_one():
    for d in range(8):
        assert legendre_orthonormal(d, 1.0) == pytest.approx(math.sqrt(2 * d + 1), rel=1e-13)


def test_gauss_rule_moments():
    # with the uniform weight 1/2 the rule integrates monomials exactly
    # up to degree 2q-1: integral of x^d is 0 (odd) or 1/(d+1) (even)
    q = 6
    rule = gauss_legendre(q)
    assert rule.weights.sum() == pytest.approx(1.0, rel=1e-14)
    for d in range(2 * q):
        val = float(np.sum(rule.weights * rule.nodes**d))
        exact = 0.0 if d % 2 else 1.0 / (d + 1)
        assert val == pytest.approx(exact, abs=1e-14)


@pytest.mark.parametrize("K,P", [(1, 4), (2, 3), (3, 4)])
def test_gram_identity(K, P):
    basis = chaos_basis(K, P)
    G = gram_matrix(basis)
    assert np.max(np.abs(G - np.eye(basis.size))) <= 1e-12


def test_mean_of_basis_is_delta():
    # <1, Phi_k> = delta_0k: first row of the Gram matrix
    basis = chaos_basis(2, 3)
    G = gram_matrix(basis)
    assert G[0, 0] == pytest.approx(1.0, abs=1e-13)
    assert np.max(np.abs(G[0, 1:])) <= 1e-13


def test_triple_tensor_shape_and_symmetry():
    basis = chaos_basis(5, 3)
    T = triple_tensor(basis)
    assert T.entries.shape == (5, 56, 56)
    for k in range(5):
        assert np.array_equal(T.entries[k], T.entries[k].T)


def test_triple_tensor_closed_form_k1():
    # <xi phi_i phi_{i+1}> = (i+1)/sqrt(4(i+1)^2 - 1): 1/sqrt(3), 2/sqrt(15),
    # 3/sqrt(35); everything else in a K=1 block is zero
    basis = chaos_basis(1, 3)
    T = triple_tensor(basis).entries[0]
    expect = np.zeros((4, 4))
    for i in range(3):
        v = (i + 1) / math.sqrt(4.0 * (i + 1) ** 2 - 1.0)
        expect[i, i + 1] = expect[i + 1, i] = v
    assert np.max(np.abs(T - expect)) <= 1e-12
    assert T[0, 1] == pytest.approx(1.0 / math.sqrt(3.0), rel=1e-13)
    assert T[1, 2] == pytest.approx(2.0 / math.sqrt(15.0), rel=1e-13)
    assert T[2, 3] == pytest.approx(3.0 / math.sqrt(35.0), rel=1e-13)


def test_triple_tensor_sparsity_structure():
    # entry (k, i, j) can only be nonzero when the multi-indices differ by
    # exactly one in dimension k and agree elsewhere
    basis = chaos_basis(3, 2)
    T = triple_tensor(basis)
    idx = basis.index_set.indices
    for k in range(3):
        nz = np.argwhere(T.entries[k] != 0.0)
        for i, j in nz:
            a, b = idx[i], idx[j]
            assert abs(a[k] - b[k]) == 1
            assert all(a[d] == b[d] for d in range(3) if d != k)
    # diagonal in (i, j) vanishes for every k
    for k in range(3):
        assert np.max(np.abs(np.diag(T.entries[k]))) == 0.0


def test_triple_tensor_quadrature_guard():
    basis = chaos_basis(2, 3)
    with pytest.raises(DomainError):
        triple_tensor(basis, q=3)


def test_triple_tensor_triplets_round_trip():
    basis = chaos_basis(2, 2)
    T = triple_tensor(basis)
    trips = triple_tensor_triplets(T)
    rebuilt = np.zeros_like(T.entries)
    for k, i, j, v in trips:
        rebuilt[k, i, j] = v
    assert np.array_equal(rebuilt, T.entries)


def test_moments_from_coefficients():
    c = np.array([2.0, 0.5, -0.25])
    assert pce_mean(c) == 2.0
    assert pce_variance(c) == pytest.approx(0.5**2 + 0.25**2, rel=1e-15)
    assert pce_variance(np.array([3.0])) == 0.0


@given(st.lists(st.floats(-10, 10, allow_nan=False), min_size=1, max_size=12))
@settings(max_examples=60, deadline=None)
def test_variance_nonnegative(coeffs):
    assert pce_variance(np.array(coeffs)) >= 0.0


def test_realize_reproduces_expansion():
    basis = chaos_basis(2, 3)
    rng = np.random.default_rng(11)
    coeffs = rng.standard_normal(basis.size)
    theta = np.array([0.3, -0.7])
    phi = basis_eval_all(basis, theta)
    direct = float(np.dot(coeffs, phi))
    assert pce_realize(coeffs, basis, theta) == pytest.approx(direct, rel=1e-13)


@given(
    st.floats(-1.0, 1.0),
    st.floats(-1.0, 1.0),
    st.floats(-5.0, 5.0),
    st.floats(-5.0, 5.0),
)
@settings(max_examples=40, deadline=None)
def test_realize_linear_in_coefficients(t1, t2, s1, s2):
    basis = chaos_basis(2, 2)
    rng = np.random.default_rng(3)
    c1 = rng.standard_normal(basis.size)
    c2 = rng.standard_normal(basis.size)
    theta = np.array([t1, t2])
    lhs = pce_realize(s1 * c1 + s2 * c2, basis, theta)
    rhs = s1 * pce_realize(c1, basis, theta) + s2 * pce_realize(c2, basis, theta)
    assert lhs == pytest.approx(rhs, abs=1e-9 * max(1.0, abs(lhs), abs(rhs)))


def test_quadrature_reproduces_gram_against_larger_rule():
    # the default rule and a much larger one must agree on the Gram matrix
    basis = chaos_basis(2, 3)
    g_small = gram_matrix(basis)
    g_big = gram_matrix(basis, q=20)
    assert np.max(np.abs(g_small - g_big)) <= 1e-12
