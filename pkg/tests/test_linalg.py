"""Dense linear algebra kernels: solves, characteristic polynomial, symmetric
eigenvalues, Kronecker identities, and vec/unvec conventions."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lpvflow.errors import DimensionMismatch, NotSymmetric, SingularMatrix
from lpvflow.linalg import (
    char_poly,
    det,
    is_pd,
    is_psd,
    kron,
    lyap_kernel,
    require_symmetric,
    solve_linear,
    sym_eig,
    sym_eig_decomp,
    unvec,
    vec,
)

from conftest import random_stable_matrix


class TestSolveLinear:
    def test_identity(self):
        b = np.array([[1.0], [2.0], [3.0]])
        assert np.allclose(solve_linear(np.eye(3), b), b)

    def test_diagonal(self):
        a = np.diag([2.0, 4.0])
        b = np.array([[2.0], [8.0]])
        assert np.allclose(solve_linear(a, b), [[1.0], [2.0]])

    def test_random_residual(self, rng):
        a = rng.normal(size=(6, 6)) + 6 * np.eye(6)
        b = rng.normal(size=(6, 3))
        x = solve_linear(a, b)
        assert np.max(np.abs(a @ x - b)) < 1e-10

    def test_singular_raises(self):
        a = np.array([[1.0, 2.0], [2.0, 4.0]])
        with pytest.raises(SingularMatrix):
            solve_linear(a, np.eye(2))

    def test_shape_mismatch(self):
        with pytest.raises(DimensionMismatch):
            solve_linear(np.eye(3), np.ones((2, 1)))


class TestCharPoly:
    def test_zero_matrix(self):
        assert np.allclose(char_poly(np.zeros((2, 2))), [1.0, 0.0, 0.0])

    def test_diag_1_2(self):
        # (s-1)(s-2) = s^2 - 3s + 2
        assert np.allclose(char_poly(np.diag([1.0, 2.0])), [1.0, -3.0, 2.0])

    def test_open_loop_vertex(self):
        a = np.array([[-1.0, 1.0], [-0.2, 1.0]])
        # trace 0, det -0.8
        assert np.allclose(char_poly(a), [1.0, 0.0, -0.8], atol=1e-12)

    def test_matches_root_expansion(self, rng):
        for n in (2, 3, 4, 5):
            for _ in range(5):
                a = random_stable_matrix(rng, n)
                eigs = np.sort(np.linalg.eigvals(a).real)
                expected = np.real(np.poly(eigs))
                got = char_poly(a)
                assert np.max(np.abs(got - expected)) < 1e-9 * max(
                    1.0, np.max(np.abs(expected))
                )

    def test_leading_coefficient_is_one(self, rng):
        a = rng.normal(size=(4, 4))
        assert char_poly(a)[0] == 1.0


class TestSymEig:
    def test_diagonal_sorted_ascending(self):
        assert np.allclose(sym_eig(np.diag([3.0, 1.0, 2.0])), [1.0, 2.0, 3.0])

    def test_off_diagonal(self):
        assert np.allclose(sym_eig(np.array([[0.0, 1.0], [1.0, 0.0]])), [-1.0, 1.0])

    def test_reference_certificate_matrix(self):
        x = np.array([[0.9, -2.2], [-2.2, 7.7]])
        eigs = sym_eig(x)
        assert np.all(eigs > 0)
        assert np.prod(eigs) == pytest.approx(det(x), rel=1e-9)

    def test_trace_and_det_consistency(self, rng):
        for n in (2, 3, 5):
            m = rng.normal(size=(n, n))
            s = m + m.T
            eigs = sym_eig(s)
            assert np.sum(eigs) == pytest.approx(np.trace(s), rel=1e-9, abs=1e-9)
            assert np.prod(eigs) == pytest.approx(det(s), rel=1e-9, abs=1e-9)

    def test_decomposition_reconstructs(self, rng):
        m = rng.normal(size=(4, 4))
        s = m + m.T
        eigs, vecs = sym_eig_decomp(s)
        assert np.max(np.abs(vecs @ np.diag(eigs) @ vecs.T - s)) < 1e-9
        assert np.max(np.abs(vecs.T @ vecs - np.eye(4))) < 1e-9

    def test_rejects_nonsymmetric(self):
        with pytest.raises(NotSymmetric):
            sym_eig(np.array([[0.0, 1.0], [0.0, 0.0]]))


class TestDefiniteness:
    def test_identity_pd(self):
        assert is_pd(np.eye(3))
        assert is_psd(np.eye(3))

    def test_psd_not_pd(self):
        s = np.diag([1.0, 0.0])
        assert is_psd(s)
        assert not is_pd(s)

    def test_indefinite(self):
        s = np.diag([1.0, -1.0])
        assert not is_psd(s)

    def test_require_symmetric_tolerates_roundoff(self):
        s = np.array([[1.0, 2.0], [2.0 + 1e-13, 1.0]])
        out = require_symmetric(s)
        assert np.allclose(out, out.T)


class TestKron:
    def test_with_identity_left(self):
        m = np.array([[1.0, 2.0], [3.0, 4.0]])
        k = kron(np.eye(2), m)
        assert np.allclose(k[:2, :2], m)
        assert np.allclose(k[2:, 2:], m)
        assert np.allclose(k[:2, 2:], 0)

    def test_with_scalar_identity(self):
        m = np.array([[1.0, 2.0], [3.0, 4.0]])
        assert np.allclose(kron(m, np.eye(1)), m)

    def test_entrywise_oracle(self, rng):
        a = rng.normal(size=(2, 3))
        b = rng.normal(size=(3, 2))
        k = kron(a, b)
        assert k.shape == (6, 6)
        for i in range(2):
            for j in range(3):
                assert np.allclose(k[3 * i : 3 * i + 3, 2 * j : 2 * j + 2], a[i, j] * b)

    def test_vec_identity(self, rng):
        # vec(A X B) = (B' (x) A) vec(X), the column-major workhorse identity
        a = rng.normal(size=(3, 3))
        x = rng.normal(size=(3, 2))
        b = rng.normal(size=(2, 2))
        lhs = vec(a @ x @ b)
        rhs = kron(b.T, a) @ vec(x)
        assert np.max(np.abs(lhs - rhs)) < 1e-12


class TestVecUnvec:
    def test_column_major(self):
        m = np.array([[1.0, 3.0], [2.0, 4.0]])
        assert np.allclose(vec(m), [1.0, 2.0, 3.0, 4.0])

    def test_round_trip(self, rng):
        m = rng.normal(size=(3, 4))
        assert np.allclose(unvec(vec(m), 3, 4), m)

    @given(
        rows=st.integers(min_value=1, max_value=5),
        cols=st.integers(min_value=1, max_value=5),
        seed=st.integers(min_value=0, max_value=2**31 - 1),
    )
    @settings(max_examples=40, deadline=None)
    def test_round_trip_property(self, rows, cols, seed):
        m = np.random.default_rng(seed).normal(size=(rows, cols))
        assert np.array_equal(unvec(vec(m), rows, cols), m)

    def test_unvec_length_check(self):
        with pytest.raises(DimensionMismatch):
            unvec(np.ones(5), 2, 2)


class TestLyapKernel:
    def test_residual_zero(self, rng):
        a = random_stable_matrix(rng, 3)
        w = np.eye(3)
        p = lyap_kernel(a, w)
        assert np.max(np.abs(a.T @ p + p @ a + w)) < 1e-9

    def test_singular_when_eigensum_zero(self):
        # a and -a share |eigenvalue|, so the Kronecker operator is singular
        a = np.diag([1.0, -1.0])
        with pytest.raises(SingularMatrix):
            lyap_kernel(a, np.eye(2))
