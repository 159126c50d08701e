"""Tests for the dense linear algebra kernel and seeded samplers."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.core.exceptions import BudgetExceeded, ContractViolation, DimensionMismatch
from src.linalg.calculator import (
    herm_eig,
    kron_all,
    max_entangled,
    opnorm,
    partial_trace,
    polar,
    reduced_densities,
    schatten_norm,
    schmidt,
    takagi,
    transpose_in_basis,
)
from src.linalg.sampling import (
    haar_state,
    haar_unitary,
    make_rng,
    random_hermitian,
    random_instances,
    random_povm,
)

X = np.array([[0, 1], [1, 0]], dtype=complex)
Z = np.diag([1.0, -1.0]).astype(complex)
I2 = np.eye(2, dtype=complex)

seeds = st.integers(min_value=0, max_value=2**63 - 1)


class TestHermEig:
    def test_diagonal(self):
        eig = herm_eig(np.diag([-1.0, 1.0]))
        np.testing.assert_allclose(eig.eigenvalues, [1.0, -1.0])

    def test_pauli_x(self):
        eig = herm_eig(X)
        np.testing.assert_allclose(eig.eigenvalues, [1.0, -1.0], atol=1e-12)
        plus = np.array([1, 1]) / np.sqrt(2)
        minus = np.array([1, -1]) / np.sqrt(2)
        assert abs(np.vdot(plus, eig.eigenvectors[:, 0])) == pytest.approx(1.0)
        assert abs(np.vdot(minus, eig.eigenvectors[:, 1])) == pytest.approx(1.0)

    def test_bell_polynomial_spectrum(self):
        T = 0.5 * np.eye(4) + 0.25 * (np.kron(X, X) + np.kron(Z, Z))
        np.testing.assert_allclose(herm_eig(T).eigenvalues, [1.0, 0.5, 0.5, 0.0], atol=1e-12)

    def test_rejects_non_hermitian(self):
        with pytest.raises(ContractViolation):
            herm_eig(np.array([[0, 1], [0, 0]]))

    def test_rejects_non_square(self):
        with pytest.raises(ContractViolation):
            herm_eig(np.ones((2, 3)))

    def test_deterministic(self):
        M = random_hermitian(make_rng(5), 6)
        first, second = herm_eig(M), herm_eig(M)
        np.testing.assert_array_equal(first.eigenvalues, second.eigenvalues)
        np.testing.assert_array_equal(first.eigenvectors, second.eigenvectors)

    @settings(max_examples=60, deadline=None)
    @given(seed=seeds, d=st.integers(min_value=1, max_value=16))
    def test_reconstruction(self, seed, d):
        M = random_hermitian(make_rng(seed), d)
        eig = herm_eig(M)
        V = eig.eigenvectors
        assert np.all(np.diff(eig.eigenvalues) <= 1e-12)
        np.testing.assert_allclose(V.conj().T @ V, np.eye(d), atol=1e-10)
        rebuilt = (V * eig.eigenvalues) @ V.conj().T
        assert opnorm(rebuilt - M) <= 1e-10 * max(1.0, opnorm(M))


class TestSchmidt:
    def test_product_state(self):
        decomp = schmidt([1, 0, 0, 0], 2, 2)
        np.testing.assert_allclose(decomp.coefficients, [1.0])

    def test_max_entangled(self):
        decomp = schmidt(max_entangled(3), 3, 3)
        np.testing.assert_allclose(decomp.coefficients, [1 / np.sqrt(3)] * 3, atol=1e-12)

    def test_rotated_product(self):
        decomp = schmidt(np.array([1, 1, 0, 0]) / np.sqrt(2), 2, 2)
        np.testing.assert_allclose(decomp.coefficients, [1.0], atol=1e-12)
        v = decomp.right_vectors[:, 0]
        assert abs(np.vdot(np.array([1, 1]) / np.sqrt(2), v)) == pytest.approx(1.0)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            schmidt(np.ones(5), 2, 3)

    @settings(max_examples=50, deadline=None)
    @given(seed=seeds, dim_a=st.integers(1, 6), dim_b=st.integers(1, 6))
    def test_matches_singular_values(self, seed, dim_a, dim_b):
        psi = haar_state(make_rng(seed), dim_a * dim_b)
        decomp = schmidt(psi, dim_a, dim_b)
        singular = np.linalg.svd(psi.reshape(dim_a, dim_b), compute_uv=False)
        np.testing.assert_allclose(decomp.coefficients, singular[: decomp.rank], atol=1e-12)
        assert np.sum(decomp.coefficients**2) == pytest.approx(1.0, abs=1e-10)
        assert np.linalg.norm(decomp.state() - psi) <= 1e-10


class TestPolar:
    def test_unitary(self):
        U = haar_unitary(make_rng(3), 4)
        W, P = polar(U)
        np.testing.assert_allclose(W, U, atol=1e-10)
        np.testing.assert_allclose(P, np.eye(4), atol=1e-10)

    def test_zero(self):
        W, P = polar(np.zeros((3, 2)))
        assert W.shape == (3, 2) and P.shape == (2, 2)
        assert not W.any() and not P.any()

    def test_diagonal(self):
        W, P = polar(np.diag([3.0, 0.0]))
        np.testing.assert_allclose(W, np.diag([1.0, 0.0]), atol=1e-12)
        np.testing.assert_allclose(P, np.diag([3.0, 0.0]), atol=1e-12)

    @settings(max_examples=50, deadline=None)
    @given(seed=seeds, m=st.integers(1, 6), n=st.integers(1, 6), rank=st.integers(0, 6))
    def test_partial_isometry(self, seed, m, n, rank):
        rng = make_rng(seed)
        rank = min(rank, m, n)
        A = rng.standard_normal((m, rank)) @ rng.standard_normal((rank, n)) + 0j
        W, P = polar(A)
        WW = W.conj().T @ W
        assert opnorm(WW @ WW - WW) <= 1e-10
        assert opnorm(A - W @ P) <= 1e-10 * max(opnorm(A), 1e-300)
        assert np.linalg.matrix_rank(W, tol=1e-8) == np.linalg.matrix_rank(A, tol=1e-8)


class TestSchattenNorm:
    def test_examples(self):
        assert schatten_norm(np.eye(4), 1) == pytest.approx(4.0)
        assert schatten_norm(Z, "inf") == pytest.approx(1.0)
        assert schatten_norm(np.diag([3.0, -4.0]), 2) == pytest.approx(5.0)

    def test_unsupported(self):
        with pytest.raises(ContractViolation):
            schatten_norm(np.eye(2), 3)

    @settings(max_examples=50, deadline=None)
    @given(seed=seeds, d=st.integers(1, 8))
    def test_ordering(self, seed, d):
        rng = make_rng(seed)
        A = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        inf, two, one = (schatten_norm(A, p) for p in (np.inf, 2, 1))
        assert inf <= two + 1e-12 <= one + 2e-12


class TestPartialTrace:
    def test_max_entangled(self):
        psi = max_entangled(2)
        rho = partial_trace(np.outer(psi, psi.conj()), 2, 2, side="B")
        np.testing.assert_allclose(rho, np.eye(2) / 2, atol=1e-12)

    def test_product(self):
        rng = make_rng(11)
        rho = random_povm(rng, 3, 2)[0]
        sigma = random_povm(rng, 2, 2)[1]
        reduced = partial_trace(np.kron(rho, sigma), 3, 2, side="B")
        np.testing.assert_allclose(reduced, rho * np.trace(sigma), atol=1e-12)

    def test_trace_out_a(self):
        ket = np.zeros(4)
        ket[0] = 1.0
        reduced = partial_trace(np.outer(ket, ket), 2, 2, side="A")
        np.testing.assert_allclose(reduced, np.diag([1.0, 0.0]))

    def test_not_factorable(self):
        with pytest.raises(DimensionMismatch):
            partial_trace(np.eye(5), 2, 2, side="A")

    def test_matches_reduced_densities(self):
        psi = haar_state(make_rng(8), 6)
        rho_a, rho_b = reduced_densities(psi, 2, 3)
        full = np.outer(psi, psi.conj())
        np.testing.assert_allclose(partial_trace(full, 2, 3, "B"), rho_a, atol=1e-12)
        np.testing.assert_allclose(partial_trace(full, 2, 3, "A"), rho_b, atol=1e-12)
        assert np.trace(rho_a).real == pytest.approx(1.0, abs=1e-12)


class TestTakagi:
    @settings(max_examples=40, deadline=None)
    @given(seed=seeds, d=st.integers(1, 6), rank=st.integers(1, 6))
    def test_factorises_symmetric(self, seed, d, rank):
        rng = make_rng(seed)
        G = rng.standard_normal((d, min(rank, d))) + 1j * rng.standard_normal((d, min(rank, d)))
        S = G @ G.T
        sigma, U = takagi(S)
        np.testing.assert_allclose(U.conj().T @ U, np.eye(d), atol=1e-9)
        np.testing.assert_allclose((U * sigma) @ U.T, S, atol=1e-9 * max(1.0, opnorm(S)))
        assert np.all(np.diff(sigma) <= 1e-12)

    def test_rejects_non_symmetric(self):
        with pytest.raises(ContractViolation):
            takagi(np.array([[0, 1], [0, 0]]))


def test_transpose_in_standard_basis():
    A = np.arange(4).reshape(2, 2) + 1j
    np.testing.assert_allclose(transpose_in_basis(A, np.eye(2)), A.T)


def test_kron_all():
    np.testing.assert_allclose(kron_all(X, Z, I2), np.kron(np.kron(X, Z), I2))


class TestRandomInstances:
    def test_perturbed_pvm_zero_eta_is_exact(self):
        P = random_instances(4, "perturbed_pvm", 4, 3, eta=0.0)
        for a in range(3):
            np.testing.assert_allclose(P[a] @ P[a], P[a], atol=1e-10)
        np.testing.assert_allclose(P.sum(axis=0), np.eye(4), atol=1e-10)

    def test_single_outcome_povm(self):
        P = random_instances(0, "povm", 3, 1)
        np.testing.assert_array_equal(P, np.eye(3)[None])

    def test_haar_state_norm(self):
        psi = random_instances(9, "haar_state", 4)
        assert np.linalg.norm(psi) == pytest.approx(1.0, abs=1e-12)

    def test_reproducible(self):
        first = random_instances(17, "haar_unitary", 5)
        np.testing.assert_array_equal(first, random_instances(17, "haar_unitary", 5))

    def test_invalid(self):
        with pytest.raises(ContractViolation):
            random_instances(1, "povm", 0, 2)
        with pytest.raises(ContractViolation):
            random_instances(1, "nothing", 2)
        with pytest.raises(BudgetExceeded):
            random_instances(1, "haar_state", 10_000)

    @settings(max_examples=40, deadline=None)
    @given(seed=seeds, d=st.integers(1, 8), n=st.integers(1, 5))
    def test_povm_valid(self, seed, d, n):
        family = random_instances(seed, "povm", d, n)
        assert min(np.linalg.eigvalsh(A).min() for A in family) >= -1e-12
        assert opnorm(family.sum(axis=0) - np.eye(d)) <= 1e-10

    @settings(max_examples=40, deadline=None)
    @given(seed=seeds, eta=st.floats(0.0, 0.2))
    def test_perturbation_distance(self, seed, eta):
        noisy = random_instances(seed, "perturbed_pvm", 4, 3, eta=eta)
        exact = random_instances(seed, "perturbed_pvm", 4, 3, eta=0.0)
        assert max(opnorm(noisy[a] - exact[a]) for a in range(3)) <= eta + 1e-12
