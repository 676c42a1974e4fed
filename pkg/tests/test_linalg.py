import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from skewsharp.linalg import (
    DensityMatrix,
    InvalidState,
    NonHermitianInput,
    NotPSD,
    det_hermitian,
    is_psd,
    matrix_sqrt_psd,
    spectral_decompose,
)

from conftest import SX, random_hermitian


def test_spectral_identity():
    es = spectral_decompose(np.eye(2, dtype=complex))
    assert np.allclose(es.eigenvalues, [1.0, 1.0])
    assert np.allclose(es.eigenvectors.conj().T @ es.eigenvectors, np.eye(2))


def test_spectral_diagonal_descending():
    es = spectral_decompose(np.diag([0.25, 0.75]).astype(complex))
    assert np.allclose(es.eigenvalues, [0.75, 0.25])
    assert np.allclose(np.abs(es.eigenvectors), [[0, 1], [1, 0]])


def test_spectral_pauli_x():
    es = spectral_decompose(SX)
    assert np.allclose(es.eigenvalues, [1.0, -1.0])
    v = es.eigenvectors[:, 0]
    assert np.allclose(np.abs(v), [1 / np.sqrt(2)] * 2)


def test_spectral_rejects_nonhermitian():
    with pytest.raises(NonHermitianInput):
        spectral_decompose(np.array([[0, 1], [0, 0]], dtype=complex))


def test_sqrt_diagonal():
    assert np.allclose(matrix_sqrt_psd(np.diag([4.0, 9.0]).astype(complex)), np.diag([2.0, 3.0]))
    assert np.allclose(matrix_sqrt_psd(np.eye(3, dtype=complex)), np.eye(3))
    R = matrix_sqrt_psd(np.diag([0.75, 0.25]).astype(complex))
    assert np.allclose(R, np.diag([np.sqrt(3) / 2, 0.5]))


def test_sqrt_rejects_negative():
    with pytest.raises(NotPSD):
        matrix_sqrt_psd(np.diag([1.0, -0.1]).astype(complex))


def test_is_psd_reports_min_eigenvalue():
    chk = is_psd(np.eye(4, dtype=complex), tol=1e-9)
    assert chk.verdict and np.isclose(chk.min_eigenvalue, 1.0)
    chk = is_psd(np.diag([1.0, -0.1]).astype(complex), tol=1e-9)
    assert not chk.verdict and np.isclose(chk.min_eigenvalue, -0.1)


def test_det_examples():
    assert np.isclose(det_hermitian(np.diag([2.0, 3.0]).astype(complex)), 6.0)
    assert np.isclose(det_hermitian(np.eye(5, dtype=complex)), 1.0)
    # i*delta for the saturating qubit fixture: eigenvalues +-1/2
    i_delta = np.array([[0, -0.5j], [0.5j, 0]])
    assert np.isclose(det_hermitian(i_delta), -0.25)
    assert np.isclose(abs(det_hermitian(i_delta)), 0.25)


@settings(max_examples=60, deadline=None)
@given(dim=st.integers(2, 16), seed=st.integers(0, 2**32 - 1))
def test_reconstruction_property(dim, seed):
    A = random_hermitian(np.random.default_rng(seed), dim)
    es = spectral_decompose(A)
    scale = max(1.0, np.abs(A).max())
    assert np.abs(es.reconstruct() - A).max() <= 1e-10 * scale
    assert np.abs(es.eigenvectors.conj().T @ es.eigenvectors - np.eye(dim)).max() <= 1e-10
    assert np.all(np.diff(es.eigenvalues) <= 1e-12)


@settings(max_examples=60, deadline=None)
@given(dim=st.integers(1, 16), seed=st.integers(0, 2**32 - 1))
def test_sqrt_squares_back(dim, seed):
    rng = np.random.default_rng(seed)
    G = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    A = G @ G.conj().T
    R = matrix_sqrt_psd(A)
    assert np.abs(R @ R - A).max() <= 1e-10 * max(1.0, np.abs(A).max())
    assert np.linalg.eigvalsh(R)[0] >= -1e-12 * max(1.0, np.abs(R).max())


@settings(max_examples=60, deadline=None)
@given(dim=st.integers(1, 16), seed=st.integers(0, 2**32 - 1))
def test_det_matches_lu(dim, seed):
    A = random_hermitian(np.random.default_rng(seed), dim)
    d_eig = det_hermitian(A)
    d_lu = np.linalg.det(A)  # LU-based reference
    assert abs(d_lu.imag) <= 1e-10 * max(1.0, abs(d_lu))
    assert np.isclose(d_eig, d_lu.real, rtol=1e-10, atol=1e-13)


def test_density_matrix_validation():
    rho = DensityMatrix.from_matrix(np.diag([0.75, 0.25]).astype(complex))
    assert rho.dim == 2 and np.allclose(rho.eigenvalues, [0.75, 0.25])
    assert np.allclose(rho.sqrt, np.diag([np.sqrt(3) / 2, 0.5]))
    with pytest.raises(InvalidState, match="trace"):
        DensityMatrix.from_matrix(np.diag([0.7, 0.2]).astype(complex))
    with pytest.raises(InvalidState):
        DensityMatrix.from_matrix(np.diag([1.2, -0.2]).astype(complex))
    with pytest.raises(NonHermitianInput):
        DensityMatrix.from_matrix(np.array([[0.5, 0.3], [0.0, 0.5]], dtype=complex))


def test_density_clips_tiny_negative():
    rho = DensityMatrix.from_matrix(np.diag([1.0 + 5e-10, -5e-10]).astype(complex))
    assert rho.eigenvalues[-1] == 0.0
    assert rho.rank() == 1


def test_basis_freedom_in_degenerate_subspace():
    # formulas downstream only use the eigenprojections; reconstruct must match
    A = np.diag([2.0, 2.0, 1.0]).astype(complex)
    es = spectral_decompose(A)
    assert np.abs(es.reconstruct() - A).max() <= 1e-12
