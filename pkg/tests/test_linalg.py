import numpy as np
import pytest
import scipy.linalg

from mcbeam.errors import InvalidInput
from mcbeam.linalg import herm_eig, lambda_max, psd_project

from conftest import rand_hermitian, rand_psd


def test_herm_eig_identity():
    vals, vecs = herm_eig(np.eye(2, dtype=complex))
    assert np.allclose(vals, [1.0, 1.0])
    assert np.allclose(vecs.conj().T @ vecs, np.eye(2), atol=1e-12)


def test_herm_eig_diagonal_descending():
    vals, _ = herm_eig(np.diag([3.0, -1.0]).astype(complex))
    assert np.allclose(vals, [3.0, -1.0])


def test_herm_eig_reconstruction(rng):
    H = rand_hermitian(rng, 6, scale=4.0)
    vals, vecs = herm_eig(H)
    rec = (vecs * vals) @ vecs.conj().T
    assert np.linalg.norm(rec - H) <= 1e-9 * max(1.0, np.linalg.norm(H))
    assert np.linalg.norm(vecs.conj().T @ vecs - np.eye(6)) <= 1e-10
    assert np.all(np.diff(vals) <= 0)


def test_herm_eig_spectral_shift(rng):
    H = rand_hermitian(rng, 5)
    c = 0.73
    v0, _ = herm_eig(H)
    v1, _ = herm_eig(H + c * np.eye(5))
    assert np.allclose(v1, v0 + c, atol=1e-9)


def test_herm_eig_rejects_bad_input(rng):
    with pytest.raises(InvalidInput):
        herm_eig(np.array([[np.nan, 0], [0, 1]], dtype=complex))
    A = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    with pytest.raises(InvalidInput):
        herm_eig(A)  # grossly non-Hermitian
    with pytest.raises(InvalidInput):
        herm_eig(np.zeros((2, 3)))


def test_psd_project_fixed_points(rng):
    P = rand_psd(rng, 5)
    assert np.linalg.norm(psd_project(P) - P) <= 1e-9 * np.linalg.norm(P)
    out = psd_project(np.diag([2.0, -3.0]).astype(complex))
    assert np.allclose(out, np.diag([2.0, 0.0]), atol=1e-12)


def test_psd_project_matches_real_embedding_oracle(rng):
    # Independent route: clip eigenvalues of the 2n x 2n real symmetric
    # embedding [[Re, -Im], [Im, Re]] and map back.
    H = rand_hermitian(rng, 6, scale=3.0)
    n = 6
    R = np.block([[H.real, -H.imag], [H.imag, H.real]])
    vals, vecs = scipy.linalg.eigh(R)
    Rp = (vecs * np.clip(vals, 0, None)) @ vecs.T
    oracle = Rp[:n, :n] + 1j * Rp[n:, :n]
    assert np.linalg.norm(psd_project(H) - oracle) <= 1e-9 * max(1, np.linalg.norm(H))


def test_psd_project_is_nearest(rng):
    # No PSD matrix may be closer in Frobenius norm than the projection.
    H = rand_hermitian(rng, 5, scale=2.0)
    P = psd_project(H)
    d = np.linalg.norm(H - P)
    for _ in range(25):
        C = rand_psd(rng, 5)
        assert np.linalg.norm(H - C) >= d - 1e-12


def test_psd_project_idempotent_and_psd(rng):
    for _ in range(10):
        H = rand_hermitian(rng, 7)
        P = psd_project(H)
        assert np.linalg.norm(psd_project(P) - P) <= 1e-9 * max(1, np.linalg.norm(P))
        u = rng.standard_normal(7) + 1j * rng.standard_normal(7)
        u /= np.linalg.norm(u)
        assert np.real(u.conj() @ P @ u) >= -1e-10


def test_lambda_max_diagonal():
    assert lambda_max(np.diag([5.0, 1.0]).astype(complex)) == pytest.approx(5.0, rel=5e-6)


def test_lambda_max_rank_one(rng):
    h = rng.standard_normal(6) + 1j * rng.standard_normal(6)
    B = np.outer(h, h.conj())
    assert lambda_max(B) == pytest.approx(np.linalg.norm(h) ** 2, rel=1e-6)


def test_lambda_max_matches_eigh(rng):
    B = rand_psd(rng, 8)
    top = herm_eig(B).eigenvalues[0]
    assert lambda_max(B, tol=1e-6) == pytest.approx(top, rel=1e-6)


def test_lambda_max_zero_matrix():
    assert lambda_max(np.zeros((4, 4))) == 0.0
