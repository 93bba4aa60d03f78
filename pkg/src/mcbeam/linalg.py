"""Dense complex Hermitian kernels shared by every solver.

Eigendecompositions go through LAPACK (``numpy.linalg.eigh``); the largest
eigenvalue used to size gradient steps is estimated by a deterministic
power iteration so repeated runs are bit-reproducible.
"""

from typing import NamedTuple

import numpy as np

from .errors import InvalidInput

# Relative Frobenius tolerance accepted as "Hermitian".
HERMITIAN_RTOL = 1e-12


class EigDecomposition(NamedTuple):
    """Eigenvalues sorted descending; eigenvectors as matching unitary columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def _check_square_finite(H, name="matrix"):
    H = np.asarray(H)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise InvalidInput(f"{name} must be square, got shape {H.shape}")
    if not np.all(np.isfinite(H.real)) or not np.all(np.isfinite(H.imag)):
        raise InvalidInput(f"{name} contains non-finite entries")
    return np.asarray(H, dtype=np.complex128)


def _check_hermitian(H, name="matrix"):
    H = _check_square_finite(H, name)
    nrm = np.linalg.norm(H)
    skew = np.linalg.norm(H - H.conj().T)
    if skew > max(HERMITIAN_RTOL * nrm, 1e-14):
        raise InvalidInput(
            f"{name} is not Hermitian: ||H - H^H|| = {skew:.3e} for ||H|| = {nrm:.3e}"
        )
    # Symmetrize so downstream results are exactly Hermitian.
    return 0.5 * (H + H.conj().T)


def herm_eig(H) -> EigDecomposition:
    """Eigendecomposition of a Hermitian matrix, eigenvalues descending.

    Raises InvalidInput for non-finite or grossly non-Hermitian input.
    """
    H = _check_hermitian(H)
    vals, vecs = np.linalg.eigh(H)
    return EigDecomposition(vals[::-1].copy(), vecs[:, ::-1].copy())


def psd_project(H):
    """Project a Hermitian matrix onto the PSD cone (Frobenius-nearest).

    Clips negative eigenvalues to zero: U max(L, 0) U^H. Idempotent.
    """
    H = _check_hermitian(H)
    return _psd_project_stack(H[None])[0]


def _psd_project_stack(Hs):
    """Eigenvalue clipping for a stack of Hermitian matrices (no validation)."""
    vals, vecs = np.linalg.eigh(Hs)
    np.maximum(vals, 0.0, out=vals)
    out = (vecs * vals[..., None, :]) @ vecs.conj().swapaxes(-1, -2)
    return 0.5 * (out + out.conj().swapaxes(-1, -2))


def lambda_max(B, tol=1e-6, max_iter=20000):
    """Largest eigenvalue of a PSD matrix via deterministic power iteration.

    Starts from the normalized all-ones vector and iterates until the
    Rayleigh quotient is stable to a fraction of ``tol``; the estimate
    approaches the true value from below, so callers sizing step lengths
    as 2/lambda should pad by O(tol). Returns 0.0 for the zero matrix.
    """
    B = _check_hermitian(B)
    n = B.shape[0]
    if np.linalg.norm(B) == 0.0:
        return 0.0
    # Tiny diagonal shift keeps the iteration well-posed when B is
    # numerically singular; the returned quotient is w.r.t. B itself.
    shift = tol * np.trace(B).real / n
    v = np.full(n, 1.0 / np.sqrt(n), dtype=B.dtype)
    lam = float(np.real(np.vdot(v, B @ v)))
    for _ in range(max_iter):
        w = B @ v + shift * v
        nw = np.linalg.norm(w)
        if nw == 0.0:
            # Start vector happened to be in the null space; nudge it.
            v = v + np.linspace(0.0, 1.0, n) / np.sqrt(n)
            v /= np.linalg.norm(v)
            continue
        v = w / nw
        lam_new = float(np.real(np.vdot(v, B @ v)))
        if abs(lam_new - lam) <= 0.1 * tol * max(abs(lam_new), 1e-300):
            return lam_new
        lam = lam_new
    return lam
