"""Dense complex linear-algebra helpers used by the optimizer.

Everything here is a pure function of its inputs. Eigenvalues are returned
in descending order and each eigenvector is rotated so that its
largest-magnitude component is real and positive, which makes results
reproducible and easy to compare in tests.
"""

import numpy as np

__all__ = [
    "NumericsError",
    "DimensionError",
    "NotHermitianError",
    "NotPositiveDefiniteError",
    "IllConditionedError",
    "hermitize",
    "check_hermitian",
    "hermitian_evd",
    "logdet_pd",
    "inv_sqrt_hpd",
    "sqrtm_psd",
]

# relative asymmetry accepted before a matrix is rejected as non-Hermitian
HERMITIAN_RTOL = 1e-10


class NumericsError(ValueError):
    """Base class for domain errors raised by the linear-algebra layer."""


class DimensionError(NumericsError):
    pass


class NotHermitianError(NumericsError):
    pass


class NotPositiveDefiniteError(NumericsError):
    pass


class IllConditionedError(NumericsError):
    pass


def hermitize(M):
    """Return the Hermitian part (M + M^H) / 2."""
    M = np.asarray(M)
    return 0.5 * (M + M.conj().T)


def check_hermitian(M, rtol=HERMITIAN_RTOL):
    """Validate that `M` is square and Hermitian; return it as a complex array."""
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {M.shape}")
    scale = np.linalg.norm(M)
    if np.linalg.norm(M - M.conj().T) > rtol * max(scale, np.finfo(float).tiny):
        raise NotHermitianError("matrix is not Hermitian")
    return M


def hermitian_evd(M):
    """Eigendecomposition of a Hermitian matrix.

    Parameters
    ----------
    M : (n, n) array_like
        Hermitian matrix.

    Returns
    -------
    U : (n, n) ndarray
        Unitary matrix whose columns are eigenvectors.
    w : (n,) ndarray
        Real eigenvalues in descending order, so that
        ``U @ diag(w) @ U^H == M``.
    """
    M = hermitize(check_hermitian(M))
    w, U = np.linalg.eigh(M)
    w = w[::-1].copy()
    U = U[:, ::-1].copy()
    if U.size:
        idx = np.argmax(np.abs(U), axis=0)
        pivots = U[idx, np.arange(U.shape[1])]
        U *= (np.abs(pivots) / pivots)[np.newaxis, :]
    return U, w


def logdet_pd(M):
    """Natural log-determinant of a Hermitian positive definite matrix.

    Computed from the Cholesky factor; a failed factorization (a pivot that
    is not strictly positive) raises NotPositiveDefiniteError.
    """
    M = hermitize(check_hermitian(M))
    if M.shape[0] == 0:
        return 0.0
    try:
        L = np.linalg.cholesky(M)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefiniteError("matrix is not positive definite") from exc
    d = np.diagonal(L).real
    if np.any(d <= 0):
        raise NotPositiveDefiniteError("matrix is not positive definite")
    return float(2.0 * np.sum(np.log(d)))


def inv_sqrt_hpd(M, cond_floor=1e-14):
    """Principal inverse square root M^{-1/2} of a Hermitian PD matrix.

    Raises IllConditionedError when the smallest eigenvalue is not above
    ``cond_floor`` times the largest one.
    """
    U, w = hermitian_evd(M)
    if w.size == 0:
        return np.zeros((0, 0), dtype=complex)
    top = max(abs(w[0]), np.finfo(float).tiny)
    if w[-1] <= cond_floor * top:
        raise IllConditionedError(
            f"eigenvalue ratio {w[-1] / top:.3e} too small for an inverse square root"
        )
    return hermitize((U * w ** -0.5) @ U.conj().T)


def sqrtm_psd(M, neg_tol=1e-10):
    """Principal square root of a Hermitian PSD matrix.

    Eigenvalues in ``[-neg_tol * max|w|, 0)`` are treated as roundoff and
    clamped to zero; anything more negative raises NotPositiveDefiniteError.
    """
    U, w = hermitian_evd(M)
    if w.size == 0:
        return np.zeros((0, 0), dtype=complex)
    scale = max(np.max(np.abs(w)), np.finfo(float).tiny)
    if w[-1] < -neg_tol * scale:
        raise NotPositiveDefiniteError(f"matrix has negative eigenvalue {w[-1]:.3e}")
    w = np.clip(w, 0.0, None)
    return hermitize((U * np.sqrt(w)) @ U.conj().T)
