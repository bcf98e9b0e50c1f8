"""Transmit covariance update for fixed IRS phases.

The Eve rate is linearized around the previous covariance, which turns the
secrecy rate into a concave lower bound in X. That bound is maximized under
tr(X) <= P0 by water-filling over the eigenmodes of
(Phi + mu I)^-1/2 H_B^H H_B (Phi + mu I)^-1/2, with the multiplier mu found
by bisection.
"""

import math
from dataclasses import dataclass

import numpy as np

from .numerics import IllConditionedError, NumericsError, hermitize, inv_sqrt_hpd
from .rates import InputCovariance, rate_unchecked

__all__ = [
    "UnboundedPowerError",
    "BisectionError",
    "BisectionReport",
    "eve_gradient_matrix",
    "surrogate_value",
    "waterfill_given_mu",
    "optimize_covariance",
    "kkt_residuals",
]

RANK_RTOL = 1e-12
PHI_PD_RTOL = 1e-12
MU_LO = 1e-12
POWER_RTOL = 1e-8
MAX_BISECTIONS = 200


class UnboundedPowerError(IllConditionedError):
    """Phi + mu I is singular, so the unconstrained water level is unbounded."""


class BisectionError(NumericsError):
    def __init__(self, message, report):
        super().__init__(message)
        self.report = report


@dataclass(frozen=True)
class BisectionReport:
    mu: float
    iterations: int
    residual: float
    slack: bool = False


def eve_gradient_matrix(H_E, X_prev):
    """Phi = H_E^H (I + H_E X_prev H_E^H)^-1 H_E, the gradient of Eve's rate."""
    H_E = np.asarray(H_E, dtype=complex)
    X_prev = np.asarray(getattr(X_prev, "X", X_prev), dtype=complex)
    A = np.eye(H_E.shape[0]) + H_E @ X_prev @ H_E.conj().T
    return hermitize(H_E.conj().T @ np.linalg.solve(A, H_E))


def surrogate_value(H_B, H_E, X, X_prev, Phi=None):
    """Concave lower bound on C_B - C_E that is tight at ``X = X_prev``."""
    H_B = np.asarray(H_B, dtype=complex)
    H_E = np.asarray(H_E, dtype=complex)
    X = np.asarray(getattr(X, "X", X), dtype=complex)
    X_prev = np.asarray(getattr(X_prev, "X", X_prev), dtype=complex)
    if Phi is None:
        Phi = eve_gradient_matrix(H_E, X_prev)
    return (rate_unchecked(H_B, X) - rate_unchecked(H_E, X_prev)
            - float(np.real(np.trace(Phi @ (X - X_prev)))))


def _allocation(sigma):
    x = np.zeros_like(sigma)
    if sigma.size and sigma[0] > 0:
        keep = sigma > RANK_RTOL * sigma[0]
        x[keep] = np.maximum(1.0 - 1.0 / sigma[keep], 0.0)
    return x


def waterfill_given_mu(H_B, Phi, mu):
    """Maximizer of ln|I + H_B X H_B^H| - tr((Phi + mu I) X) over X >= 0.

    Raises UnboundedPowerError when ``Phi + mu I`` is not safely invertible
    (typically mu = 0 with a rank-deficient Phi).
    """
    H_B = np.asarray(H_B, dtype=complex)
    Phi = np.asarray(Phi, dtype=complex)
    nt = Phi.shape[0]
    if not np.any(H_B):
        return np.zeros((nt, nt), dtype=complex)
    try:
        T = inv_sqrt_hpd(Phi + mu * np.eye(nt))
    except IllConditionedError as exc:
        raise UnboundedPowerError(f"power diverges at mu = {mu:g}") from exc
    K = hermitize(T @ H_B.conj().T @ H_B @ T)
    sigma, U = np.linalg.eigh(K)
    sigma, U = sigma[::-1], U[:, ::-1]
    F = T @ U
    return hermitize((F * _allocation(sigma)) @ F.conj().T)


class _WaterFiller:
    """Water-filling for a fixed (H_B, Phi) across many values of mu."""

    def __init__(self, H_B, Phi):
        self.G = hermitize(H_B.conj().T @ H_B)
        ev, self.V = np.linalg.eigh(Phi)
        self.ev = np.clip(ev, 0.0, None)

    def phi_is_pd(self):
        top = self.ev[-1]
        return top > 0 and self.ev[0] > PHI_PD_RTOL * top

    def __call__(self, mu):
        d = (self.ev + mu) ** -0.5
        F0 = self.V * d
        K = hermitize(F0.conj().T @ self.G @ F0)
        sigma, U = np.linalg.eigh(K)
        sigma, U = sigma[::-1], U[:, ::-1]
        F = F0 @ U
        x = _allocation(sigma)
        power = float(np.sum(x * np.sum(np.abs(F) ** 2, axis=0)))
        return F, x, power

    @staticmethod
    def assemble(F, x):
        return hermitize((F * x) @ F.conj().T)


def _clean(X):
    w, V = np.linalg.eigh(hermitize(X))
    w = np.clip(w, 0.0, None)
    return hermitize((V * w) @ V.conj().T)


def optimize_covariance(H_B, H_E, X_prev, P0, Phi=None):
    """Maximize the linearized secrecy rate over {X >= 0, tr(X) <= P0}.

    Parameters
    ----------
    H_B, H_E : ndarray
        Noise-normalized composite channels of Bob and Eve.
    X_prev : InputCovariance or ndarray
        Linearization point.
    P0 : float
        Power budget in watts.
    Phi : ndarray, optional
        Precomputed :func:`eve_gradient_matrix` at ``X_prev``.

    Returns
    -------
    (InputCovariance, BisectionReport)
    """
    if not P0 > 0:
        raise ValueError("P0 must be > 0")
    H_B = np.asarray(H_B, dtype=complex)
    nt = H_B.shape[1]
    if Phi is None:
        Phi = eve_gradient_matrix(H_E, X_prev)
    if not np.any(H_B):
        return (InputCovariance(np.zeros((nt, nt), dtype=complex), P0),
                BisectionReport(mu=0.0, iterations=0, residual=P0, slack=True))

    wf = _WaterFiller(H_B, Phi)
    if wf.phi_is_pd():
        F, x, power = wf(0.0)
        if power <= P0:
            return (InputCovariance(_clean(wf.assemble(F, x)), P0),
                    BisectionReport(mu=0.0, iterations=0, residual=P0 - power, slack=True))

    iterations = 0
    hi = 1.0
    F_hi, x_hi, p_hi = wf(hi)
    while p_hi >= P0:
        iterations += 1
        if iterations > MAX_BISECTIONS:
            raise BisectionError("could not bracket the multiplier",
                                 BisectionReport(hi, iterations, p_hi - P0))
        hi *= 2.0
        F_hi, x_hi, p_hi = wf(hi)

    lo = MU_LO
    F_lo, x_lo, p_lo = wf(lo)
    if p_lo <= P0:
        # power stays bounded as mu -> 0: H_B has no energy in Phi's null space
        return (InputCovariance(_clean(wf.assemble(F_lo, x_lo)), P0),
                BisectionReport(mu=lo, iterations=iterations, residual=P0 - p_lo, slack=True))

    while P0 - p_hi > POWER_RTOL * P0:
        iterations += 1
        if iterations > MAX_BISECTIONS:
            raise BisectionError("multiplier bisection did not converge",
                                 BisectionReport(hi, iterations, P0 - p_hi))
        # geometric steps while the bracket spans decades, then arithmetic
        mid = math.sqrt(lo * hi) if hi > 4 * lo else 0.5 * (lo + hi)
        F, x, p = wf(mid)
        if p > P0:
            lo = mid
        else:
            hi, F_hi, x_hi, p_hi = mid, F, x, p
        if hi - lo <= 4 * np.finfo(float).eps * hi:
            break

    X = _clean(wf.assemble(F_hi, x_hi))
    return (InputCovariance(X, P0),
            BisectionReport(mu=hi, iterations=iterations, residual=abs(P0 - p_hi)))


def kkt_residuals(H_B, Phi, X, mu, pos_rtol=1e-8):
    """Stationarity residuals of the water-filling solution.

    Returns ``(max_eig, max_active)``: the largest eigenvalue of
    ``H_B^H (I + H_B X H_B^H)^-1 H_B - Phi - mu I`` (should be <= 0) and the
    largest |u^H (.) u| over eigenvectors u of X with positive eigenvalue
    (should vanish).
    """
    H_B = np.asarray(H_B, dtype=complex)
    X = np.asarray(getattr(X, "X", X), dtype=complex)
    nt = X.shape[0]
    A = np.eye(H_B.shape[0]) + H_B @ X @ H_B.conj().T
    Gr = hermitize(H_B.conj().T @ np.linalg.solve(A, H_B) - Phi - mu * np.eye(nt))
    max_eig = float(np.linalg.eigvalsh(Gr)[-1])
    w, V = np.linalg.eigh(hermitize(X))
    active = w > pos_rtol * max(w[-1], np.finfo(float).tiny)
    if not np.any(active):
        return max_eig, 0.0
    Va = V[:, active]
    quad = np.real(np.einsum("ij,ik,kj->j", Va.conj(), Gr, Va))
    return max_eig, float(np.max(np.abs(quad)))
