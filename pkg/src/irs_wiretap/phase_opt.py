"""Closed-form single-element phase updates for the IRS.

With X and every other phase fixed, the secrecy objective as a function of
one reflection coefficient theta (|theta| = 1) is, up to a constant,

    ln (2 Re(g_b theta) + d_b) - ln (2 Re(g_e theta) + d_e)

where g_u is the only nonzero eigenvalue of P^-1 Q (Bob) or R^-1 S (Eve) and
d_u comes from the rank-2 determinant identity. Writing theta = exp(j phi),
the ratio is a quotient of two shifted cosines whose stationary points have
a closed form; the best of those and phi = 0 is the exact maximizer.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np

from .numerics import NotPositiveDefiniteError, sqrtm_psd
from .rates import PhaseVector, as_theta

__all__ = [
    "PhaseSubproblem",
    "build_subproblem",
    "gamma_delta",
    "rank1_factors",
    "ratio_objective",
    "optimize_phase",
    "sweep_phases",
    "covariance_sqrt",
]

log = logging.getLogger(__name__)

GRID_FALLBACK_SIZE = 4096
ARCSIN_SLACK = 1e-9
X_NEG_ATOL = 1e-8


@dataclass(frozen=True)
class PhaseSubproblem:
    """Coefficients of the single-element problem for IRS element ``index``.

    ``P``, ``Q``, ``R`` and ``S`` are only populated by
    :func:`build_subproblem`; the sweep works from the scalars alone.
    """

    index: int
    gamma_b: complex
    delta_b: float
    gamma_e: complex
    delta_e: float
    theta: complex = 1.0
    P: np.ndarray = None
    Q: np.ndarray = None
    R: np.ndarray = None
    S: np.ndarray = None

    @property
    def lambda_b(self):
        return 2 * abs(self.gamma_b)

    @property
    def lambda_e(self):
        return 2 * abs(self.gamma_e)

    @property
    def phi_b(self):
        return float(np.angle(self.gamma_b))

    @property
    def phi_e(self):
        return float(np.angle(self.gamma_e))

    def f(self, phi):
        """Objective ratio at angle(s) `phi`."""
        return ratio_objective(phi, self.gamma_b, self.delta_b, self.gamma_e, self.delta_e)

    def stationary_params(self):
        """(lambda_i, psi_i, sine argument) of the stationarity condition.

        f'(phi) = 0 reduces to ``lambda_i sin(phi - psi_i) = lb le sin(ab - ae)``
        with ``ab = -angle(gamma_b)`` and ``ae = -angle(gamma_e)``.
        """
        lb, le = self.lambda_b, self.lambda_e
        db, de = self.delta_b, self.delta_e
        ab, ae = -self.phi_b, -self.phi_e
        c = lb * de * math.cos(ab) - le * db * math.cos(ae)
        s = lb * de * math.sin(ab) - le * db * math.sin(ae)
        lam = math.hypot(c, s)
        psi = math.atan2(s, c)
        rhs = lb * le * math.sin(ab - ae)
        return lam, psi, rhs


def ratio_objective(phi, gamma_b, delta_b, gamma_e, delta_e):
    """(2 Re(g_b e^{j phi}) + d_b) / (2 Re(g_e e^{j phi}) + d_e)."""
    theta = np.exp(1j * np.asarray(phi, dtype=float))
    num = 2 * np.real(gamma_b * theta) + delta_b
    den = 2 * np.real(gamma_e * theta) + delta_e
    return num / den


def rank1_factors(Q, rtol=1e-10):
    """Vectors (u, v) with Q = u v^H for a numerically rank-one matrix."""
    Q = np.asarray(Q, dtype=complex)
    U, s, Vh = np.linalg.svd(Q)
    if s.size == 0 or s[0] == 0:
        return np.zeros(Q.shape[0], complex), np.zeros(Q.shape[1], complex)
    if s.size > 1 and s[1] > rtol * s[0]:
        raise ValueError(f"matrix is not rank one (s2/s1 = {s[1] / s[0]:.3e})")
    return U[:, 0] * s[0], Vh[0].conj()


def gamma_delta(P, u, v):
    """Scalars (gamma, delta) for ``Q = u v^H``.

    gamma = v^H P^-1 u is the nonzero eigenvalue (and trace) of P^-1 Q, and
    delta = 1 + |gamma|^2 - (v^H P^-1 v)(u^H P^-1 u), so that
    ``|I + theta P^-1 Q + conj(theta) P^-1 Q^H| = 2 Re(gamma theta) + delta``
    for every unit-modulus theta.
    """
    P = np.asarray(P, dtype=complex)
    u = np.asarray(u, dtype=complex).reshape(-1)
    v = np.asarray(v, dtype=complex).reshape(-1)
    try:
        L = np.linalg.cholesky(P)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefiniteError("P must be positive definite") from exc
    # whiten: with L L^H = P, x^H P^-1 y = (L^-1 x)^H (L^-1 y)
    W = np.linalg.solve(L, np.column_stack([u, v]))
    wu, wv = W[:, 0], W[:, 1]
    gamma = complex(np.vdot(wv, wu))
    pu = float(np.vdot(wu, wu).real)
    pv = float(np.vdot(wv, wv).real)
    delta = 1.0 + abs(gamma) ** 2 - pu * pv
    return gamma, delta


def covariance_sqrt(X):
    """Principal square root of a covariance, rejecting eigenvalues below -1e-8."""
    X = np.asarray(getattr(X, "X", X), dtype=complex)
    w = np.linalg.eigvalsh(0.5 * (X + X.conj().T)) if X.size else np.zeros(0)
    if w.size and w[0] < -X_NEG_ATOL:
        raise NotPositiveDefiniteError(f"covariance has eigenvalue {w[0]:.3e}")
    scale = max(np.max(np.abs(w)), np.finfo(float).tiny) if w.size else 1.0
    return sqrtm_psd(X, neg_tol=max(1e-10, X_NEG_ATOL / scale))


class _SweepState:
    """Running aggregates H_hat + sum_j theta_j h_j hhat_j^H for Bob and Eve."""

    def __init__(self, ch, theta, Xh):
        self.hb = ch.Hn_IB
        self.he = ch.Hn_IE
        # row i of Hai is hhat_i^H
        self.Hai = ch.H_AI @ Xh
        self.rebuild(ch, theta, Xh)

    def rebuild(self, ch, theta, Xh):
        reflected = theta[:, np.newaxis] * self.Hai
        self.Pb = ch.Hn_AB @ Xh + self.hb @ reflected
        self.Pe = ch.Hn_AE @ Xh + self.he @ reflected

    def element(self, i, theta_i):
        a = self.Hai[i]
        c = a.conj()
        cc = float(np.vdot(a, a).real)
        gb, db = _side(self.Pb, self.hb[:, i], a, c, cc, theta_i)
        ge, de = _side(self.Pe, self.he[:, i], a, c, cc, theta_i)
        return gb, db, ge, de

    def update(self, i, delta_theta):
        a = self.Hai[i]
        self.Pb += delta_theta * np.outer(self.hb[:, i], a)
        self.Pe += delta_theta * np.outer(self.he[:, i], a)


def _side(Ptot, h, a, c, cc, theta_i):
    M = Ptot - theta_i * np.outer(h, a)
    Pi = M @ M.conj().T + cc * np.outer(h, h.conj())
    Pi[np.diag_indices_from(Pi)] += 1.0
    return gamma_delta(Pi, h, M @ c)


def build_subproblem(ch, theta, X, i):
    """Full subproblem for element `i` (0-based) at the current point.

    P_i = I + (P - theta_i h_i hhat_i^H)(...)^H + h_i hhat_i^H hhat_i h_i^H and
    Q_i = h_i hhat_i^H (P - theta_i h_i hhat_i^H)^H, with
    P = Hn_AB X^1/2 + sum_j theta_j h_j hhat_j^H; R_i and S_i likewise for Eve.
    """
    theta = as_theta(theta)
    if not 0 <= i < theta.size:
        raise IndexError(f"element index {i} out of range for N = {theta.size}")
    Xh = covariance_sqrt(X)
    st = _SweepState(ch, theta, Xh)
    a = st.Hai[i]
    c = a.conj()
    cc = float(np.vdot(a, a).real)
    mats = []
    coeffs = []
    for Ptot, h in ((st.Pb, st.hb[:, i]), (st.Pe, st.he[:, i])):
        M = Ptot - theta[i] * np.outer(h, a)
        Pi = np.eye(h.size) + M @ M.conj().T + cc * np.outer(h, h.conj())
        Qi = np.outer(h, c.conj()) @ M.conj().T
        mats.append((0.5 * (Pi + Pi.conj().T), Qi))
        coeffs.append(gamma_delta(Pi, h, M @ c))
    (P, Q), (R, S) = mats
    (gb, db), (ge, de) = coeffs
    return PhaseSubproblem(index=i, gamma_b=gb, delta_b=db, gamma_e=ge, delta_e=de,
                           theta=complex(theta[i]), P=P, Q=Q, R=R, S=S)


def _grid_best(sp, size=GRID_FALLBACK_SIZE):
    grid = np.arange(size) * (2 * np.pi / size)
    vals = sp.f(grid)
    k = int(np.argmax(vals))
    return float(grid[k])


def optimize_phase(sp):
    """Maximize the ratio objective of `sp` over the unit circle.

    Returns ``(theta_star, f_star)``. The current coefficient ``sp.theta`` is
    kept whenever no candidate strictly improves on it, which covers the
    degenerate constant-ratio case.
    """
    gb, ge = sp.gamma_b, sp.gamma_e
    tiny_b = abs(gb) <= 1e-15 * abs(sp.delta_b)
    tiny_e = abs(ge) <= 1e-15 * abs(sp.delta_e)
    current_phi = float(np.angle(sp.theta))
    f_current = float(sp.f(current_phi))

    if tiny_b and tiny_e:
        return complex(sp.theta), f_current
    if tiny_e:
        candidates = [-sp.phi_b]
    elif tiny_b:
        candidates = [np.pi - sp.phi_e]
    else:
        lam, psi, rhs = sp.stationary_params()
        arg = rhs / lam if lam > 0 else math.inf
        if not math.isfinite(arg) or abs(arg) > 1 + ARCSIN_SLACK:
            log.warning("phase update for element %d fell back to a %d-point grid",
                        sp.index, GRID_FALLBACK_SIZE)
            candidates = [_grid_best(sp)]
        else:
            base = math.asin(min(1.0, max(-1.0, arg)))
            candidates = [0.0, base + psi, np.pi - base + psi]

    vals = sp.f(np.asarray(candidates))
    k = int(np.argmax(vals))
    if vals[k] <= f_current:
        return complex(sp.theta), f_current
    phi = float(np.mod(candidates[k], 2 * np.pi))
    return complex(np.exp(1j * phi)), float(vals[k])


def sweep_phases(ch, theta, X, return_gains=False):
    """One Gauss-Seidel pass of closed-form updates over all IRS elements.

    Parameters
    ----------
    ch : ChannelSet
    theta : PhaseVector or array_like
        Starting reflection coefficients.
    X : InputCovariance or array_like
        Fixed transmit covariance.
    return_gains : bool
        Also return the per-element objective increments
        ``ln f(new) - ln f(old)`` (each is >= 0).

    Returns
    -------
    PhaseVector, and optionally an (N,) array of increments.
    """
    theta = as_theta(theta).copy()
    gains = np.zeros(theta.size)
    if theta.size == 0:
        out = PhaseVector(theta)
        return (out, gains) if return_gains else out
    Xh = covariance_sqrt(X)
    st = _SweepState(ch, theta, Xh)
    for i in range(theta.size):
        gb, db, ge, de = st.element(i, theta[i])
        sp = PhaseSubproblem(i, gb, db, ge, de, theta=theta[i])
        new, f_new = optimize_phase(sp)
        if new != theta[i]:
            gains[i] = math.log(f_new) - math.log(float(sp.f(np.angle(theta[i]))))
            st.update(i, new - theta[i])
            theta[i] = new
    out = PhaseVector(theta)
    return (out, gains) if return_gains else out
