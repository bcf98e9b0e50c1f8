"""Composite channels and Gaussian-input rates (all rates in nats)."""

from dataclasses import dataclass

import numpy as np

from .numerics import NotPositiveDefiniteError, hermitian_evd, hermitize, logdet_pd

__all__ = [
    "PhaseVector",
    "InputCovariance",
    "EffectiveChannels",
    "RateReport",
    "as_theta",
    "check_psd",
    "effective_channels",
    "rate",
    "secrecy_rate",
    "secrecy_objective",
    "nats_to_bits",
]

UNIT_MODULUS_TOL = 1e-10
PSD_RTOL = 1e-10
TRACE_RTOL = 1e-8


def nats_to_bits(x):
    return np.asarray(x) / np.log(2.0)


@dataclass(frozen=True)
class PhaseVector:
    """Unit-modulus IRS reflection coefficients."""

    theta: np.ndarray

    def __post_init__(self):
        theta = np.asarray(self.theta, dtype=complex).reshape(-1)
        if theta.size and np.max(np.abs(np.abs(theta) - 1.0)) > UNIT_MODULUS_TOL:
            raise ValueError("reflection coefficients must have unit modulus")
        object.__setattr__(self, "theta", theta)

    @classmethod
    def from_angles(cls, phi):
        return cls(np.exp(1j * np.asarray(phi, dtype=float)))

    @classmethod
    def ones(cls, n):
        return cls(np.ones(n, dtype=complex))

    @classmethod
    def uniform_random(cls, n, rng):
        return cls.from_angles(rng.uniform(0.0, 2 * np.pi, size=n))

    @property
    def phi(self):
        """Angles in [0, 2 pi)."""
        phi = np.mod(np.angle(self.theta), 2 * np.pi)
        # mod of a tiny negative angle rounds up to exactly 2 pi
        return np.where(phi >= 2 * np.pi, 0.0, phi)

    def __len__(self):
        return self.theta.size


def as_theta(theta):
    """Plain complex vector from a PhaseVector or array_like."""
    return np.asarray(getattr(theta, "theta", theta), dtype=complex).reshape(-1)


def check_psd(X, rtol=PSD_RTOL, atol=0.0):
    """Validate a Hermitian PSD matrix and return its Hermitian part."""
    X = np.asarray(X, dtype=complex)
    if X.size == 0:
        return X
    _, w = hermitian_evd(X)
    scale = max(abs(w[0]), abs(w[-1]))
    if w[-1] < -(rtol * scale + atol):
        raise NotPositiveDefiniteError(f"covariance has negative eigenvalue {w[-1]:.3e}")
    return hermitize(X)


@dataclass(frozen=True)
class InputCovariance:
    """Transmit covariance X (watts) with its power budget P0."""

    X: np.ndarray
    P0: float

    def __post_init__(self):
        if not self.P0 > 0:
            raise ValueError("P0 must be > 0")
        X = check_psd(self.X)
        if np.trace(X).real > self.P0 * (1 + TRACE_RTOL):
            raise ValueError(f"trace {np.trace(X).real:.6g} exceeds budget {self.P0:.6g}")
        object.__setattr__(self, "X", X)

    @classmethod
    def scaled_identity(cls, nt, P0):
        return cls(np.eye(nt, dtype=complex) * (P0 / nt), P0)

    @property
    def power(self):
        return float(np.trace(self.X).real)


@dataclass(frozen=True)
class EffectiveChannels:
    """Noise-normalized composite channels seen by Bob and Eve."""

    H_B: np.ndarray
    H_E: np.ndarray


@dataclass(frozen=True)
class RateReport:
    C_B: float
    C_E: float
    C_s: float

    @property
    def objective(self):
        """Unclamped difference C_B - C_E."""
        return self.C_B - self.C_E


def effective_channels(ch, theta):
    """H_B = Hn_AB + Hn_IB diag(theta) H_AI and the Eve analogue."""
    theta = as_theta(theta)
    if theta.size != ch.N:
        raise ValueError(f"phase vector has {theta.size} entries, channel has N = {ch.N}")
    reflected = theta[:, np.newaxis] * ch.H_AI
    return EffectiveChannels(H_B=ch.Hn_AB + ch.Hn_IB @ reflected,
                             H_E=ch.Hn_AE + ch.Hn_IE @ reflected)


def rate_unchecked(H, X):
    G = H @ X @ H.conj().T
    return logdet_pd(np.eye(H.shape[0]) + G)


def rate(H, X):
    """ln|I + H X H^H| for a noise-normalized channel H."""
    X = check_psd(getattr(X, "X", X))
    H = np.asarray(H, dtype=complex)
    if H.shape[1] != X.shape[0]:
        raise ValueError(f"channel has {H.shape[1]} columns, covariance is {X.shape}")
    return max(rate_unchecked(H, X), 0.0)


def secrecy_objective(ch, theta, X):
    """Unclamped C_B - C_E, skipping input validation."""
    X = getattr(X, "X", X)
    eff = effective_channels(ch, theta)
    return rate_unchecked(eff.H_B, X) - rate_unchecked(eff.H_E, X)


def secrecy_rate(ch, theta, X):
    """Rates at Bob and Eve and the clamped secrecy rate [C_B - C_E]_+."""
    X = check_psd(getattr(X, "X", X))
    eff = effective_channels(ch, theta)
    c_b = rate(eff.H_B, X)
    c_e = rate(eff.H_E, X)
    return RateReport(C_B=c_b, C_E=c_e, C_s=max(c_b - c_e, 0.0))
