"""Block successive maximization: alternate phase sweeps and covariance updates."""

import dataclasses
import time
from dataclasses import dataclass, field

import numpy as np

from .channel import INIT_STREAM, Seed, dbm_to_watts
from .cov_opt import eve_gradient_matrix, optimize_covariance
from .phase_opt import sweep_phases
from .rates import InputCovariance, PhaseVector, as_theta, effective_channels, rate_unchecked

__all__ = [
    "PHASE_INIT_SCHEMES",
    "MonotonicityError",
    "BsmConfig",
    "IterationTrace",
    "init_point",
    "run_bsm",
    "optimize_covariance_only",
]

PHASE_INIT_SCHEMES = ("uniform-random", "all-ones")


class MonotonicityError(RuntimeError):
    """The objective decreased by more than the guard tolerance."""


@dataclass(frozen=True)
class BsmConfig:
    """Stopping rule, initialization and power budget (P0 in watts)."""

    P0: float = float(dbm_to_watts(10.0))
    max_iter: int = 500
    tol: float = 1e-6
    phase_init: str = "uniform-random"
    guard_tol: float = 1e-8

    def __post_init__(self):
        if not self.P0 > 0:
            raise ValueError("P0 must be > 0")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if not (self.tol > 0 and self.guard_tol > 0):
            raise ValueError("tolerances must be > 0")
        if self.phase_init not in PHASE_INIT_SCHEMES:
            raise ValueError(f"phase_init must be one of {PHASE_INIT_SCHEMES}")

    @classmethod
    def field_names(cls):
        return tuple(f.name for f in dataclasses.fields(cls))

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)

    def to_dict(self):
        return dataclasses.asdict(self)


@dataclass
class IterationTrace:
    """Per-iteration rates (nats) of one run; entry 0 is the starting point."""

    k: list = field(default_factory=list)
    C_s: list = field(default_factory=list)
    C_B: list = field(default_factory=list)
    C_E: list = field(default_factory=list)
    wall_time: list = field(default_factory=list)
    theta: PhaseVector = None
    X: InputCovariance = None
    converged: bool = False

    @property
    def objective(self):
        """Unclamped C_B - C_E per entry."""
        return [b - e for b, e in zip(self.C_B, self.C_E)]

    @property
    def iterations(self):
        return self.k[-1] if self.k else 0

    @property
    def final(self):
        return self.C_s[-1]

    def record(self, k, c_b, c_e, t):
        self.k.append(k)
        self.C_B.append(float(c_b))
        self.C_E.append(float(c_e))
        self.C_s.append(max(float(c_b - c_e), 0.0))
        self.wall_time.append(float(t))

    def to_dict(self, include_time=True, include_solution=True):
        out = {"k": list(self.k), "C_s": list(self.C_s), "C_B": list(self.C_B),
               "C_E": list(self.C_E), "converged": self.converged}
        if include_time:
            out["wall_time"] = list(self.wall_time)
        if include_solution and self.theta is not None:
            out["theta_real"] = self.theta.theta.real.tolist()
            out["theta_imag"] = self.theta.theta.imag.tolist()
        if include_solution and self.X is not None:
            out["X_real"] = self.X.X.real.tolist()
            out["X_imag"] = self.X.X.imag.tolist()
        return out


def init_point(cfg, ch, seed=None):
    """Starting phases per ``cfg.phase_init`` and X0 = (P0 / Nt) I."""
    if cfg.phase_init == "all-ones" or ch.N == 0:
        theta = PhaseVector.ones(ch.N)
    else:
        seed = seed if seed is not None else Seed(0)
        theta = PhaseVector.uniform_random(ch.N, seed.generator(INIT_STREAM))
    return theta, InputCovariance.scaled_identity(ch.Nt, cfg.P0)


def _rates(ch, theta, X):
    eff = effective_channels(ch, theta)
    return eff, rate_unchecked(eff.H_B, X), rate_unchecked(eff.H_E, X)


def _guard(new, old, tol, what, k):
    if new < old - tol:
        raise MonotonicityError(
            f"objective fell by {old - new:.3e} during {what} at iteration {k}")


def run_bsm(ch, cfg=None, seed=None, theta0=None, X0=None, update_phases=True):
    """Run block successive maximization on one channel realization.

    Each iteration sweeps every IRS phase in closed form, then replaces X by
    the maximizer of the linearized secrecy rate. The unclamped objective is
    checked after both blocks; a drop beyond ``cfg.guard_tol`` raises
    MonotonicityError. Iteration stops once the relative change of the
    objective falls below ``cfg.tol`` or after ``cfg.max_iter`` iterations.

    Parameters
    ----------
    ch : ChannelSet
    cfg : BsmConfig, optional
    seed : Seed, optional
        Drives the random phase initialization.
    theta0, X0 : optional
        Explicit starting point, overriding ``init_point``.
    update_phases : bool
        When False the phases stay at their initial value and only X is
        iterated.

    Returns
    -------
    IterationTrace
    """
    cfg = cfg or BsmConfig()
    theta_init, X_init = init_point(cfg, ch, seed)
    theta = as_theta(theta0) if theta0 is not None else theta_init.theta
    X = np.asarray(getattr(X0, "X", X0), dtype=complex) if X0 is not None else X_init.X

    trace = IterationTrace()
    t0 = time.perf_counter()
    eff, c_b, c_e = _rates(ch, theta, X)
    obj = c_b - c_e
    trace.record(0, c_b, c_e, 0.0)

    for k in range(1, cfg.max_iter + 1):
        if update_phases and ch.N:
            theta = sweep_phases(ch, theta, X).theta
            eff, c_b, c_e = _rates(ch, theta, X)
            _guard(c_b - c_e, obj, cfg.guard_tol, "the phase sweep", k)
            obj_mid = c_b - c_e
        else:
            obj_mid = obj

        Phi = eve_gradient_matrix(eff.H_E, X)
        X = optimize_covariance(eff.H_B, eff.H_E, X, cfg.P0, Phi=Phi)[0].X
        eff, c_b, c_e = _rates(ch, theta, X)
        new = c_b - c_e
        _guard(new, obj_mid, cfg.guard_tol, "the covariance update", k)
        trace.record(k, c_b, c_e, time.perf_counter() - t0)

        change = abs(new - obj)
        obj = new
        if change <= cfg.tol * max(abs(new), np.finfo(float).tiny):
            trace.converged = True
            break

    trace.theta = PhaseVector(theta)
    trace.X = InputCovariance(X, cfg.P0)
    return trace


def optimize_covariance_only(ch, theta, cfg=None, X0=None):
    """Iterate covariance updates with the phases held at `theta`."""
    return run_bsm(ch, cfg, theta0=theta, X0=X0, update_phases=False)
