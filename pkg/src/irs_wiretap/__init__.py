"""Secrecy rate maximization for IRS-assisted MIMOME wiretap channels."""

__version__ = "0.1.0"

from .bsm import BsmConfig, IterationTrace, MonotonicityError, init_point, run_bsm
from .channel import ChannelSet, GeometryConfig, Seed, dbm_to_watts, draw_channels
from .cov_opt import optimize_covariance
from .phase_opt import optimize_phase, sweep_phases
from .rates import InputCovariance, PhaseVector, effective_channels, rate, secrecy_rate

__all__ = [
    "__version__",
    "BsmConfig",
    "ChannelSet",
    "GeometryConfig",
    "InputCovariance",
    "IterationTrace",
    "MonotonicityError",
    "PhaseVector",
    "Seed",
    "dbm_to_watts",
    "draw_channels",
    "effective_channels",
    "init_point",
    "optimize_covariance",
    "optimize_phase",
    "rate",
    "run_bsm",
    "secrecy_rate",
    "sweep_phases",
]
