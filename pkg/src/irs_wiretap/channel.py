"""Geometry, path loss and Rician channel draws for the IRS wiretap setup.

Coordinates are (x, y, z) with y the height above ground. Alice, Bob and
Eve sit at (0, ., l_t), (D, ., l_r) and (D_E, ., l_e); each terminal is a
vertical uniform linear array hanging down from its top-most element. The
IRS is a planar grid in the z = 0 plane whose top-left element is at
(D/2, h_I, 0).
"""

import dataclasses
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "GeometryError",
    "GeometryConfig",
    "PositionSet",
    "ChannelSet",
    "Seed",
    "CHANNEL_STREAM",
    "INIT_STREAM",
    "dbm_to_watts",
    "watts_to_dbm",
    "dbw_to_watts",
    "element_positions",
    "los_matrix",
    "fspl_direct",
    "fspl_irs",
    "link_distances",
    "draw_channels",
    "rician_mix",
]

CHANNEL_STREAM = 0
INIT_STREAM = 1

ZETA_IE_VARIANTS = ("printed", "symmetric")


class GeometryError(ValueError):
    pass


def dbm_to_watts(p_dbm):
    return 10.0 ** (np.asarray(p_dbm, dtype=float) / 10.0) / 1000.0


def watts_to_dbm(p_watts):
    return 10.0 * np.log10(np.asarray(p_watts, dtype=float) * 1000.0)


def dbw_to_watts(p_dbw):
    return 10.0 ** (np.asarray(p_dbw, dtype=float) / 10.0)


@dataclass(frozen=True)
class GeometryConfig:
    """Node placement, array sizes and propagation constants.

    Lengths are in metres, noise powers in watts. ``N = 0`` disables the
    IRS. ``zeta_ie_variant`` selects the IRS-Eve path-loss denominator:
    ``"printed"`` uses ``l_e / sqrt(D_E + l_e**2)``, ``"symmetric"`` uses
    ``l_e / sqrt(D_E**2 + l_e**2)``.
    """

    Nt: int = 4
    Nr: int = 3
    Ne: int = 2
    N: int = 25
    D: float = 50.0
    D_E: float = 40.0
    l_t: float = 20.0
    l_r: float = 15.0
    l_e: float = 35.0
    h_T: float = 3.0
    h_R: float = 2.5
    h_E: float = 2.0
    h_I: float = 5.0
    iota_a: float = 0.05
    iota_b: float = 0.25
    iota_e: float = 0.03
    iota_i: float = 0.02
    upsilon: float = 0.15
    kappa: float = 1.0
    epsilon: float = 3.0
    sigma2_b: float = float(dbw_to_watts(-95.0))
    sigma2_e: float = float(dbw_to_watts(-95.0))
    zeta_ie_variant: str = "printed"

    def __post_init__(self):
        for name in ("Nt", "Nr", "Ne"):
            if int(getattr(self, name)) < 1:
                raise GeometryError(f"{name} must be >= 1")
        if int(self.N) < 0:
            raise GeometryError("N must be >= 0")
        for name in ("D", "D_E", "l_t", "l_r", "l_e", "h_T", "h_R", "h_E", "h_I",
                     "iota_a", "iota_b", "iota_e", "iota_i", "upsilon"):
            if not float(getattr(self, name)) > 0:
                raise GeometryError(f"{name} must be > 0")
        if self.kappa < 0:
            raise GeometryError("kappa must be >= 0")
        if not self.epsilon > 0:
            raise GeometryError("epsilon must be > 0")
        if not (self.sigma2_b > 0 and self.sigma2_e > 0):
            raise GeometryError("noise powers must be > 0")
        if self.zeta_ie_variant not in ZETA_IE_VARIANTS:
            raise GeometryError(f"zeta_ie_variant must be one of {ZETA_IE_VARIANTS}")

    @classmethod
    def field_names(cls):
        return tuple(f.name for f in dataclasses.fields(cls))

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)

    def to_dict(self):
        return dataclasses.asdict(self)


@dataclass(frozen=True)
class PositionSet:
    """Per-node element coordinates, each an (n, 3) array."""

    alice: np.ndarray
    bob: np.ndarray
    eve: np.ndarray
    irs: np.ndarray


def _irs_grid_shape(n):
    cols = math.ceil(math.sqrt(n)) if n > 0 else 0
    rows = math.ceil(n / cols) if n > 0 else 0
    return rows, cols


def _vertical_array(x, top, spacing, z, count, label):
    y = top - spacing * np.arange(count)
    if count and y[-1] < 0:
        raise GeometryError(f"{label} array extends below ground (y = {y[-1]:.4g} m)")
    return np.column_stack([np.full(count, float(x)), y, np.full(count, float(z))])


def element_positions(cfg):
    """Element coordinates of every array in `cfg`.

    The IRS grid has ``ceil(sqrt(N))`` columns along +x and rows along -y,
    filled row-major and truncated to N elements.
    """
    alice = _vertical_array(0.0, cfg.h_T, cfg.iota_a, cfg.l_t, cfg.Nt, "Alice")
    bob = _vertical_array(cfg.D, cfg.h_R, cfg.iota_b, cfg.l_r, cfg.Nr, "Bob")
    eve = _vertical_array(cfg.D_E, cfg.h_E, cfg.iota_e, cfg.l_e, cfg.Ne, "Eve")

    rows, cols = _irs_grid_shape(cfg.N)
    k = np.arange(cfg.N)
    x = cfg.D / 2 + cfg.iota_i * (k % cols if cols else k)
    y = cfg.h_I - cfg.iota_i * (k // cols if cols else k)
    if cfg.N and y.min() < 0:
        raise GeometryError(f"IRS grid extends below ground (y = {y.min():.4g} m)")
    irs = np.column_stack([x, y, np.zeros(cfg.N)]) if cfg.N else np.zeros((0, 3))
    return PositionSet(alice=alice, bob=bob, eve=eve, irs=irs)


def los_matrix(tx, rx, upsilon):
    """Line-of-sight phase matrix with entry (r, t) = exp(-j 2 pi d_rt / upsilon)."""
    tx = np.asarray(tx, dtype=float).reshape(-1, 3)
    rx = np.asarray(rx, dtype=float).reshape(-1, 3)
    d = np.linalg.norm(rx[:, np.newaxis, :] - tx[np.newaxis, :, :], axis=-1)
    return np.exp(-2j * np.pi * d / upsilon)


def fspl_direct(distance, upsilon, epsilon):
    """Free-space path loss (4 pi / upsilon)^2 * distance^epsilon (linear)."""
    if not distance > 0:
        raise GeometryError("distance must be > 0")
    return (4 * np.pi / upsilon) ** 2 * distance ** epsilon


def link_distances(cfg):
    """Reference distances of the direct Alice-Bob and Alice-Eve links."""
    l_ab = math.hypot(cfg.D, cfg.l_t - cfg.l_r)
    l_ae = math.hypot(cfg.D_E, cfg.l_t - cfg.l_e)
    return l_ab, l_ae


def fspl_irs(cfg, target):
    """Cascaded Alice-IRS-{Bob, Eve} path loss for ``target`` in {"bob", "eve"}."""
    dt = math.sqrt((cfg.D / 2) ** 2 + cfg.l_t ** 2)
    scale = 256 * np.pi ** 2 * cfg.upsilon ** -4
    target = target.lower()
    if target == "bob":
        dr = math.sqrt((cfg.D / 2) ** 2 + cfg.l_r ** 2)
        return scale * dt ** 2 * dr ** 2 / (cfg.l_t / dt + cfg.l_r / dr) ** 2
    if target == "eve":
        de = math.sqrt((cfg.D_E / 2) ** 2 + cfg.l_e ** 2)
        if cfg.zeta_ie_variant == "printed":
            cos_e = cfg.l_e / math.sqrt(cfg.D_E + cfg.l_e ** 2)
        else:
            cos_e = cfg.l_e / math.sqrt(cfg.D_E ** 2 + cfg.l_e ** 2)
        return scale * dt ** 2 * de ** 2 / (cfg.l_t / dt + cos_e) ** 2
    raise ValueError(f"unknown target {target!r}")


@dataclass(frozen=True)
class Seed:
    """(master, trial) pair identifying one reproducible random stream family."""

    master: int
    trial: int = 0

    def __post_init__(self):
        if self.master < 0 or self.trial < 0:
            raise ValueError("seed components must be non-negative")

    def generator(self, stream=CHANNEL_STREAM):
        ss = np.random.SeedSequence([int(self.master), int(self.trial), int(stream)])
        return np.random.Generator(np.random.Philox(ss))


@dataclass
class ChannelSet:
    """Raw channel matrices for one realization plus noise levels.

    The noise-normalized matrices ``Hn_AB = H_AB / sigma_b`` etc. are
    computed on construction. ``H_AI`` is never normalized.
    """

    H_AB: np.ndarray
    H_AE: np.ndarray
    H_AI: np.ndarray
    H_IB: np.ndarray
    H_IE: np.ndarray
    sigma_b: float = 1.0
    sigma_e: float = 1.0
    Hn_AB: np.ndarray = field(init=False, repr=False)
    Hn_AE: np.ndarray = field(init=False, repr=False)
    Hn_IB: np.ndarray = field(init=False, repr=False)
    Hn_IE: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        for name in ("H_AB", "H_AE", "H_AI", "H_IB", "H_IE"):
            setattr(self, name, np.asarray(getattr(self, name), dtype=complex))
        nr, nt = self.H_AB.shape
        ne = self.H_AE.shape[0]
        n = self.H_AI.shape[0]
        if (self.H_AE.shape != (ne, nt) or self.H_AI.shape != (n, nt)
                or self.H_IB.shape != (nr, n) or self.H_IE.shape != (ne, n)):
            raise ValueError(
                "inconsistent channel shapes: "
                f"H_AB {self.H_AB.shape}, H_AE {self.H_AE.shape}, H_AI {self.H_AI.shape}, "
                f"H_IB {self.H_IB.shape}, H_IE {self.H_IE.shape}"
            )
        if not (self.sigma_b > 0 and self.sigma_e > 0):
            raise ValueError("noise standard deviations must be > 0")
        self.Hn_AB = self.H_AB / self.sigma_b
        self.Hn_IB = self.H_IB / self.sigma_b
        self.Hn_AE = self.H_AE / self.sigma_e
        self.Hn_IE = self.H_IE / self.sigma_e

    @property
    def Nt(self):
        return self.H_AB.shape[1]

    @property
    def Nr(self):
        return self.H_AB.shape[0]

    @property
    def Ne(self):
        return self.H_AE.shape[0]

    @property
    def N(self):
        return self.H_AI.shape[0]

    @classmethod
    def direct_only(cls, H_AB, H_AE, sigma_b=1.0, sigma_e=1.0):
        """A ChannelSet with no IRS (N = 0)."""
        H_AB = np.asarray(H_AB, dtype=complex)
        H_AE = np.asarray(H_AE, dtype=complex)
        nr, nt = H_AB.shape
        ne = H_AE.shape[0]
        return cls(H_AB, H_AE, np.zeros((0, nt)), np.zeros((nr, 0)), np.zeros((ne, 0)),
                   sigma_b=sigma_b, sigma_e=sigma_e)

    def without_irs(self):
        """The same direct links with the IRS removed."""
        return ChannelSet.direct_only(self.H_AB, self.H_AE, self.sigma_b, self.sigma_e)


def _cn(rng, shape):
    g = rng.standard_normal((2,) + tuple(shape))
    return (g[0] + 1j * g[1]) / np.sqrt(2.0)


def rician_mix(los, nlos, kappa, path_loss=1.0):
    """sqrt(path_loss^-1 / (kappa + 1)) * (sqrt(kappa) * los + nlos)."""
    return np.sqrt(1.0 / (path_loss * (kappa + 1.0))) * (np.sqrt(kappa) * los + nlos)


def draw_channels(cfg, seed):
    """Draw one ChannelSet for `cfg` from the channel stream of `seed`.

    NLOS parts are drawn in the fixed order AB, AE, AI, IB, IE so that, for a
    given seed, the direct links do not depend on the IRS size.
    """
    pos = element_positions(cfg)
    rng = seed.generator(CHANNEL_STREAM)
    l_ab, l_ae = link_distances(cfg)
    zeta_ab = fspl_direct(l_ab, cfg.upsilon, cfg.epsilon)
    zeta_ae = fspl_direct(l_ae, cfg.upsilon, cfg.epsilon)

    nlos_ab = _cn(rng, (cfg.Nr, cfg.Nt))
    nlos_ae = _cn(rng, (cfg.Ne, cfg.Nt))
    nlos_ai = _cn(rng, (cfg.N, cfg.Nt))
    nlos_ib = _cn(rng, (cfg.Nr, cfg.N))
    nlos_ie = _cn(rng, (cfg.Ne, cfg.N))

    k = cfg.kappa
    H_AB = rician_mix(los_matrix(pos.alice, pos.bob, cfg.upsilon), nlos_ab, k, zeta_ab)
    H_AE = rician_mix(los_matrix(pos.alice, pos.eve, cfg.upsilon), nlos_ae, k, zeta_ae)
    if cfg.N:
        H_AI = rician_mix(los_matrix(pos.alice, pos.irs, cfg.upsilon), nlos_ai, k)
        H_IB = rician_mix(los_matrix(pos.irs, pos.bob, cfg.upsilon), nlos_ib, k,
                          fspl_irs(cfg, "bob"))
        H_IE = rician_mix(los_matrix(pos.irs, pos.eve, cfg.upsilon), nlos_ie, k,
                          fspl_irs(cfg, "eve"))
    else:
        H_AI = np.zeros((0, cfg.Nt), dtype=complex)
        H_IB = np.zeros((cfg.Nr, 0), dtype=complex)
        H_IE = np.zeros((cfg.Ne, 0), dtype=complex)
    return ChannelSet(H_AB, H_AE, H_AI, H_IB, H_IE,
                      sigma_b=math.sqrt(cfg.sigma2_b), sigma_e=math.sqrt(cfg.sigma2_e))
