import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import crandn, random_channels, random_covariance
from irs_wiretap.channel import ChannelSet
from irs_wiretap.numerics import NotPositiveDefiniteError
from irs_wiretap.rates import (InputCovariance, PhaseVector, effective_channels, nats_to_bits,
                               rate, secrecy_objective, secrecy_rate)

seeds = st.integers(0, 2 ** 32 - 1)


def evd_rate(H, X):
    # independent oracle: sum of log(1 + eigenvalues) of H X H^H
    return float(np.sum(np.log1p(np.linalg.eigvalsh(H @ X @ H.conj().T).clip(0))))


class TestPhaseVector:
    @given(phi=st.lists(st.floats(-20, 20), min_size=0, max_size=30))
    def test_angles(self, phi):
        pv = PhaseVector.from_angles(phi)
        assert np.all(np.abs(np.abs(pv.theta) - 1) <= 1e-12)
        assert np.all((pv.phi >= 0) & (pv.phi < 2 * np.pi))
        assert np.allclose(np.exp(1j * pv.phi), pv.theta, atol=1e-12)

    def test_rejects_non_unit(self):
        with pytest.raises(ValueError):
            PhaseVector(np.array([1.0, 0.5]))

    def test_ones(self):
        assert np.array_equal(PhaseVector.ones(3).phi, np.zeros(3))


class TestInputCovariance:
    def test_scaled_identity(self):
        X = InputCovariance.scaled_identity(4, 2.0)
        assert X.power == pytest.approx(2.0, rel=1e-15)

    def test_trace_budget(self):
        with pytest.raises(ValueError):
            InputCovariance(np.eye(2), 1.0)
        InputCovariance(np.eye(2) * 0.5 * (1 + 5e-9), 1.0)

    def test_not_psd(self):
        with pytest.raises(NotPositiveDefiniteError):
            InputCovariance(np.diag([1.0, -0.1]), 5.0)


class TestEffectiveChannels:
    def test_no_irs(self, rng):
        ch = ChannelSet.direct_only(crandn(rng, 2, 3), crandn(rng, 2, 3), 0.5, 2.0)
        eff = effective_channels(ch, np.zeros(0))
        assert np.array_equal(eff.H_B, ch.Hn_AB) and np.array_equal(eff.H_E, ch.Hn_AE)

    def test_blind_irs(self, rng):
        ch = random_channels(rng)
        ch = ChannelSet(ch.H_AB, ch.H_AE, ch.H_AI, np.zeros_like(ch.H_IB), ch.H_IE)
        a = effective_channels(ch, PhaseVector.ones(4)).H_B
        b = effective_channels(ch, PhaseVector.from_angles(rng.uniform(0, 6, 4))).H_B
        assert np.array_equal(a, b)

    def test_all_ones_direct_product(self, rng):
        ch = ChannelSet(crandn(rng, 2, 3), crandn(rng, 2, 3), crandn(rng, 4, 3),
                        crandn(rng, 2, 4), crandn(rng, 2, 4), sigma_b=0.3, sigma_e=0.7)
        eff = effective_channels(ch, PhaseVector.ones(4))
        assert np.allclose(eff.H_B, (ch.H_AB + ch.H_IB @ ch.H_AI) / 0.3, atol=1e-12)
        assert np.allclose(eff.H_E, (ch.H_AE + ch.H_IE @ ch.H_AI) / 0.7, atol=1e-12)

    def test_diag_form(self, rng):
        ch = random_channels(rng)
        theta = np.exp(1j * rng.uniform(0, 2 * np.pi, 4))
        eff = effective_channels(ch, theta)
        assert np.allclose(eff.H_B, ch.Hn_AB + ch.Hn_IB @ np.diag(theta) @ ch.H_AI, atol=1e-12)

    def test_mismatch(self, rng):
        with pytest.raises(ValueError):
            effective_channels(random_channels(rng), PhaseVector.ones(3))


class TestRate:
    def test_zero_input(self, rng):
        assert rate(crandn(rng, 3, 4), np.zeros((4, 4))) == 0.0

    def test_scalar(self):
        assert rate(np.array([[1.0]]), np.array([[3.0]])) == pytest.approx(math.log(4), abs=1e-15)

    def test_matches_evd(self, rng):
        H = crandn(rng, 3, 4)
        X = np.eye(4) * 0.25
        assert abs(rate(H, X) - evd_rate(H, X)) < 1e-10

    def test_rejects_non_psd(self):
        with pytest.raises(NotPositiveDefiniteError):
            rate(np.eye(2), np.diag([1.0, -1.0]))

    @given(seed=seeds)
    def test_rotation_invariance(self, seed):
        rng = np.random.default_rng(seed)
        H = crandn(rng, 3, 4)
        X = random_covariance(rng, 4, 2.0)
        U, _ = np.linalg.qr(crandn(rng, 3, 3))
        assert abs(rate(U @ H, X) - rate(H, X)) < 1e-10

    @given(seed=seeds)
    def test_power_monotone(self, seed):
        rng = np.random.default_rng(seed)
        H = crandn(rng, 2, 3)
        X = random_covariance(rng, 3, 1.0)
        vals = [rate(H, a * X) for a in np.linspace(0, 10, 41)]
        assert np.all(np.diff(vals) >= -1e-12)


class TestSecrecyRate:
    def test_zero_input(self, rng):
        ch = random_channels(rng)
        rep = secrecy_rate(ch, PhaseVector.ones(4), np.zeros((3, 3)))
        assert rep.C_s == 0.0

    def test_duplicate_channels(self, rng):
        ch = random_channels(rng)
        twin = ChannelSet(ch.H_AB, ch.H_AB, ch.H_AI, ch.H_IB, ch.H_IB)
        rep = secrecy_rate(twin, PhaseVector.ones(4), np.eye(3))
        assert rep.C_s == 0.0 and rep.C_B == pytest.approx(rep.C_E, abs=1e-12)

    def test_scalar(self):
        ch = ChannelSet.direct_only([[1.0]], [[0.5]])
        rep = secrecy_rate(ch, np.zeros(0), np.array([[1.0]]))
        assert rep.C_s == pytest.approx(math.log(2) - math.log(1.25), abs=1e-14)
        assert rep.C_s == pytest.approx(0.4700, abs=5e-5)

    @given(seed=seeds)
    def test_clamp_and_objective(self, seed):
        rng = np.random.default_rng(seed)
        ch = random_channels(rng, scale_direct=rng.uniform(0.1, 3))
        theta = np.exp(1j * rng.uniform(0, 2 * np.pi, ch.N))
        X = random_covariance(rng, ch.Nt, 3.0)
        rep = secrecy_rate(ch, theta, X)
        assert rep.C_B >= 0 and rep.C_E >= 0
        assert rep.C_s == max(rep.C_B - rep.C_E, 0.0)
        assert abs(secrecy_objective(ch, theta, X) - rep.objective) < 1e-12

    def test_continuity_in_phase(self, rng):
        ch = random_channels(rng)
        X = random_covariance(rng, ch.Nt, 2.0)
        phi = rng.uniform(0, 2 * np.pi, ch.N)
        grid = np.linspace(0, 2 * np.pi, 2001)
        vals = []
        for t in grid:
            phi[1] = t
            vals.append(secrecy_objective(ch, np.exp(1j * phi), X))
        # bounded derivative: no jumps between neighbouring grid points
        assert np.max(np.abs(np.diff(vals))) < 50 * (grid[1] - grid[0])


def test_bits():
    assert nats_to_bits(math.log(2)) == pytest.approx(1.0)
