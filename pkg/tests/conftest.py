import numpy as np
import pytest

from irs_wiretap.channel import ChannelSet

ACCEPTANCE_LINES = []


def crandn(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def random_hermitian(rng, n):
    A = crandn(rng, n, n)
    return (A + A.conj().T) / 2


def random_pd(rng, n, floor=0.1):
    A = crandn(rng, n, n)
    return A @ A.conj().T + floor * np.eye(n)


def random_covariance(rng, nt, P0, rank=None):
    """Random PSD matrix with trace in (0, P0]."""
    rank = nt if rank is None else rank
    A = crandn(rng, nt, rank)
    X = A @ A.conj().T
    return X * (P0 * rng.uniform(0.05, 1.0) / np.trace(X).real)


def random_channels(rng, nt=3, nr=2, ne=2, n=4, scale_direct=1.0, scale_irs=1.0):
    """Synthetic unit-noise ChannelSet with O(1) gains."""
    return ChannelSet(
        H_AB=scale_direct * crandn(rng, nr, nt),
        H_AE=scale_direct * crandn(rng, ne, nt),
        H_AI=crandn(rng, n, nt),
        H_IB=scale_irs * crandn(rng, nr, n),
        H_IE=scale_irs * crandn(rng, ne, n),
    )


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def acceptance_report():
    def record(number, passed, detail):
        line = f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
