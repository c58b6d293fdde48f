import itertools

import numpy as np
import pytest

from mmcoord.channel import GainTensor
from mmcoord.config import SystemConfig

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def random_tensor(rng, n, k, spread_db=20.0) -> GainTensor:
    """Log-normally spread gains, zero within-FDC interference blocks."""
    tx = 10 ** (rng.normal(0, spread_db / 10, size=(n, k, k)))
    interference = 10 ** (rng.normal(-1.5, spread_db / 10, size=(n, k, n, k, k)))
    for a in range(n):
        interference[a, :, a] = 0.0
    return GainTensor(tx=tx, interference=interference)


def unit_noise_cfg(n, k, **kw) -> SystemConfig:
    """Config whose normalized noise term N_a * sigma^2 / P equals 1."""
    return SystemConfig(num_fdcs=n, users_per_fdc=k, antennas=1, noise_power=1.0, tx_power=1.0, **kw)


def all_allocations(n, k):
    perms = [np.asarray(p) for p in itertools.permutations(range(k))]
    for combo in itertools.product(perms, repeat=n):
        yield np.stack(combo)


def direct_sinr(g: GainTensor, perm, noise_term):
    """Loop-by-loop SINR used as an independent oracle."""
    n, k = perm.shape
    out = np.zeros((n, k))
    for a in range(n):
        for l in range(k):
            u = perm[a, l]
            interf = sum(g.interference[a, u, b, perm[b, l], l] for b in range(n) if b != a)
            out[a, l] = g.tx[a, u, l] / (interf + noise_term)
    return out


@pytest.fixture
def hand_tensor() -> GainTensor:
    """2 FDCs x 2 users with small integer-ish gains; noise term 1."""
    tx = np.array([[[4.0, 2.0], [3.0, 5.0]],
                   [[6.0, 1.0], [2.0, 8.0]]])
    gi = np.zeros((2, 2, 2, 2, 2))
    gi[0, :, 1, :, 0] = [[1.0, 2.0], [3.0, 4.0]]
    gi[0, :, 1, :, 1] = [[0.5, 1.0], [1.5, 2.0]]
    gi[1, :, 0, :, 0] = [[2.0, 1.0], [1.0, 2.0]]
    gi[1, :, 0, :, 1] = [[1.0, 3.0], [2.0, 1.0]]
    return GainTensor(tx=tx, interference=gi)
