"""SINR, rate and interference-power evaluation for FRB allocations."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import GainTensor
from .config import SystemConfig


class AllocationError(ValueError):
    pass


@dataclass(frozen=True)
class Allocation:
    """``perm[n, l]`` is the user of FDC ``n`` scheduled on FRB ``l``."""

    perm: np.ndarray

    def __post_init__(self):
        perm = np.asarray(self.perm, dtype=int)
        if perm.ndim != 2 or perm.shape[0] < 1:
            raise AllocationError(f"allocation must be 2-D (N, K), got shape {perm.shape}")
        k = perm.shape[1]
        if not np.all(np.sort(perm, axis=1) == np.arange(k)):
            raise AllocationError("every FDC row must be a permutation of 0..K-1")
        object.__setattr__(self, "perm", perm)

    @classmethod
    def identity(cls, num_fdcs: int, users: int) -> "Allocation":
        return cls(np.tile(np.arange(users), (num_fdcs, 1)))

    def indicators(self) -> np.ndarray:
        """0/1 tensor ``z[n, k, l]``."""
        n, k = self.perm.shape
        z = np.zeros((n, k, k), dtype=int)
        z[np.arange(n)[:, None], self.perm, np.arange(k)[None, :]] = 1
        return z

    def to_list(self) -> list[list[int]]:
        return self.perm.tolist()


@dataclass(frozen=True)
class SinrTable:
    sinr: np.ndarray  # (N, K) per FDC and FRB, linear

    @property
    def rate(self) -> np.ndarray:
        return np.log2(1.0 + self.sinr)

    def to_dict(self) -> dict:
        return {"sinr": self.sinr.tolist(), "rate": self.rate.tolist()}


def sinr_matrix(g: GainTensor, perm: np.ndarray, noise_term: float,
                fdcs: np.ndarray | None = None) -> np.ndarray:
    """Raw SINR array for ``perm`` of shape (N, K).

    ``fdcs`` restricts the system to a subset of FDCs (rows outside it are
    NaN and exert no interference).
    """
    n, k = perm.shape
    frb = np.arange(k)
    active = np.ones(n, dtype=bool) if fdcs is None else np.isin(np.arange(n), fdcs)
    signal = g.tx[np.arange(n)[:, None], perm, frb[None, :]]
    # interf[n, m, l] = g_int[n, perm[n,l], m, perm[m,l], l]
    interf = g.interference[np.arange(n)[:, None, None], perm[:, None, :],
                            np.arange(n)[None, :, None], perm[None, :, :], frb[None, None, :]]
    interf = np.where(active[None, :, None], interf, 0.0).sum(axis=1)
    sinr = signal / (interf + noise_term)
    return np.where(active[:, None], sinr, np.nan)


def sinr_table(g: GainTensor, alloc: Allocation, cfg: SystemConfig) -> SinrTable:
    return SinrTable(sinr_matrix(g, alloc.perm, cfg.noise_term))


def min_rate(table: SinrTable) -> float:
    return float(np.min(table.rate))


def sum_rate(table: SinrTable) -> float:
    return float(np.sum(table.rate))


def fdc_interference_power(g: GainTensor, cfg: SystemConfig) -> np.ndarray:
    """Total cross-FDC interference power suffered by each FDC, averaged over FRBs."""
    per_frb = g.interference.sum(axis=(1, 2, 3)) * cfg.tx_power / cfg.antennas  # (N, K_frb)
    return per_frb.mean(axis=1)
