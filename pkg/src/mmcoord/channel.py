"""Geometric ULA channel, analog beamforming and the gain tensors.

All gains are linear. ``GainTensor.tx[n, k, l]`` is the transmission gain of
pair ``(n, k)`` on FRB ``l``; ``GainTensor.interference[n, k, m, i, l]`` is the
statistical gain from BS ``(m, i)`` onto user ``(n, k)`` on FRB ``l``. Blocks
with ``n == m`` are kept at zero: links inside an FDC never share an FRB.
"""

from __future__ import annotations

import io
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import SystemConfig
from .topology import LargeScaleCSI, LinkLargeScale


class ContractError(ValueError):
    """Inputs violate an operation's preconditions."""


@dataclass(frozen=True)
class SmallScaleRealization:
    """Rayleigh path coefficients of the serving links, ``alpha[n, k, l, path]``.

    Only serving links are drawn: interference-link fading is averaged out of
    every gain the coordinator consumes.
    """

    alpha: np.ndarray


def draw_small_scale(cfg: SystemConfig, rng: np.random.Generator) -> SmallScaleRealization:
    shape = (cfg.num_fdcs, cfg.users_per_fdc, cfg.users_per_fdc, cfg.num_scatterers)
    return SmallScaleRealization(alpha=complex_gaussian(rng, shape))


def complex_gaussian(rng: np.random.Generator, shape) -> np.ndarray:
    """Zero-mean circularly symmetric samples with unit variance."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def steering_matrix(aods, cfg: SystemConfig) -> np.ndarray:
    """``A[..., path, n_a] = exp(j * n_a * (2 pi / lambda) * tau * sin(aod))``."""
    aods = np.asarray(aods, dtype=float)
    n_a = np.arange(cfg.antennas)
    return np.exp(1j * cfg.wavenumber_spacing * np.sin(aods)[..., None] * n_a)


def path_sum(alpha, aods, cfg: SystemConfig) -> np.ndarray:
    """Unnormalized array response ``c[n_a] = sum_paths alpha * steering``."""
    alpha = np.asarray(alpha, dtype=complex)
    aods = np.asarray(aods, dtype=float)
    if alpha.shape[-1] != aods.shape[-1]:
        raise ContractError(f"{alpha.shape[-1]} fading paths but {aods.shape[-1]} AoDs")
    return np.einsum("...p,...pa->...a", alpha, steering_matrix(aods, cfg))


def channel_vector(link: LinkLargeScale, alpha, cfg: SystemConfig) -> np.ndarray:
    return path_sum(alpha, link.aods, cfg) / np.sqrt(link.path_loss)


def _phase_align(c: np.ndarray) -> np.ndarray:
    mag = np.abs(c)
    # A zero entry is defined to take phase 1; any unit-modulus value is optimal there.
    return np.where(mag > 0, np.conj(c) / np.where(mag > 0, mag, 1.0), 1.0 + 0j)


def beamforming_vector(alpha, aods, cfg: SystemConfig) -> np.ndarray:
    """Phase-only weights that co-phase every antenna at the served user."""
    return _phase_align(path_sum(alpha, aods, cfg))


def transmission_gain(h, w) -> float:
    h = np.asarray(h)
    w = np.asarray(w)
    if h.shape != w.shape:
        raise ContractError(f"channel {h.shape} and beam {w.shape} differ")
    return float(np.abs(h @ w) ** 2)


def interference_gain(beam, victim: LinkLargeScale, cfg: SystemConfig) -> float:
    """Expected ``|h^T w|^2`` over the victim link's Rayleigh path coefficients."""
    response = steering_matrix(victim.aods, cfg) @ np.asarray(beam)
    return float(np.sum(np.abs(response) ** 2) / victim.path_loss)


@dataclass(frozen=True)
class GainTensor:
    tx: np.ndarray            # (N, K, K_frb)
    interference: np.ndarray  # (N, K, N, K, K_frb), zero where n == m

    @property
    def num_fdcs(self) -> int:
        return self.tx.shape[0]

    @property
    def users_per_fdc(self) -> int:
        return self.tx.shape[1]

    def save(self, path: str | Path) -> None:
        path = Path(path)
        if path.suffix == ".json":
            path.write_text(json.dumps(self.to_dict()))
        else:
            with open(path, "wb") as fh:
                np.savez(fh, tx=self.tx, interference=self.interference)

    @classmethod
    def load(cls, path: str | Path) -> "GainTensor":
        path = Path(path)
        if path.suffix == ".json":
            return cls.from_dict(json.loads(path.read_text()))
        with np.load(path) as data:
            return cls(tx=data["tx"], interference=data["interference"])

    def to_dict(self) -> dict:
        return {"tx": self.tx.tolist(), "interference": self.interference.tolist()}

    @classmethod
    def from_dict(cls, data: dict) -> "GainTensor":
        tx = np.asarray(data["tx"], dtype=float)
        interference = np.asarray(data["interference"], dtype=float)
        n, k = tx.shape[:2]
        if interference.shape != (n, k, n, k, tx.shape[2]):
            raise ContractError(f"interference shape {interference.shape} inconsistent with tx {tx.shape}")
        return cls(tx=tx, interference=interference)

    def to_bytes(self) -> bytes:
        buf = io.BytesIO()
        np.savez(buf, tx=self.tx, interference=self.interference)
        return buf.getvalue()


def build_gain_tensor(cfg: SystemConfig, large_scale: LargeScaleCSI, small_scale: SmallScaleRealization,
                      rng: np.random.Generator | None = None) -> GainTensor:
    """Assemble transmission and statistical interference gains for every FRB.

    With ``cfg.interference_mode == "averaged"`` the interference gain is further
    averaged over ``cfg.averaging_draws`` fresh draws of the interferer's own
    serving fading (``rng`` required), which makes it FRB-independent.
    """
    n, k = cfg.num_fdcs, cfg.users_per_fdc
    nk = n * k
    flat = np.arange(nk)
    alpha = small_scale.alpha.reshape(nk, k, cfg.num_scatterers)   # [bs, l, path]
    serving_aods = large_scale.aods[flat, flat]                     # [bs, path]
    serving_loss = large_scale.path_loss[flat, flat]                # [bs]

    c = path_sum(alpha, serving_aods[:, None, :], cfg)              # [bs, l, n_a]
    tx = (np.sum(np.abs(c), axis=-1) ** 2 / serving_loss[:, None]).reshape(n, k, k)

    # response[bs, user, path, n_a] for the BS's steering toward each user.
    steer = steering_matrix(large_scale.aods, cfg)
    if cfg.interference_mode == "averaged":
        if rng is None:
            raise ContractError("averaged interference mode needs an rng")
        per_link = np.empty((nk, nk))
        for b in range(nk):
            draws = complex_gaussian(rng, (cfg.averaging_draws, cfg.num_scatterers))
            beams = beamforming_vector(draws, serving_aods[b][None, :], cfg)     # [draw, n_a]
            resp = np.einsum("upa,da->dup", steer[b], beams)
            per_link[b] = np.mean(np.sum(np.abs(resp) ** 2, axis=-1), axis=0)
        gains = np.repeat((per_link / large_scale.path_loss)[:, :, None], k, axis=2)  # [bs, user, l]
    else:
        beams = _phase_align(c)                                     # [bs, l, n_a]
        resp = np.einsum("bupa,bla->bulp", steer, beams)
        gains = np.sum(np.abs(resp) ** 2, axis=-1) / large_scale.path_loss[:, :, None]

    # gains[bs=(m,i), user=(n,k), l] -> interference[n, k, m, i, l]
    interference = gains.reshape(n, k, n, k, k).transpose(2, 3, 0, 1, 4).copy()
    for fdc in range(n):
        interference[fdc, :, fdc, :, :] = 0.0
    return GainTensor(tx=tx, interference=interference)
