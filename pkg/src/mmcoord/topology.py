"""Amorphous network geometry and large-scale CSI.

Index convention: a BS or user is addressed either as ``(n, k)`` (FDC ``n``,
pair ``k``) or by the flat index ``n * K + k``. BS ``(n, k)`` serves user
``(n, k)``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.optimize import linear_sum_assignment

from .config import SystemConfig

_MAX_LLOYD_ITERS = 50


@dataclass(frozen=True)
class Topology:
    bs_positions: np.ndarray    # (N, K, 2)
    user_positions: np.ndarray  # (N, K, 2)

    @property
    def num_fdcs(self) -> int:
        return self.bs_positions.shape[0]

    @property
    def users_per_fdc(self) -> int:
        return self.bs_positions.shape[1]

    @property
    def fdc_of_bs(self) -> np.ndarray:
        """FDC index of every BS in flat order."""
        return np.repeat(np.arange(self.num_fdcs), self.users_per_fdc)

    @property
    def pairing(self) -> np.ndarray:
        """``pairing[n, k]`` is the flat index of the user served by BS ``(n, k)``."""
        n, k = self.num_fdcs, self.users_per_fdc
        return np.arange(n * k).reshape(n, k)

    def flat_bs(self) -> np.ndarray:
        return self.bs_positions.reshape(-1, 2)

    def flat_users(self) -> np.ndarray:
        return self.user_positions.reshape(-1, 2)

    def to_dict(self) -> dict:
        return {
            "num_fdcs": self.num_fdcs,
            "users_per_fdc": self.users_per_fdc,
            "bs_positions": self.bs_positions.tolist(),
            "user_positions": self.user_positions.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Topology":
        return cls(np.asarray(data["bs_positions"], dtype=float),
                   np.asarray(data["user_positions"], dtype=float))


@dataclass(frozen=True)
class LinkLargeScale:
    """Large-scale CSI of one BS -> user link."""

    distance: float
    los: bool
    shadowing_db: float
    path_loss: float
    aods: np.ndarray

    @property
    def num_paths(self) -> int:
        return len(self.aods)

    @property
    def path_loss_db(self) -> float:
        return 10.0 * np.log10(self.path_loss)


@dataclass(frozen=True)
class LargeScaleCSI:
    """Large-scale CSI of every (BS, user) ordered pair, indexed ``[bs_flat, user_flat]``."""

    distance: np.ndarray      # (NK, NK), floored at cfg.min_distance
    los: np.ndarray           # (NK, NK) bool
    shadowing_db: np.ndarray  # (NK, NK)
    path_loss: np.ndarray     # (NK, NK) linear attenuation
    aods: np.ndarray          # (NK, NK, L) radians in [0, 2*pi)

    def link(self, bs: int, user: int) -> LinkLargeScale:
        return LinkLargeScale(
            distance=float(self.distance[bs, user]),
            los=bool(self.los[bs, user]),
            shadowing_db=float(self.shadowing_db[bs, user]),
            path_loss=float(self.path_loss[bs, user]),
            aods=self.aods[bs, user].copy(),
        )

    def to_dict(self) -> dict:
        return {
            "distance": self.distance.tolist(),
            "los": self.los.astype(int).tolist(),
            "shadowing_db": self.shadowing_db.tolist(),
            "path_loss_db": (10.0 * np.log10(self.path_loss)).tolist(),
            "aods": self.aods.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "LargeScaleCSI":
        return cls(
            distance=np.asarray(data["distance"], dtype=float),
            los=np.asarray(data["los"], dtype=bool),
            shadowing_db=np.asarray(data["shadowing_db"], dtype=float),
            path_loss=10.0 ** (np.asarray(data["path_loss_db"], dtype=float) / 10.0),
            aods=np.asarray(data["aods"], dtype=float),
        )


def uniform_disc(rng: np.random.Generator, count: int, radius: float,
                 center=(0.0, 0.0)) -> np.ndarray:
    """``count`` points i.i.d. uniform on a disc (inverse-CDF radius sampling)."""
    r = radius * np.sqrt(rng.random(count))
    theta = 2.0 * np.pi * rng.random(count)
    return np.asarray(center) + np.column_stack([r * np.cos(theta), r * np.sin(theta)])


def balanced_clusters(points: np.ndarray, num_clusters: int, size: int,
                      rng: np.random.Generator) -> np.ndarray:
    """Capacitated nearest-centroid clustering into groups of exactly ``size``.

    Lloyd iterations where the assignment step is an exact min-cost
    transportation problem (each centroid replicated ``size`` times).
    Returns the cluster label of every point.
    """
    total = len(points)
    assert total == num_clusters * size
    centroids = points[rng.choice(total, size=num_clusters, replace=False)]
    labels = None
    for _ in range(_MAX_LLOYD_ITERS):
        slots = np.repeat(centroids, size, axis=0)
        cost = np.sum((points[:, None, :] - slots[None, :, :]) ** 2, axis=-1)
        _, cols = linear_sum_assignment(cost)
        new_labels = cols // size
        if labels is not None and np.array_equal(new_labels, labels):
            break
        labels = new_labels
        centroids = np.stack([points[labels == c].mean(axis=0) for c in range(num_clusters)])
    return labels


def generate_topology(cfg: SystemConfig, rng: np.random.Generator) -> Topology:
    n, k = cfg.num_fdcs, cfg.users_per_fdc
    bs = uniform_disc(rng, n * k, cfg.area_radius)
    labels = balanced_clusters(bs, n, k, rng)
    # Stable sort keeps the original draw order inside each FDC.
    order = np.argsort(labels, kind="stable")
    bs = bs[order].reshape(n, k, 2)

    offsets = uniform_disc(rng, n * k, cfg.serving_radius).reshape(n, k, 2)
    users = bs + offsets
    # Project stragglers back onto the coverage disc.
    norm = np.linalg.norm(users, axis=-1, keepdims=True)
    scale = np.where(norm > cfg.area_radius, cfg.area_radius / np.where(norm > 0, norm, 1.0), 1.0)
    users = users * scale
    return Topology(bs_positions=bs, user_positions=users)


def path_loss_db(distance, los, shadowing_db, cfg: SystemConfig):
    """Path loss in dB for the given LOS class; distance is floored at ``cfg.min_distance``."""
    d = np.maximum(np.asarray(distance, dtype=float), cfg.min_distance)
    los = np.asarray(los, dtype=bool)
    mean = np.where(los, cfg.pathloss_los.mean_db(d), cfg.pathloss_nlos.mean_db(d))
    return mean + shadowing_db


def los_probability(distance, cfg: SystemConfig):
    if cfg.los_model == "all_los":
        return np.ones_like(np.asarray(distance, dtype=float))
    if cfg.los_model == "all_nlos":
        return np.zeros_like(np.asarray(distance, dtype=float))
    return np.exp(-np.asarray(distance, dtype=float) / cfg.los_decay_m)


def draw_large_scale(cfg: SystemConfig, topo: Topology, rng: np.random.Generator) -> LargeScaleCSI:
    bs = topo.flat_bs()
    users = topo.flat_users()
    raw = np.linalg.norm(bs[:, None, :] - users[None, :, :], axis=-1)
    distance = np.maximum(raw, cfg.min_distance)

    los = rng.random(distance.shape) < los_probability(distance, cfg)
    std = np.where(los, cfg.pathloss_los.shadow_std_db, cfg.pathloss_nlos.shadow_std_db)
    shadowing = rng.standard_normal(distance.shape) * std
    loss_db = path_loss_db(distance, los, shadowing, cfg)
    aods = rng.uniform(0.0, 2.0 * np.pi, size=distance.shape + (cfg.num_scatterers,))
    return LargeScaleCSI(
        distance=distance,
        los=los,
        shadowing_db=shadowing,
        path_loss=10.0 ** (loss_db / 10.0),
        aods=aods,
    )


def save_scenario(path: str | Path, cfg: SystemConfig, topo: Topology, csi: LargeScaleCSI) -> None:
    payload = {"config": cfg.to_dict(), "topology": topo.to_dict(), "large_scale": csi.to_dict()}
    Path(path).write_text(json.dumps(payload))


def load_scenario(path: str | Path) -> tuple[SystemConfig, Topology, LargeScaleCSI]:
    data = json.loads(Path(path).read_text())
    return (SystemConfig.from_dict(data["config"]), Topology.from_dict(data["topology"]),
            LargeScaleCSI.from_dict(data["large_scale"]))
