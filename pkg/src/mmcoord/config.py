"""System parameters for the dense mmWave network model and its solvers."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
import yaml

SPEED_OF_LIGHT = 299_792_458.0
THERMAL_NOISE_DBM_PER_HZ = -174.0

LOS_MODELS = ("distance", "all_los", "all_nlos")
FDC_ORDERINGS = ("poi", "identity", "random")
INTERFERENCE_MODES = ("instantaneous", "averaged")


class ConfigError(ValueError):
    """Raised when a configuration violates its invariants."""


def dbm_to_watts(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


def watts_to_dbm(watts: float) -> float:
    return 10.0 * math.log10(watts) + 30.0


def thermal_noise_watts(bandwidth_hz: float, noise_figure_db: float = 7.0) -> float:
    """Thermal noise power kTB plus receiver noise figure."""
    return dbm_to_watts(THERMAL_NOISE_DBM_PER_HZ + 10.0 * math.log10(bandwidth_hz) + noise_figure_db)


@dataclass(frozen=True)
class PathLossModel:
    """Close-in path loss ``intercept + exponent * 10 log10(d) + shadowing`` in dB."""

    intercept_db: float
    exponent: float
    shadow_std_db: float

    def mean_db(self, distance_m):
        return self.intercept_db + self.exponent * 10.0 * np.log10(distance_m)


# 28 GHz measurement-based constants.
LOS_28GHZ = PathLossModel(intercept_db=61.4, exponent=2.0, shadow_std_db=5.8)
NLOS_28GHZ = PathLossModel(intercept_db=72.0, exponent=2.92, shadow_std_db=8.7)

DEFAULT_CARRIER_HZ = 28e9
DEFAULT_WAVELENGTH = SPEED_OF_LIGHT / DEFAULT_CARRIER_HZ


@dataclass(frozen=True)
class SystemConfig:
    num_fdcs: int = 10
    users_per_fdc: int = 3
    antennas: int = 16
    carrier_wavelength: float = DEFAULT_WAVELENGTH
    element_spacing: float = DEFAULT_WAVELENGTH / 2
    tx_power: float = 1.0
    noise_power: float = field(default_factory=lambda: thermal_noise_watts(100e6))
    area_radius: float = 500.0
    serving_radius: float = 50.0
    num_scatterers: int = 3
    bisection_tol: float = 1e-3
    greedy_tol: float = 1e-3
    los_model: str = "distance"
    los_decay_m: float = 67.1
    pathloss_los: PathLossModel = LOS_28GHZ
    pathloss_nlos: PathLossModel = NLOS_28GHZ
    min_distance: float = 1.0
    fdc_ordering: str = "poi"
    interference_mode: str = "instantaneous"
    averaging_draws: int = 1000
    max_greedy_rounds: int = 100
    rng_seed: int = 0

    def __post_init__(self):
        for name in ("num_fdcs", "users_per_fdc", "antennas", "num_scatterers", "averaging_draws",
                     "max_greedy_rounds"):
            if int(getattr(self, name)) < 1:
                raise ConfigError(f"{name} must be >= 1, got {getattr(self, name)}")
        for name in ("carrier_wavelength", "element_spacing", "tx_power", "noise_power",
                     "los_decay_m", "min_distance"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise ConfigError(f"{name} must be positive and finite, got {value}")
        # Zero radii are allowed: they collapse the geometry onto the origin.
        for name in ("area_radius", "serving_radius"):
            if not getattr(self, name) >= 0:
                raise ConfigError(f"{name} must be >= 0")
        for name in ("bisection_tol", "greedy_tol"):
            if not 0 < getattr(self, name) < 1:
                raise ConfigError(f"{name} must lie in (0, 1)")
        if self.los_model not in LOS_MODELS:
            raise ConfigError(f"los_model must be one of {LOS_MODELS}")
        if self.fdc_ordering not in FDC_ORDERINGS:
            raise ConfigError(f"fdc_ordering must be one of {FDC_ORDERINGS}")
        if self.interference_mode not in INTERFERENCE_MODES:
            raise ConfigError(f"interference_mode must be one of {INTERFERENCE_MODES}")
        for model in (self.pathloss_los, self.pathloss_nlos):
            if model.shadow_std_db < 0:
                raise ConfigError("shadow_std_db must be >= 0")

    @property
    def num_links(self) -> int:
        return self.num_fdcs * self.users_per_fdc

    @property
    def noise_term(self) -> float:
        """Normalized noise ``N_a * sigma^2 / P`` appearing in every SINR denominator."""
        return self.antennas * self.noise_power / self.tx_power

    @property
    def wavenumber_spacing(self) -> float:
        """Phase advance per element per unit ``sin(aod)``: ``2*pi*tau/lambda``."""
        return 2.0 * math.pi * self.element_spacing / self.carrier_wavelength

    def replace(self, **changes) -> "SystemConfig":
        return dataclasses.replace(self, **changes)

    def with_power_dbm(self, dbm: float) -> "SystemConfig":
        return self.replace(tx_power=dbm_to_watts(dbm))

    def to_dict(self) -> dict[str, Any]:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "SystemConfig":
        data = dict(data)
        known = {f.name for f in dataclasses.fields(cls)}
        # Convenience keys that map onto base fields.
        if "carrier_hz" in data:
            data["carrier_wavelength"] = SPEED_OF_LIGHT / float(data.pop("carrier_hz"))
            data.setdefault("element_spacing", data["carrier_wavelength"] / 2)
        if "tx_power_dbm" in data:
            data["tx_power"] = dbm_to_watts(float(data.pop("tx_power_dbm")))
        if "noise_power_dbm" in data:
            data["noise_power"] = dbm_to_watts(float(data.pop("noise_power_dbm")))
        if "noise_bandwidth_hz" in data:
            nf = float(data.pop("noise_figure_db", 7.0))
            data["noise_power"] = thermal_noise_watts(float(data.pop("noise_bandwidth_hz")), nf)
        for key in ("pathloss_los", "pathloss_nlos"):
            if isinstance(data.get(key), dict):
                data[key] = PathLossModel(**data[key])
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)


def load_config(path: str | Path) -> tuple[SystemConfig, dict[str, Any]]:
    """Read a YAML scenario file.

    The ``system`` mapping feeds :class:`SystemConfig`; any other top-level
    sections (e.g. ``experiment``) are returned untouched for the caller.
    """
    path = Path(path)
    try:
        raw = yaml.safe_load(path.read_text()) or {}
    except (OSError, yaml.YAMLError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    system = raw.pop("system", {}) or {}
    return SystemConfig.from_dict(system), raw
