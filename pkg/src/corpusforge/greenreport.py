"""Energy and carbon reporting for processing runs.

Energy follows the nameplate-power model: device max power times a
utilization fraction times runtime. Emissions multiply by the grid
intensity unless the run was on a carbon-neutral platform, which forces
zero. Displayed kWh rounds half-even to one decimal; full precision is
kept internally and in the report file.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from corpusforge.errors import DataError

DEFAULT_UTILIZATION = 0.8


@dataclass(frozen=True)
class EnergyProfile:
    device_max_power_w: float
    utilization: float = DEFAULT_UTILIZATION
    runtime_h: float = 0.0
    grid_intensity_gco2_per_kwh: float = 0.0
    carbon_neutral: bool = False

    def __post_init__(self) -> None:
        if self.device_max_power_w < 0 or self.runtime_h < 0:
            raise DataError("power and runtime must be non-negative")
        if not 0.0 <= self.utilization <= 1.0:
            raise DataError(f"utilization {self.utilization} outside [0, 1]")
        if self.grid_intensity_gco2_per_kwh < 0:
            raise DataError("grid intensity must be non-negative")


def energy_kwh(profile: EnergyProfile) -> float:
    """kWh = max power (W) x utilization x runtime (h) / 1000, full precision."""
    return profile.device_max_power_w * profile.utilization * profile.runtime_h / 1000.0


def display_kwh(kwh: float) -> float:
    """One-decimal display value, rounded half-even."""
    return round(kwh, 1)


def emissions_kg(kwh: float, profile: EnergyProfile) -> float:
    """kgCO2 = kWh x grid intensity / 1000; zero on carbon-neutral runs."""
    if kwh < 0:
        raise DataError("energy must be non-negative")
    if profile.carbon_neutral:
        return 0.0
    if profile.grid_intensity_gco2_per_kwh < 0:
        raise DataError("grid intensity must be non-negative")
    return kwh * profile.grid_intensity_gco2_per_kwh / 1000.0


@dataclass
class GreenReport:
    kwh: float
    kgco2: float
    profile: EnergyProfile
    label: str = ""
    started_at: str = ""
    finished_at: str = ""

    @property
    def kwh_display(self) -> float:
        return display_kwh(self.kwh)

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "kwh": self.kwh,
            "kwh_display": self.kwh_display,
            "kgco2": self.kgco2,
            "profile": {
                "device_max_power_w": self.profile.device_max_power_w,
                "utilization": self.profile.utilization,
                "runtime_h": self.profile.runtime_h,
                "grid_intensity_gco2_per_kwh": self.profile.grid_intensity_gco2_per_kwh,
                "carbon_neutral": self.profile.carbon_neutral,
            },
            "started_at": self.started_at,
            "finished_at": self.finished_at,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "GreenReport":
        return cls(
            kwh=doc["kwh"],
            kgco2=doc["kgco2"],
            profile=EnergyProfile(**doc["profile"]),
            label=doc.get("label", ""),
            started_at=doc.get("started_at", ""),
            finished_at=doc.get("finished_at", ""),
        )

    def save(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, ensure_ascii=False, indent=2)
            fh.write("\n")

    @classmethod
    def load(cls, path: str | Path) -> "GreenReport":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def make_report(profile: EnergyProfile, label: str = "",
                started_at: str = "", finished_at: str = "") -> GreenReport:
    kwh = energy_kwh(profile)
    return GreenReport(
        kwh=kwh,
        kgco2=emissions_kg(kwh, profile),
        profile=profile,
        label=label,
        started_at=started_at,
        finished_at=finished_at,
    )
