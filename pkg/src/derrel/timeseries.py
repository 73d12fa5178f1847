"""Hourly load and irradiance series.

Load shapes are stored per-unit of the residence peak demand and GHI shapes
per-unit of 1000 W/m^2, so ``PV_cap [kW] * d * ghi`` is already in kW.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

HOURS_PER_YEAR = 8760

# synthetic generator constants
LATITUDE_DEG = 34.05  # Los Angeles
MORNING_PEAK_HOUR = 8.0
EVENING_PEAK_HOUR = 19.0
SEASONAL_AMPLITUDE = 0.20
LOAD_BASE = 0.05
DAYTIME_EXTRA = 0.16  # occupancy base between ~06:30 and ~22:30
MORNING_AMPLITUDE = 0.15
MORNING_WIDTH_H = 1.5
EVENING_AMPLITUDE = 0.55
EVENING_WIDTH_H = 2.5
LOAD_NOISE_SD = 0.05
HOT_DAY_PROB = 0.10  # summer peak; zero in winter
HOT_DAY_AC = (0.1, 0.4)  # extra afternoon cooling load, per-unit of the typical evening peak
AC_PEAK_HOUR = 17.0
AC_WIDTH_H = 3.0
CLOUDY_DAY_PROB = 0.08  # annual mean; more in winter
CLOUDY_DAY_SWING = 0.06
CLOUDY_CLEARNESS = (0.35, 0.75)
CLEAR_CLEARNESS = (0.9, 1.0)
MAX_GHI = 1.2


class SeriesError(ValueError):
    """Raised for malformed or out-of-range series input."""


@dataclass(frozen=True)
class HourlySeries:
    values: np.ndarray
    timestep_hours: float = 1.0
    label: str = ""

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64)
        if values.ndim != 1 or values.size < 1:
            raise SeriesError("series must be one-dimensional with at least one sample")
        if not np.all(np.isfinite(values)):
            raise SeriesError(f"series {self.label!r} contains non-finite values")
        if np.any(values < 0):
            raise SeriesError(f"series {self.label!r} contains negative values")
        if not self.timestep_hours > 0:
            raise SeriesError("timestep_hours must be positive")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return self.values.size

    @property
    def is_annual(self) -> bool:
        return self.values.size == round(HOURS_PER_YEAR / self.timestep_hours)


@dataclass(frozen=True)
class ProfilePair:
    """Peak-normalized load shape and per-unit GHI shape on a common grid."""

    load_shape: HourlySeries
    ghi_shape: HourlySeries

    def __post_init__(self):
        if len(self.load_shape) != len(self.ghi_shape):
            raise SeriesError("load and GHI shapes must have equal length")
        if self.load_shape.timestep_hours != self.ghi_shape.timestep_hours:
            raise SeriesError("load and GHI shapes must share a timestep")
        if abs(float(self.load_shape.values.max()) - 1.0) > 1e-9:
            raise SeriesError("load shape must be normalized to a peak of 1")
        if float(self.ghi_shape.values.max()) > MAX_GHI:
            raise SeriesError(f"GHI shape exceeds {MAX_GHI} per-unit")

    @property
    def timestep_hours(self) -> float:
        return self.load_shape.timestep_hours

    def __len__(self) -> int:
        return len(self.load_shape)


def import_csv_series(path, column: str, timestep_hours: float = 1.0) -> HourlySeries:
    """Read one named column of a headered CSV file as an hourly series.

    Errors name the offending data row (1-based, header excluded).
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such file: {path}")
    values = []
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or column not in reader.fieldnames:
            raise SeriesError(f"column {column!r} not found in {path}")
        for row_idx, row in enumerate(reader, start=1):
            cell = (row.get(column) or "").strip()
            try:
                value = float(cell)
            except ValueError:
                raise SeriesError(f"row {row_idx}: non-numeric value {cell!r} in column {column!r}") from None
            if not math.isfinite(value):
                raise SeriesError(f"row {row_idx}: non-finite value {cell!r} in column {column!r}")
            if value < 0:
                raise SeriesError(f"row {row_idx}: negative value {value} in column {column!r}")
            values.append(value)
    if not values:
        raise SeriesError(f"column {column!r} in {path} has no data rows")
    return HourlySeries(np.asarray(values), timestep_hours, label=column)


def normalize_to_peak(series: HourlySeries) -> HourlySeries:
    peak = float(series.values.max())
    if peak <= 0:
        raise SeriesError("cannot normalize an all-zero series")
    return HourlySeries(series.values / peak, series.timestep_hours, series.label)


def solar_declination(day_of_year: np.ndarray) -> np.ndarray:
    """Cooper's approximation, radians."""
    return np.radians(23.45) * np.sin(2.0 * np.pi * (284.0 + day_of_year) / 365.0)


def solar_elevation(hours: np.ndarray, latitude_deg: float = LATITUDE_DEG) -> np.ndarray:
    """Sine of solar elevation at absolute hour-of-year (local solar time)."""
    hours = np.asarray(hours, dtype=np.float64)
    day = np.floor(hours / 24.0) % 365 + 1
    hour_angle = np.radians(15.0 * (hours % 24.0 - 12.0))
    phi = np.radians(latitude_deg)
    delta = solar_declination(day)
    return np.sin(phi) * np.sin(delta) + np.cos(phi) * np.cos(delta) * np.cos(hour_angle)


def _daylight_window(day_of_year: np.ndarray, latitude_deg: float):
    phi = np.radians(latitude_deg)
    delta = solar_declination(day_of_year)
    cos_w0 = np.clip(-np.tan(phi) * np.tan(delta), -1.0, 1.0)
    half_len = np.degrees(np.arccos(cos_w0)) / 15.0
    return 12.0 - half_len, 12.0 + half_len


def synth_profiles(seed: int, year_hours: int = HOURS_PER_YEAR, timestep_hours: float = 1.0) -> ProfilePair:
    """Deterministic stand-in for a measured residential load/irradiance year.

    The load is a double-peaked daily pattern (08:00 and 19:00) over a base
    that is higher while occupants are awake, with a +/-20% summer-peaking
    seasonal swing and multiplicative noise. A few hot summer days add an
    afternoon cooling bump that sets the annual peak. GHI is a clear-sky
    half-sine between sunrise and sunset, scaled by the noon solar elevation
    and attenuated by seeded daily cloudiness. Samples are taken at step
    midpoints.
    """
    if year_hours < 24:
        raise SeriesError("year_hours must be at least 24")
    n = int(round(year_hours / timestep_hours))
    rng = np.random.default_rng(np.random.SeedSequence(int(seed) & 0xFFFFFFFFFFFFFFFF))
    t_mid = (np.arange(n) + 0.5) * timestep_hours
    day_idx = np.floor(t_mid / 24.0).astype(np.int64)
    hod = t_mid % 24.0
    doy = day_idx % 365 + 1
    season = np.cos(2.0 * np.pi * (doy - 172) / 365.0)

    def bump(center, width):
        d = (hod - center + 12.0) % 24.0 - 12.0
        return np.exp(-0.5 * (d / width) ** 2)

    awake = 1.0 / (1.0 + np.exp(-(hod - 6.5) / 0.5)) - 1.0 / (1.0 + np.exp(-(hod - 22.5) / 0.5))
    load = (
        LOAD_BASE
        + DAYTIME_EXTRA * awake
        + MORNING_AMPLITUDE * bump(MORNING_PEAK_HOUR, MORNING_WIDTH_H)
        + EVENING_AMPLITUDE * bump(EVENING_PEAK_HOUR, EVENING_WIDTH_H)
    )
    load = load * (1.0 + SEASONAL_AMPLITUDE * season)
    load = load * np.exp(rng.normal(0.0, LOAD_NOISE_SD, n))

    n_days = int(day_idx[-1]) + 1
    day_season = np.cos(2.0 * np.pi * (np.arange(n_days) % 365 + 1 - 172) / 365.0)
    p_cloudy = CLOUDY_DAY_PROB - CLOUDY_DAY_SWING * day_season
    cloudy = rng.random(n_days) < p_cloudy
    clearness = np.where(cloudy, rng.uniform(*CLOUDY_CLEARNESS, n_days), rng.uniform(*CLEAR_CLEARNESS, n_days))

    sunrise, sunset = _daylight_window(doy.astype(np.float64), LATITUDE_DEG)
    day_len = sunset - sunrise
    inside = (hod > sunrise) & (hod < sunset) & (solar_elevation(t_mid) > 0)
    phase = np.where(inside, (hod - sunrise) / np.where(day_len > 0, day_len, 1.0), 0.0)
    noon_elev = solar_elevation(day_idx * 24.0 + 12.0)
    ghi = np.where(inside, np.sin(np.pi * phase) * np.clip(noon_elev, 0.0, None), 0.0)
    ghi = ghi * clearness[day_idx] * rng.uniform(0.95, 1.0, n)
    ghi = np.clip(ghi, 0.0, MAX_GHI)

    # a few hot summer days with air conditioning set the annual peak
    hot = rng.random(n_days) < HOT_DAY_PROB * np.clip(day_season, 0.0, None)
    ac = np.where(hot, rng.uniform(*HOT_DAY_AC, n_days), 0.0)
    load = load + EVENING_AMPLITUDE * ac[day_idx] * bump(AC_PEAK_HOUR, AC_WIDTH_H)
    load = load / load.max()

    return ProfilePair(
        HourlySeries(load, timestep_hours, "load"),
        HourlySeries(ghi, timestep_hours, "ghi"),
    )
