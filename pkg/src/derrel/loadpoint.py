"""Load-point up/down histories and utility-perceived indices."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .timeseries import HOURS_PER_YEAR


@dataclass(frozen=True)
class LoadPointParams:
    lambda_lp: float  # failures per year
    u_lp: float  # outage hours per year
    customers: int = 1

    def __post_init__(self):
        if not self.lambda_lp > 0 or not self.u_lp > 0:
            raise ValueError("lambda_lp and u_lp must be positive")
        if self.customers < 1:
            raise ValueError("customers must be a positive count")

    @property
    def mean_repair_hours(self) -> float:
        return self.u_lp / self.lambda_lp

    @property
    def lambda_per_hour(self) -> float:
        return self.lambda_lp / HOURS_PER_YEAR

    @property
    def mu_per_hour(self) -> float:
        return 1.0 / self.mean_repair_hours


def draw_ttf(r: float, lam: float) -> float:
    """Inverse-transform time to failure, in the reciprocal unit of ``lam``."""
    if not 0.0 < r <= 1.0:
        raise ValueError(f"uniform sample must lie in (0, 1], got {r}")
    if not lam > 0:
        raise ValueError("failure rate must be positive")
    return -math.log(r) / lam


def draw_ttr(r: float, mu: float) -> float:
    if not 0.0 < r <= 1.0:
        raise ValueError(f"uniform sample must lie in (0, 1], got {r}")
    if not mu > 0:
        raise ValueError("repair rate must be positive")
    return -math.log(r) / mu


def renewal_intervals(
    lambda_per_hour: float, mttr_hours: float, horizon_hours: float, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """Down intervals ``[start, end)`` of an alternating exponential up/down process.

    The process starts up at t = 0. Uniforms are drawn as ``1 - U[0, 1)`` so
    they lie in (0, 1] and are fed through the TTF/TTR inverse transforms.
    An outage running past the horizon is clipped to it.
    """
    if lambda_per_hour <= 0:
        return np.empty(0), np.empty(0)
    mu = 1.0 / mttr_hours
    starts: list[np.ndarray] = []
    ends: list[np.ndarray] = []
    t = 0.0
    chunk = max(8, int(2.0 * lambda_per_hour * horizon_hours) + 8)
    while t < horizon_hours:
        r = 1.0 - rng.random(2 * chunk)
        ttf = -np.log(r[0::2]) / lambda_per_hour
        ttr = -np.log(r[1::2]) / mu
        cycle_end = t + np.cumsum(ttf + ttr)
        s = cycle_end - ttr
        e = cycle_end
        keep = s < horizon_hours
        starts.append(s[keep])
        ends.append(np.minimum(e[keep], horizon_hours))
        t = float(cycle_end[-1])
    if not starts:
        return np.empty(0), np.empty(0)
    return np.concatenate(starts), np.concatenate(ends)


def step_down_fraction(starts, ends, n_steps: int, dt: float) -> np.ndarray:
    """Fraction of each timestep covered by down intervals.

    Overlaps are accumulated interval by interval in the same order and with
    the same arithmetic as the simulation kernels.
    """
    frac = np.zeros(n_steps)
    for a, b in zip(starts, ends):
        k0 = int(math.floor(a / dt))
        k1 = min(n_steps, int(math.ceil(b / dt)))
        for k in range(k0, k1):
            t0 = k * dt
            t1 = (k + 1) * dt
            ov = min(b, t1) - max(a, t0)
            if ov > 0:
                frac[k] += ov
    return frac / dt


def snap_outward(starts, ends, n_steps: int, dt: float) -> tuple[np.ndarray, np.ndarray]:
    """Step index ranges ``[k0, k1)`` touched by each interval."""
    starts = np.asarray(starts, dtype=np.float64)
    ends = np.asarray(ends, dtype=np.float64)
    k0 = np.floor(starts / dt).astype(np.int64)
    k1 = np.minimum(np.ceil(ends / dt).astype(np.int64), n_steps)
    keep = k1 > k0
    return k0[keep], k1[keep]


@dataclass(frozen=True)
class OutageHistory:
    """Continuous down intervals of one load point plus their timestep view.

    ``s_lp`` marks a step down (0) when any part of it overlaps an outage;
    ``down_fraction`` keeps the exact covered share of each step so that
    durations are not inflated by the grid mapping.
    """

    starts: np.ndarray
    ends: np.ndarray
    horizon_hours: float
    timestep_hours: float = 1.0

    @property
    def n_steps(self) -> int:
        return int(round(self.horizon_hours / self.timestep_hours))

    @property
    def n_events(self) -> int:
        return int(self.starts.size)

    @property
    def downtime_hours(self) -> float:
        return float(np.sum(self.ends - self.starts))

    @property
    def s_lp(self) -> np.ndarray:
        state = np.ones(self.n_steps, dtype=np.int8)
        for k0, k1 in zip(*snap_outward(self.starts, self.ends, self.n_steps, self.timestep_hours)):
            state[k0:k1] = 0
        return state

    @property
    def down_fraction(self) -> np.ndarray:
        return step_down_fraction(self.starts, self.ends, self.n_steps, self.timestep_hours)

    @classmethod
    def all_up(cls, horizon_hours: float, timestep_hours: float = 1.0) -> "OutageHistory":
        return cls(np.empty(0), np.empty(0), horizon_hours, timestep_hours)


def synth_history(
    params: LoadPointParams, horizon_hours: float, rng: np.random.Generator, timestep_hours: float = 1.0
) -> OutageHistory:
    if not horizon_hours > 0:
        raise ValueError("horizon_hours must be positive")
    starts, ends = renewal_intervals(params.lambda_per_hour, params.mean_repair_hours, horizon_hours, rng)
    return OutageHistory(starts, ends, float(horizon_hours), timestep_hours)


def perceived_indices(points: Sequence[LoadPointParams]) -> tuple[float, float]:
    """Customer-weighted SAIFI/SAIDI from load-point (lambda, U) data."""
    if not points:
        raise ValueError("at least one load point is required")
    total = sum(p.customers for p in points)
    if total <= 0:
        raise ValueError("total customer count must be positive")
    saifi = sum(p.lambda_lp * p.customers for p in points) / total
    saidi = sum(p.u_lp * p.customers for p in points) / total
    return saifi, saidi
