"""Residence model: PV output, storage dispatch, DER component failures and
interruption metrics (AIF, AID, AENS).

The scalar functions here are the reference definitions. ``simulate_trace``
steps them one timestep at a time; the block simulator in ``kernel`` runs the
same arithmetic in bulk.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from . import kernel
from .loadpoint import OutageHistory, renewal_intervals, snap_outward
from .timeseries import HOURS_PER_YEAR, ProfilePair

SOC_TOL = 1e-9


@dataclass(frozen=True)
class ResidenceSpec:
    peak_load_kw: float = 4.0
    x: float = 0.0  # PV kW per kW of peak
    y: float = 0.0  # storage kWh per kW of peak
    derating: float = 0.8
    eta_c: float = 0.95
    eta_d: float = 0.95
    soc_min: float = 0.0
    soc_max: float = 1.0
    soc_init: float = 0.5
    ch_max_kw: Optional[float] = None  # None -> ES_cap / 2 per hour
    d_max_kw: Optional[float] = None
    pv_comp: tuple[float, float] = (0.1, 168.0)  # (failures/yr, mttr h)
    es_comp: tuple[float, float] = (0.05, 168.0)

    def __post_init__(self):
        if not self.peak_load_kw > 0:
            raise ValueError("peak_load_kw must be positive")
        if self.x < 0 or self.y < 0:
            raise ValueError("penetration ratios must be non-negative")
        if not 0 < self.derating <= 1:
            raise ValueError("derating must lie in (0, 1]")
        if not (0 < self.eta_c <= 1 and 0 < self.eta_d <= 1):
            raise ValueError("efficiencies must lie in (0, 1]")
        if not 0 <= self.soc_min <= self.soc_init <= self.soc_max <= 1:
            raise ValueError("need 0 <= soc_min <= soc_init <= soc_max <= 1")
        for name in ("ch_max_kw", "d_max_kw"):
            v = getattr(self, name)
            if v is not None and v < 0:
                raise ValueError(f"{name} must be non-negative")
        for name in ("pv_comp", "es_comp"):
            lam, mttr = getattr(self, name)
            if lam < 0 or not mttr > 0:
                raise ValueError(f"{name} needs lambda >= 0 and mttr > 0")

    @property
    def pv_cap_kw(self) -> float:
        return self.x * self.peak_load_kw

    @property
    def es_cap_kwh(self) -> float:
        return self.y * self.peak_load_kw

    @property
    def charge_limit_kw(self) -> float:
        return self.es_cap_kwh / 2.0 if self.ch_max_kw is None else self.ch_max_kw

    @property
    def discharge_limit_kw(self) -> float:
        return self.es_cap_kwh / 2.0 if self.d_max_kw is None else self.d_max_kw

    def with_adoption(self, x: float, y: float, peak_load_kw: Optional[float] = None) -> "ResidenceSpec":
        return replace(self, x=x, y=y, peak_load_kw=self.peak_load_kw if peak_load_kw is None else peak_load_kw)


@dataclass(frozen=True)
class ResidenceState:
    soc: float
    s_n: int = 1
    s_lp: int = 1
    s_r: int = 1
    pv_avail: int = 1
    es_avail: int = 1


@dataclass(frozen=True)
class ResidenceMetrics:
    aif: float  # interruptions per year
    aid: float  # hours per year
    aens: float  # kWh per year
    horizon_years: float


@dataclass(frozen=True)
class StepFlows:
    """Energy routing for one step, kWh."""

    pv_to_load: float
    pv_to_storage: float
    pv_curtailed: float
    es_to_load: float
    grid_import: float
    unserved: float


@dataclass(frozen=True)
class DispatchResult:
    net_load_kwh: float
    state: ResidenceState
    unserved_kwh: float
    flows: StepFlows = field(repr=False)


def pv_output(pv_cap_kw: float, d: float, ghi_t: float, pv_avail: int) -> float:
    if not pv_avail:
        return 0.0
    return pv_cap_kw * d * ghi_t


def es_step(soc_prev: float, ch_kwh: float, dis_kwh: float, spec: ResidenceSpec, dt_hours: float = 1.0) -> float:
    """Advance state of charge by one step of charge or discharge energy.

    Flows must already respect the power and energy limits; a result outside
    ``[soc_min, soc_max]`` by more than rounding error is a caller bug.
    """
    cap = spec.es_cap_kwh
    if not cap > 0:
        raise ValueError("storage capacity must be positive")
    if ch_kwh > 0 and dis_kwh > 0:
        raise ValueError("simultaneous charge and discharge")
    if ch_kwh < 0 or dis_kwh < 0:
        raise ValueError("flows must be non-negative")
    if ch_kwh > spec.charge_limit_kw * dt_hours + SOC_TOL or dis_kwh > spec.discharge_limit_kw * dt_hours + SOC_TOL:
        raise ValueError("flow exceeds power limit")
    soc = soc_prev + (spec.eta_c * ch_kwh - dis_kwh / spec.eta_d) / cap
    if soc < spec.soc_min - SOC_TOL or soc > spec.soc_max + SOC_TOL:
        raise ValueError(f"state of charge {soc} outside [{spec.soc_min}, {spec.soc_max}]")
    return max(spec.soc_min, min(spec.soc_max, soc))


def dispatch_step(
    load_kw: float, pv_kw: float, state: ResidenceState, spec: ResidenceSpec, dt_hours: float = 1.0
) -> DispatchResult:
    """Self-consumption dispatch for one step.

    PV serves load first, surplus charges storage and the rest is curtailed;
    a deficit is drawn from storage and whatever remains is net load. The
    load-point state is taken from ``state.s_lp``.
    """
    if load_kw < 0 or pv_kw < 0:
        raise ValueError("load and PV must be non-negative")
    cap = spec.es_cap_kwh
    load_e = load_kw * dt_hours
    pv_e = pv_kw * dt_hours
    direct = min(load_e, pv_e)
    surplus = pv_e - direct
    deficit = load_e - direct
    ch = 0.0
    dis = 0.0
    soc = state.soc
    if state.es_avail and cap > 0.0:
        if surplus > 0.0:
            room = (spec.soc_max - soc) * cap / spec.eta_c
            ch = max(min(min(surplus, spec.charge_limit_kw * dt_hours), room), 0.0)
        elif deficit > 0.0:
            avail = (soc - spec.soc_min) * cap * spec.eta_d
            dis = max(min(min(deficit, spec.discharge_limit_kw * dt_hours), avail), 0.0)
        soc = es_step(soc, ch, dis, spec, dt_hours)
    net = deficit - dis
    s_n = 1 if net <= 0.0 else 0
    s_r = state.s_lp | s_n
    unserved = net if (state.s_lp == 0 and s_n == 0) else 0.0
    flows = StepFlows(
        pv_to_load=direct,
        pv_to_storage=ch,
        pv_curtailed=surplus - ch,
        es_to_load=dis,
        grid_import=net - unserved,
        unserved=unserved,
    )
    new_state = replace(state, soc=soc, s_n=s_n, s_r=s_r)
    return DispatchResult(net, new_state, unserved, flows)


def component_ranges(lambda_per_yr: float, mttr_hours: float, horizon_hours: float, rng: np.random.Generator, dt: float = 1.0):
    """Unavailable step ranges ``[k0, k1)`` for a two-state DER component."""
    n_steps = int(round(horizon_hours / dt))
    if lambda_per_yr <= 0:
        return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64)
    s, e = renewal_intervals(lambda_per_yr / HOURS_PER_YEAR, mttr_hours, horizon_hours, rng)
    return snap_outward(s, e, n_steps, dt)


def component_history(lambda_per_yr: float, mttr_hours: float, horizon_hours: float, rng: np.random.Generator, dt: float = 1.0) -> np.ndarray:
    """Binary availability per step (1 = available); failed steps snapped outward."""
    if not mttr_hours > 0:
        raise ValueError("mttr must be positive")
    n_steps = int(round(horizon_hours / dt))
    avail = np.ones(n_steps, dtype=np.int8)
    for k0, k1 in zip(*component_ranges(lambda_per_yr, mttr_hours, horizon_hours, rng, dt)):
        avail[k0:k1] = 0
    return avail


def detect_interruptions(s_r) -> int:
    """Count 1 -> 0 transitions; a series that starts at 0 adds nothing."""
    s = np.asarray(s_r, dtype=np.int8)
    if s.size < 1:
        raise ValueError("series must be non-empty")
    return int(np.count_nonzero((s[:-1] == 1) & (s[1:] == 0)))


def _check_grid(profiles: ProfilePair, outage: OutageHistory) -> int:
    if abs(profiles.timestep_hours - outage.timestep_hours) > 1e-12:
        raise ValueError("profiles and outage history use different timesteps")
    n_steps = outage.n_steps
    if n_steps % len(profiles) != 0:
        raise ValueError(
            f"horizon of {n_steps} steps is not a whole number of {len(profiles)}-step profile periods"
        )
    return n_steps


def _csr(parts: Sequence[np.ndarray], dtype) -> tuple[np.ndarray, np.ndarray]:
    ptr = np.zeros(len(parts) + 1, dtype=np.int64)
    if parts:
        ptr[1:] = np.cumsum([len(p) for p in parts])
        data = np.concatenate([np.asarray(p, dtype=dtype) for p in parts]) if ptr[-1] else np.empty(0, dtype=dtype)
    else:
        data = np.empty(0, dtype=dtype)
    return ptr, np.ascontiguousarray(data, dtype=dtype)


def simulate_block(
    template: ResidenceSpec,
    x: np.ndarray,
    y: np.ndarray,
    peaks: np.ndarray,
    profiles: ProfilePair,
    n_steps: int,
    lp_intervals: Sequence[tuple[np.ndarray, np.ndarray]],
    pv_ranges: Sequence[tuple[np.ndarray, np.ndarray]],
    es_ranges: Sequence[tuple[np.ndarray, np.ndarray]],
    backend: Optional[str] = None,
):
    """Simulate many residences sharing one template; returns (events, downtime_h, unserved_kwh)."""
    peaks = np.ascontiguousarray(peaks, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    pv_cap = np.ascontiguousarray(x * peaks)
    es_cap = np.ascontiguousarray(y * peaks)
    ch_max = es_cap / 2.0 if template.ch_max_kw is None else np.full(peaks.size, float(template.ch_max_kw))
    d_max = es_cap / 2.0 if template.d_max_kw is None else np.full(peaks.size, float(template.d_max_kw))
    lp_ptr, lp_start = _csr([iv[0] for iv in lp_intervals], np.float64)
    _, lp_end = _csr([iv[1] for iv in lp_intervals], np.float64)
    pv_ptr, pv_k0 = _csr([r[0] for r in pv_ranges], np.int64)
    _, pv_k1 = _csr([r[1] for r in pv_ranges], np.int64)
    es_ptr, es_k0 = _csr([r[0] for r in es_ranges], np.int64)
    _, es_k1 = _csr([r[1] for r in es_ranges], np.int64)
    return kernel.simulate_block(
        np.ascontiguousarray(profiles.load_shape.values),
        np.ascontiguousarray(profiles.ghi_shape.values),
        int(n_steps),
        float(profiles.timestep_hours),
        peaks,
        pv_cap,
        es_cap,
        np.ascontiguousarray(ch_max, dtype=np.float64),
        np.ascontiguousarray(d_max, dtype=np.float64),
        float(template.derating),
        float(template.eta_c),
        float(template.eta_d),
        float(template.soc_min),
        float(template.soc_max),
        float(template.soc_init),
        lp_ptr, lp_start, lp_end,
        pv_ptr, pv_k0, pv_k1,
        es_ptr, es_k0, es_k1,
        backend=backend,
    )


def draw_component_ranges(spec: ResidenceSpec, horizon_hours: float, rng: np.random.Generator, dt: float = 1.0):
    """PV then storage outage ranges, drawn in that order from ``rng``."""
    pv = component_ranges(*spec.pv_comp, horizon_hours, rng, dt)
    es = component_ranges(*spec.es_comp, horizon_hours, rng, dt)
    return pv, es


def simulate_residence(
    spec: ResidenceSpec,
    profiles: ProfilePair,
    outage: OutageHistory,
    rng: np.random.Generator,
    backend: Optional[str] = None,
) -> ResidenceMetrics:
    n_steps = _check_grid(profiles, outage)
    dt = profiles.timestep_hours
    horizon_hours = n_steps * dt
    pv_r, es_r = draw_component_ranges(spec, horizon_hours, rng, dt)
    return simulate_residence_with(spec, profiles, outage, pv_r, es_r, backend=backend)


def simulate_residence_with(spec, profiles, outage, pv_ranges, es_ranges, backend=None) -> ResidenceMetrics:
    """Simulate with caller-supplied component outage ranges (paired studies)."""
    n_steps = _check_grid(profiles, outage)
    years = n_steps * profiles.timestep_hours / HOURS_PER_YEAR
    ev, down, ens = simulate_block(
        spec, [spec.x], [spec.y], [spec.peak_load_kw], profiles, n_steps,
        [(outage.starts, outage.ends)], [pv_ranges], [es_ranges], backend=backend,
    )
    return ResidenceMetrics(float(ev[0]) / years, float(down[0]) / years, float(ens[0]) / years, years)


@dataclass
class Trace:
    soc: np.ndarray
    s_n: np.ndarray
    s_lp: np.ndarray
    s_r: np.ndarray
    pv_avail: np.ndarray
    es_avail: np.ndarray
    flows: list
    metrics: ResidenceMetrics


def simulate_trace(spec, profiles, outage, pv_ranges, es_ranges) -> Trace:
    """Step-by-step reference simulation built from ``dispatch_step``.

    Slow; intended for checking invariants and the bulk kernels.
    """
    n_steps = _check_grid(profiles, outage)
    dt = profiles.timestep_hours
    years = n_steps * dt / HOURS_PER_YEAR
    pv_av = np.ones(n_steps, dtype=np.int8)
    for k0, k1 in zip(*pv_ranges):
        pv_av[k0:k1] = 0
    es_av = np.ones(n_steps, dtype=np.int8)
    for k0, k1 in zip(*es_ranges):
        es_av[k0:k1] = 0
    # overlap hours per step, accumulated like the kernels
    ov_hours = np.zeros(n_steps)
    for a, b in zip(outage.starts, outage.ends):
        k_lo = max(0, int(np.floor(a / dt)) - 1)
        k_hi = min(n_steps, int(np.ceil(b / dt)) + 1)
        for k in range(k_lo, k_hi):
            lo = max(a, k * dt)
            hi = min(b, (k + 1) * dt)
            if hi - lo > 0.0:
                ov_hours[k] = ov_hours[k] + (hi - lo)

    load = profiles.load_shape.values
    ghi = profiles.ghi_shape.values
    n_prof = load.size
    state = ResidenceState(soc=spec.soc_init)
    soc_tr = np.empty(n_steps)
    sn_tr = np.empty(n_steps, dtype=np.int8)
    slp_tr = np.empty(n_steps, dtype=np.int8)
    sr_tr = np.empty(n_steps, dtype=np.int8)
    flows = []
    downtime = 0.0
    ens = 0.0
    pvc = spec.pv_cap_kw * spec.derating
    for t in range(n_steps):
        j = t % n_prof
        s_lp = 0 if ov_hours[t] > 0.0 else 1
        state = replace(state, s_lp=s_lp, pv_avail=int(pv_av[t]), es_avail=int(es_av[t]))
        load_kw = spec.peak_load_kw * load[j]
        pv_kw = pvc * ghi[j] if pv_av[t] else 0.0
        res = dispatch_step(load_kw, pv_kw, state, spec, dt)
        state = res.state
        if s_lp == 0 and state.s_n == 0:
            downtime = downtime + ov_hours[t]
            ens = ens + res.net_load_kwh * (ov_hours[t] / dt)
        soc_tr[t] = state.soc
        sn_tr[t] = state.s_n
        slp_tr[t] = s_lp
        sr_tr[t] = state.s_r
        flows.append(res.flows)
    events = detect_interruptions(sr_tr)
    metrics = ResidenceMetrics(events / years, downtime / years, ens / years, years)
    return Trace(soc_tr, sn_tr, slp_tr, sr_tr, pv_av, es_av, flows, metrics)
