"""Adaptive Monte Carlo driver.

Samples are evaluated in batches. Every sample gets a seed derived only from
(master seed, batch index, sample index), and results are folded into the
running estimators in ascending sample order. Output therefore does not
depend on how many worker processes evaluated the batch.
"""

from __future__ import annotations

import logging
import math
import time
from concurrent.futures import Executor, ProcessPoolExecutor
from dataclasses import dataclass, field
from statistics import NormalDist
from typing import Callable, NamedTuple, Optional, Sequence

import numpy as np

from .adoption import AdoptionScenario, Kind
from .indices import DEFAULT_BIN_WIDTH, AifHistogram

logger = logging.getLogger(__name__)

MASK64 = 0xFFFFFFFFFFFFFFFF
_STRATA_TAG = 0x5354524154410001
_SCENARIO_TAG = 0x5343454E41524900


# -- streaming estimators -----------------------------------------------------


@dataclass(frozen=True)
class EstimatorState:
    n: int = 0
    mean: float = 0.0
    m2: float = 0.0

    @property
    def variance(self) -> float:
        if self.n < 2:
            raise ValueError("variance needs at least two observations")
        return self.m2 / (self.n - 1)

    @property
    def std(self) -> float:
        return math.sqrt(self.variance)


def welford_update(state: EstimatorState, value: float) -> EstimatorState:
    value = float(value)
    if not math.isfinite(value):
        raise ValueError(f"non-finite observation {value}")
    n = state.n + 1
    delta = value - state.mean
    mean = state.mean + delta / n
    m2 = state.m2 + delta * (value - mean)
    return EstimatorState(n, mean, m2)


def merge_states(a: EstimatorState, b: EstimatorState) -> EstimatorState:
    """Pairwise combination of two partial estimators (Chan et al.)."""
    if a.n == 0:
        return b
    if b.n == 0:
        return a
    n = a.n + b.n
    delta = b.mean - a.mean
    mean = a.mean + delta * b.n / n
    m2 = a.m2 + b.m2 + delta * delta * a.n * b.n / n
    return EstimatorState(n, mean, m2)


def z_value(alpha: float) -> float:
    return NormalDist().inv_cdf(1.0 - alpha / 2.0)


def ci_half_width(state: EstimatorState, alpha: float = 0.05) -> float:
    if state.n < 2:
        raise ValueError("half-width needs at least two observations")
    return z_value(alpha) * math.sqrt(max(state.variance, 0.0)) / math.sqrt(state.n)


# -- configuration and stopping ------------------------------------------------


@dataclass(frozen=True)
class MCConfig:
    alpha: float = 0.05
    batch_size: int = 10
    min_samples: int = 10
    max_samples: int = 2000
    eps_saifi: float = 0.005
    eps_saidi: float = 0.1
    master_seed: int = 42
    aif_bin_width: float = DEFAULT_BIN_WIDTH

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")
        if self.batch_size < 1:
            raise ValueError("batch_size must be at least 1")
        if self.min_samples < self.batch_size:
            raise ValueError("min_samples must be at least batch_size")
        if self.max_samples < self.min_samples:
            raise ValueError("max_samples must be at least min_samples")
        if self.max_samples % self.batch_size:
            raise ValueError("max_samples must be a multiple of batch_size")
        if not (self.eps_saifi > 0 and self.eps_saidi > 0):
            raise ValueError("tolerances must be positive")


class StopDecision(NamedTuple):
    stop: bool
    converged: bool


def should_stop(saifi: EstimatorState, saidi: EstimatorState, config: MCConfig) -> StopDecision:
    if saifi.n != saidi.n:
        raise ValueError("estimators disagree on sample count")
    n = saifi.n
    converged = (
        n >= config.min_samples
        and n >= 2
        and ci_half_width(saifi, config.alpha) <= config.eps_saifi
        and ci_half_width(saidi, config.alpha) <= config.eps_saidi
    )
    return StopDecision(converged or n >= config.max_samples, converged)


# -- seeding -------------------------------------------------------------------


def splitmix64(z: int) -> int:
    z = (z + 0x9E3779B97F4A7C15) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def sample_seed(master: int, batch_idx: int, sample_idx: int) -> int:
    h = splitmix64(master & MASK64)
    h = splitmix64(h ^ (batch_idx & MASK64))
    return splitmix64(h ^ (sample_idx & MASK64))


def scenario_seed(master: int, x_kind: Kind, y_kind: Kind) -> int:
    """Per-cell master seed, so a cell's result does not depend on which others run."""
    codes = {k: i for i, k in enumerate(Kind)}
    return sample_seed(splitmix64(master ^ _SCENARIO_TAG), codes[x_kind] + 1, codes[y_kind] + 1)


def stratified_uniforms(batch_size: int, batch_idx: int, master: int) -> np.ndarray:
    """One uniform per stratum ``[i/B, (i+1)/B)``, jittered and shuffled."""
    if batch_size < 1:
        raise ValueError("batch_size must be at least 1")
    rng = np.random.default_rng(sample_seed(splitmix64(master ^ _STRATA_TAG), batch_idx, 0))
    perm = rng.permutation(batch_size)
    jitter = rng.random(batch_size)
    return (perm + jitter) / batch_size


# -- driver --------------------------------------------------------------------


@dataclass
class SampleOutcome:
    saifi: float
    saidi: float
    aif: np.ndarray = field(default_factory=lambda: np.zeros(0))


SampleFn = Callable[[int, float], SampleOutcome]


class SampleError(RuntimeError):
    def __init__(self, batch_idx: int, sample_idx: int, cause: BaseException):
        super().__init__(f"sample (batch {batch_idx}, index {sample_idx}) failed: {cause!r}")
        self.batch_idx = batch_idx
        self.sample_idx = sample_idx


@dataclass
class ScenarioResult:
    scenario: Optional[AdoptionScenario]
    n_samples: int
    saifi_mean: float
    saifi_half: float
    saidi_mean: float
    saidi_half: float
    converged: bool
    aif_histogram: AifHistogram
    runtime_seconds: float
    trace: list = field(default_factory=list)

    def summary(self, include_runtime: bool = True) -> dict:
        return {
            "scenario": self.scenario.to_dict() if self.scenario is not None else None,
            "n_samples": self.n_samples,
            "saifi_mean": self.saifi_mean,
            "saifi_half": self.saifi_half,
            "saidi_mean": self.saidi_mean,
            "saidi_half": self.saidi_half,
            "converged": self.converged,
            "runtime_seconds": self.runtime_seconds if include_runtime else None,
        }


def _call_sample(args):
    fn, seed, base_u = args
    return fn(seed, base_u)


def _evaluate_batch(fn: SampleFn, seeds: Sequence[int], base_us: Sequence[float], executor: Optional[Executor], batch_idx: int):
    if executor is None:
        out = []
        for i, (s, u) in enumerate(zip(seeds, base_us)):
            try:
                out.append(fn(s, float(u)))
            except Exception as exc:
                raise SampleError(batch_idx, i, exc) from exc
        return out
    futures = [executor.submit(_call_sample, (fn, s, float(u))) for s, u in zip(seeds, base_us)]
    out = []
    for i, fut in enumerate(futures):
        try:
            out.append(fut.result())
        except Exception as exc:
            raise SampleError(batch_idx, i, exc) from exc
    return out


def run_adaptive(
    system,
    scenario: Optional[AdoptionScenario],
    config: MCConfig,
    workers: int = 1,
    sampler: Optional[SampleFn] = None,
    executor: Optional[Executor] = None,
) -> ScenarioResult:
    """Expand the sample in batches until both half-widths meet tolerance.

    ``system`` must provide ``make_sampler(scenario)`` unless ``sampler`` is
    given directly. The sampler is called as ``sampler(seed, base_u)`` where
    ``base_u`` is the sample's stratified uniform. Seeds are keyed on the
    scenario cell, so the same cell gives the same result in any sweep.
    """
    started = time.perf_counter()
    fn = sampler if sampler is not None else system.make_sampler(scenario)
    master = config.master_seed
    if scenario is not None:
        master = scenario_seed(master, scenario.x_kind, scenario.y_kind)

    own_pool = None
    if executor is None and workers > 1:
        own_pool = ProcessPoolExecutor(max_workers=workers)
        executor = own_pool

    saifi = EstimatorState()
    saidi = EstimatorState()
    hist = AifHistogram(config.aif_bin_width)
    trace = []
    decision = StopDecision(False, False)
    batch_idx = 0
    try:
        while True:
            base = stratified_uniforms(config.batch_size, batch_idx, master)
            seeds = [sample_seed(master, batch_idx, i) for i in range(config.batch_size)]
            outcomes = _evaluate_batch(fn, seeds, base, executor, batch_idx)
            for o in outcomes:
                saifi = welford_update(saifi, o.saifi)
                saidi = welford_update(saidi, o.saidi)
                hist.add(o.aif)
            decision = should_stop(saifi, saidi, config)
            h_f = ci_half_width(saifi, config.alpha) if saifi.n >= 2 else math.inf
            h_d = ci_half_width(saidi, config.alpha) if saidi.n >= 2 else math.inf
            trace.append((batch_idx, saifi.n, saifi.mean, h_f, saidi.mean, h_d))
            logger.debug("batch %d n=%d saifi=%.5f+-%.5f saidi=%.4f+-%.4f", batch_idx, saifi.n, saifi.mean, h_f, saidi.mean, h_d)
            batch_idx += 1
            if decision.stop:
                break
    finally:
        if own_pool is not None:
            own_pool.shutdown()

    return ScenarioResult(
        scenario=scenario,
        n_samples=saifi.n,
        saifi_mean=saifi.mean,
        saifi_half=ci_half_width(saifi, config.alpha),
        saidi_mean=saidi.mean,
        saidi_half=ci_half_width(saidi, config.alpha),
        converged=decision.converged,
        aif_histogram=hist,
        runtime_seconds=time.perf_counter() - started,
        trace=trace,
    )
