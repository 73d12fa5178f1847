"""Kernel benchmark: compiled extension versus numpy fallback on the same block."""

from __future__ import annotations

import time

import numpy as np

from .kernel import available_backends
from .loadpoint import LoadPointParams, renewal_intervals
from .residential import ResidenceSpec, component_ranges, simulate_block
from .timeseries import HOURS_PER_YEAR, synth_profiles


def make_block(customers: int, years: int, seed: int = 7):
    rng = np.random.default_rng(seed)
    profiles = synth_profiles(42)
    spec = ResidenceSpec()
    lp = LoadPointParams(0.3, 3.47)
    horizon = years * HOURS_PER_YEAR
    lp_iv = [renewal_intervals(lp.lambda_per_hour, lp.mean_repair_hours, horizon, rng) for _ in range(customers)]
    pv = [component_ranges(*spec.pv_comp, horizon, rng) for _ in range(customers)]
    es = [component_ranges(*spec.es_comp, horizon, rng) for _ in range(customers)]
    x = rng.uniform(0, 3.5, customers)
    y = rng.uniform(0, 6.75, customers)
    peaks = np.full(customers, spec.peak_load_kw)
    return (spec, x, y, peaks, profiles, horizon, lp_iv, pv, es)


def run_benchmark(customers: int = 50, years: int = 2, repeat: int = 3) -> dict:
    block = make_block(customers, years)
    steps = customers * years * HOURS_PER_YEAR
    timings = {}
    outputs = {}
    for backend in available_backends():
        best = float("inf")
        for _ in range(repeat):
            t0 = time.perf_counter()
            outputs[backend] = simulate_block(*block, backend=backend)
            best = min(best, time.perf_counter() - t0)
        timings[backend] = best
        print(f"{backend:>7}: {best:8.4f} s  ({best / steps * 1e9:7.1f} ns per residence-step)")
    if len(outputs) == 2:
        same = all(np.array_equal(a, b) for a, b in zip(outputs["cython"], outputs["python"]))
        print(f"speed-up: {timings['python'] / timings['cython']:.0f}x, identical results: {same}")
    return timings


if __name__ == "__main__":
    run_benchmark()
