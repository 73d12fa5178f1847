"""Shared checks used by the unit and acceptance suites."""

import numpy as np

from derrel.residential import ResidenceSpec, ResidenceState, dispatch_step

TOL = 1e-9


def random_dispatch_invariants(n_steps: int, seed: int = 0) -> int:
    """Randomized single-step dispatch checks; returns the number of steps checked.

    Raises AssertionError naming the violated property.
    """
    rng = np.random.default_rng(seed)
    for _ in range(n_steps):
        soc_min = rng.uniform(0, 0.4)
        soc_max = rng.uniform(0.6, 1.0)
        spec = ResidenceSpec(
            peak_load_kw=rng.uniform(1, 10),
            x=rng.choice([0.0, rng.uniform(0, 3.5)]),
            y=rng.choice([0.0, rng.uniform(0, 6.75)]),
            derating=rng.uniform(0.5, 1.0),
            eta_c=rng.uniform(0.7, 1.0),
            eta_d=rng.uniform(0.7, 1.0),
            soc_min=soc_min,
            soc_max=soc_max,
            soc_init=rng.uniform(soc_min, soc_max),
        )
        dt = rng.choice([0.25, 0.5, 1.0])
        soc = rng.choice([soc_min, soc_max, rng.uniform(soc_min, soc_max)])
        state = ResidenceState(
            soc=soc,
            s_lp=int(rng.integers(2)),
            es_avail=int(rng.integers(2)),
            pv_avail=int(rng.integers(2)),
        )
        load_kw = spec.peak_load_kw * rng.uniform(0, 1)
        pv_kw = spec.pv_cap_kw * spec.derating * rng.uniform(0, 1.2) if state.pv_avail else 0.0
        res = dispatch_step(load_kw, pv_kw, state, spec, dt)
        f = res.flows
        new = res.state
        assert abs(f.pv_to_load + f.pv_to_storage + f.pv_curtailed - pv_kw * dt) <= TOL, "PV balance"
        assert abs(f.pv_to_load + f.es_to_load + f.grid_import + f.unserved - load_kw * dt) <= TOL, "load balance"
        assert min(f.pv_to_load, f.pv_to_storage, f.pv_curtailed, f.es_to_load, f.grid_import, f.unserved) >= -TOL, "sign"
        assert spec.soc_min - TOL <= new.soc <= spec.soc_max + TOL, "SOC bounds"
        assert new.s_r == (state.s_lp | new.s_n), "s_r truth table"
        assert (new.s_r == 0) == (state.s_lp == 0 and new.s_n == 0), "s_r truth table"
        assert new.s_n == (1 if res.net_load_kwh <= 0 else 0), "s_n definition"
        if not state.es_avail or spec.es_cap_kwh == 0:
            assert new.soc == state.soc, "failed storage SOC constancy"
            assert f.pv_to_storage == 0 and f.es_to_load == 0, "failed storage flows"
        if state.s_lp == 1:
            assert f.unserved == 0, "no unserved energy while grid is up"
    return n_steps
