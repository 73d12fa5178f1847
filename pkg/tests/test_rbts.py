import pickle

import numpy as np
import pytest

from derrel import rbts
from derrel.adoption import KIND_ORDER, Kind
from derrel.config import RunConfig
from derrel.mcengine import MCConfig, run_adaptive
from derrel.rbts import baseline_indices, build_modified_rbts, even_allocation, run_sweep

SMALL = MCConfig(max_samples=30, eps_saifi=0.05, eps_saidi=1.0)


@pytest.fixture(scope="module")
def small_spec(profiles):
    cfg = RunConfig().override("system", sample_customers=20, horizon_years=2)
    return build_modified_rbts(cfg, profiles)


def test_default_system(profiles):
    spec = build_modified_rbts(profiles=profiles)
    assert spec.n_loadpoints == 22
    assert spec.total_customers == 4700
    assert baseline_indices(spec) == pytest.approx((0.30, 3.47))
    assert spec.n_steps == 10 * 8760


def test_even_allocation():
    alloc = even_allocation(4700, 22)
    assert sum(alloc) == 4700
    assert alloc[0] == 214 and alloc[-1] == 213
    assert alloc.count(214) == 4700 % 22
    assert even_allocation(10, 3) == (4, 3, 3)


def test_sampler_deterministic_and_picklable(small_spec):
    sampler = small_spec.make_sampler(small_spec.scenario(Kind.VARIED, Kind.VARIED))
    a = sampler(123, 0.37)
    b = pickle.loads(pickle.dumps(sampler))(123, 0.37)
    assert (a.saifi, a.saidi) == (b.saifi, b.saidi)
    assert np.array_equal(a.aif, b.aif)
    assert a.aif.shape == (20,)


def test_shared_outage_mode(profiles):
    cfg = RunConfig().override("system", sample_customers=22, horizon_years=1, shared_outages=True)
    spec = build_modified_rbts(cfg, profiles)
    cfg0 = cfg.override("adoption", zero_threshold=100.0)
    spec0 = build_modified_rbts(cfg0, profiles)
    out = spec0.make_sampler(spec0.scenario("L", "L"))(7, 0.5)
    assert out.aif.shape == (22,)
    assert spec.shared_outages


def test_baseline_recovery(profiles):
    # a zero threshold above the adoption ranges forces x = y = 0 for everyone
    cfg = RunConfig().override("system", sample_customers=50, horizon_years=5).override("adoption", zero_threshold=100.0)
    spec = build_modified_rbts(cfg, profiles)
    res = run_adaptive(spec, spec.scenario("HC", "HC"), MCConfig())
    assert abs(res.saifi_mean - 0.30) <= res.saifi_half
    assert abs(res.saidi_mean - 3.47) <= res.saidi_half


def test_sweep_cell_independence(small_spec):
    cells_a = [(Kind.LIMITED, Kind.VARIED), (Kind.HIGHLY_CONCENTRATED, Kind.HIGHLY_CONCENTRATED)]
    cells_b = [(Kind.HIGHLY_CONCENTRATED, Kind.HIGHLY_CONCENTRATED)]
    a = run_sweep(small_spec, SMALL, cells=cells_a)
    b = run_sweep(small_spec, SMALL, cells=cells_b)
    ra, rb = a.cells[cells_b[0]], b.cells[cells_b[0]]
    assert (ra.n_samples, ra.saifi_mean, ra.saidi_mean) == (rb.n_samples, rb.saifi_mean, rb.saidi_mean)
    m = a.matrix("saifi_mean")
    assert m.shape == (4, 4) and np.isnan(m[0, 0]) and np.isfinite(m[3, 3])


def test_sweep_parallel_equivalence(small_spec):
    cells = [(Kind.VARIED, Kind.VARIED), (Kind.MEDIAN_FOCUSED, Kind.LIMITED)]
    seq = run_sweep(small_spec, SMALL, cells=cells)
    par = run_sweep(small_spec, SMALL, workers=3, cells=cells)
    for c in cells:
        assert seq.cells[c].trace == par.cells[c].trace
        assert np.array_equal(seq.cells[c].aif_histogram.counts, par.cells[c].aif_histogram.counts)


def test_sweep_isolates_failures(small_spec, monkeypatch):
    real = rbts.run_adaptive

    def flaky(spec, scenario, cfg, **kw):
        if scenario.x_kind is Kind.VARIED:
            raise RuntimeError("injected")
        return real(spec, scenario, cfg, **kw)

    monkeypatch.setattr(rbts, "run_adaptive", flaky)
    cells = [(Kind.VARIED, Kind.LIMITED), (Kind.LIMITED, Kind.LIMITED)]
    out = run_sweep(small_spec, SMALL, cells=cells)
    assert list(out.errors) == [(Kind.VARIED, Kind.LIMITED)]
    assert list(out.cells) == [(Kind.LIMITED, Kind.LIMITED)]
    stats = out.convergence_stats()
    assert stats["fastest"]["scenario"] == "L-L"


def test_full_grid_order(small_spec):
    tiny = MCConfig(max_samples=10, eps_saifi=1.0, eps_saidi=10.0)
    cfg = RunConfig().override("system", sample_customers=5, horizon_years=1)
    spec = build_modified_rbts(cfg, small_spec.profiles)
    out = run_sweep(spec, tiny)
    assert list(out.cells) == [(x, y) for x in KIND_ORDER for y in KIND_ORDER]
    assert np.all(np.isfinite(out.matrix("saidi_mean")))
