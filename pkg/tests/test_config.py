import json

import pytest

from derrel.config import ConfigError, RunConfig


def test_defaults():
    c = RunConfig()
    assert (c.system.n_loadpoints, c.system.total_customers, c.system.lambda_lp, c.system.u_lp) == (22, 4700, 0.30, 3.47)
    assert c.system.horizon_years == 10 and c.system.timestep_hours == 1.0
    assert (c.residential.derating, c.residential.eta_c, c.residential.soc_init) == (0.8, 0.95, 0.5)
    assert (c.residential.pv_lambda, c.residential.pv_mttr_hours) == (0.1, 168.0)
    assert (c.residential.es_lambda, c.residential.es_mttr_hours) == (0.05, 168.0)
    assert (c.adoption.x_max, c.adoption.y_max) == (3.5, 6.75)
    m = c.mc.to_mc_config()
    assert (m.alpha, m.batch_size, m.min_samples, m.max_samples, m.eps_saifi, m.eps_saidi, m.master_seed) == (
        0.05, 10, 10, 2000, 0.005, 0.1, 42,
    )


def test_round_trip(tmp_path):
    c = RunConfig().override("mc", seed=7)
    p = tmp_path / "c.json"
    p.write_text(json.dumps(c.to_dict()))
    assert RunConfig.load(p) == c


def test_partial_file(tmp_path):
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"system": {"sample_customers": 50}, "mc": {"max_samples": 100}}))
    c = RunConfig.load(p)
    assert c.system.sample_customers == 50 and c.mc.max_samples == 100
    assert c.system.lambda_lp == 0.30


@pytest.mark.parametrize(
    "data",
    [
        {"sytem": {}},
        {"system": {"lamda_lp": 0.3}},
        {"system": {"n_loadpoints": "22"}},
        {"system": {"n_loadpoints": True}},
        {"system": {"lambda_lp": -1}},
        {"mc": {"max_samples": 105}},
        {"mc": {"min_samples": 5}},
        {"residential": {"soc_min": 0.8}},
        {"adoption": {"x_max": 0}},
        {"system": []},
        [],
    ],
)
def test_rejects(data):
    with pytest.raises(ConfigError):
        RunConfig.from_dict(data)


def test_invalid_json(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    with pytest.raises(ConfigError):
        RunConfig.load(p)


def test_override_ignores_none_and_validates():
    c = RunConfig()
    assert c.override("mc", seed=None) is c
    with pytest.raises(ConfigError):
        c.override("system", horizon_years=0)
    with pytest.raises(ConfigError):
        c.override("system", bogus=1)


def test_nullable_fields():
    c = RunConfig.from_dict({"residential": {"ch_max_kw": None, "d_max_kw": 2.0}, "io": {"load_csv": None}})
    assert c.residential.template().discharge_limit_kw == 2.0
    with pytest.raises(ConfigError):
        RunConfig.from_dict({"system": {"lambda_lp": None}})
