import json

import numpy as np

from derrel import report
from derrel.indices import pool_aif
from derrel.mcengine import MCConfig, SampleOutcome, run_adaptive


def test_fmt_six_significant():
    assert report.fmt(0.123456789) == "0.123457"
    assert report.fmt(2.5) == "2.5"
    assert report.fmt(3) == "3"
    assert report.fmt(True) == "True"
    assert report.fmt(float("nan")) == "nan"
    assert json.loads(report.dumps({"a": 3.14159265, "b": np.float64(1 / 3), "c": [1e-9 / 3]})) == {
        "a": 3.14159,
        "b": 0.333333,
        "c": [3.33333e-10],
    }


def test_matrix_round_trip(tmp_path):
    m = np.arange(16, dtype=float).reshape(4, 4) / 7
    p = tmp_path / "m.csv"
    report.write_matrix(p, m)
    lines = p.read_text().splitlines()
    assert lines[0] == "pv\\es,L,V,MF,HC"
    assert [l.split(",")[0] for l in lines[1:]] == ["L", "V", "MF", "HC"]
    assert np.allclose(report.read_matrix(p), m, rtol=1e-5)


def test_histogram_csv(tmp_path):
    p = tmp_path / "h.csv"
    report.write_histogram(p, pool_aif([[0.0, 0.3]]))
    lines = p.read_text().splitlines()
    assert lines[0] == "bin_lo,bin_hi,count"
    assert lines[1] == "0,0.01,1" and lines[-1] == "0.3,0.31,1"


def test_scenario_outputs(tmp_path):
    res = run_adaptive(None, None, MCConfig(), sampler=lambda s, u: SampleOutcome(0.3, 3.47, np.array([0.3])))
    report.write_scenario_outputs(tmp_path, res, include_runtime=False)
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["n_samples"] == 10 and summary["runtime_seconds"] is None
    trace = (tmp_path / "convergence.csv").read_text().splitlines()
    assert trace[0] == "batch,n,saifi_mean,saifi_half,saidi_mean,saidi_half"
    assert trace[1] == "0,10,0.3,0,3.47,0"
