import filecmp
import json
import logging

import numpy as np
import pytest

from levspin.errors import ConfigError
from levspin.scenarios import (DEFAULTS, SCENARIOS, ScenarioResult, SimulationSettings, Table, converge,
                               initial_truncation, replay, run_all, run_scenario)
from levspin.scenarios.figures import merge_options


def test_csv_layout(tmp_path):
    t = Table("demo").add("t", "1/Lambda", [0.0, 0.1]).add("ok", "1", np.array([True, False])).add("n", "1", [1, 2])
    t.write_csv(tmp_path / "demo.csv")
    raw = (tmp_path / "demo.csv").read_bytes()
    assert raw == b"t[1/Lambda],ok[1],n[1]\r\n0.0,true,1\r\n0.1,false,2\r\n"
    with pytest.raises(ValueError):
        t.add("short", "1", [1.0])
    bad = Table("c").add("z", "1", np.array([1 + 1j]))
    with pytest.raises(TypeError):
        bad.write_csv(tmp_path / "c.csv")


def test_float_round_trip(tmp_path):
    vals = np.array([1 / 3, 1e-300, -2.5e17])
    Table("f").add("x", "1", vals).write_csv(tmp_path / "f.csv")
    back = np.loadtxt(tmp_path / "f.csv", delimiter=",", skiprows=1)
    assert np.array_equal(back, vals)


def test_result_layout_and_pass_logic(tmp_path):
    res = ScenarioResult("demo", {"scenario": "demo"})
    res.flag("a", True, "x < 1")
    res.flag("info", False, "shown only", informational=True)
    assert res.passed
    res.flag("b", False, "y < 1")
    assert not res.passed
    root = res.write(tmp_path)
    summary = json.loads((root / "summary.json").read_text())
    assert summary["flags"] == {"a": True, "b": False, "info": False}
    assert summary["informational"] == ["info"] and summary["targets"]["b"] == "y < 1"
    assert (root / "data").is_dir() and (root / "params.json").exists()


def test_settings_validation():
    with pytest.raises(ConfigError):
        SimulationSettings(rtol=0)
    with pytest.raises(ConfigError):
        SimulationSettings(n_step=1.5)
    assert initial_truncation(0.0) == 20 and initial_truncation(2.0) == 36


def test_merge_options():
    assert merge_options("fig4", {"gamma": 0.02})["gamma"] == 0.02
    with pytest.raises(ConfigError, match="allowed"):
        merge_options("fig4", {"gama": 0.02})
    assert set(DEFAULTS) == set(SCENARIOS)


def test_converge_escalates_until_stable(caplog):
    calls = []

    def run(N):
        calls.append(N)
        return N, [1.0 / N**3]

    with caplog.at_level(logging.INFO, logger="levspin.scenarios"):
        payload, rep = converge(run, 20, SimulationSettings(convergence_tol=1e-5), "demo")
    assert rep["satisfied"] and payload == rep["N_used"]
    assert calls == sorted(calls) and rep["shift"] < 1e-5
    assert len(rep["history"]) > 1 and "escalating" in caplog.text


def test_converge_reports_cap():
    payload, rep = converge(lambda N: (N, [float(N)]), 20, SimulationSettings(max_fock=50))
    assert not rep["satisfied"] and rep["N_used"] <= 50


def test_unknown_scenario():
    with pytest.raises(ConfigError):
        run_scenario("fig99")
    with pytest.raises(ConfigError):
        run_all(scenarios=["fig99"])


def test_parallel_matches_serial_and_replays(tmp_path):
    ids = ["fig3", "fig5"]
    serial = run_all(scenarios=ids, outdir=tmp_path / "a")
    par = run_all(settings=SimulationSettings(parallelism=2), scenarios=ids, outdir=tmp_path / "b")
    assert [r.id for r in serial] == ids == [r.id for r in par]
    for sid in ids:
        d = filecmp.dircmp(tmp_path / "a" / sid / "data", tmp_path / "b" / sid / "data")
        assert not d.diff_files and not d.left_only and not d.right_only
        for f in d.common_files:
            assert (tmp_path / "a" / sid / "data" / f).read_bytes() == (tmp_path / "b" / sid / "data" / f).read_bytes()

    record = json.loads((tmp_path / "a" / "fig3" / "params.json").read_text())
    again = replay(record)
    again.write(tmp_path / "c")
    for f in ("summary.json", "params.json"):
        assert (tmp_path / "a" / "fig3" / f).read_bytes() == (tmp_path / "c" / "fig3" / f).read_bytes()
    for f in (tmp_path / "a" / "fig3" / "data").iterdir():
        assert f.read_bytes() == (tmp_path / "c" / "fig3" / "data" / f.name).read_bytes()
