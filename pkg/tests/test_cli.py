import csv
import io
import json
import math

import pytest

from levspin.cli import main
from levspin.config import ENV_OUT, ENV_PARALLELISM, parse_config, required_keys


def _rows(text):
    return list(csv.reader(io.StringIO(text)))


def test_unknown_subcommand_and_bad_flag(capsys):
    assert main(["bogus"]) == 2
    assert main(["run", "fig3", "--parallelism", "two"]) == 2
    assert "invalid" in capsys.readouterr().err


def test_help_exits_zero(capsys):
    assert main(["--help"]) == 0
    assert "Hz" in capsys.readouterr().out


def test_run_exit_codes(tmp_path):
    assert main(["run", "fig3", "--preset", "sec5", "--out", str(tmp_path), "-q"]) == 0
    assert (tmp_path / "fig3" / "summary.json").exists()
    # the drive-coupling check in this scenario does not reach its target
    assert main(["run", "fig8", "--preset", "sec5", "--out", str(tmp_path), "-q"]) == 1
    assert json.loads((tmp_path / "fig8" / "summary.json").read_text())["passed"] is False


def test_output_blocked_by_file(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert main(["run", "fig3", "--preset", "sec5", "--out", str(blocker / "sub")]) == 2


def test_validate_config_writes_nothing(tmp_path, capsys):
    out = tmp_path / "never"
    assert main(["validate-config", "--preset", "sec5", "--out", str(out)]) == 0
    assert not out.exists()


def test_empty_config_lists_required_keys(tmp_path, capsys):
    cfg = tmp_path / "empty.toml"
    cfg.write_text("")
    assert main(["validate-config", "--config", str(cfg)]) == 2
    err = capsys.readouterr().err
    for key in required_keys():
        assert key in err


@pytest.mark.parametrize("text, needle", [
    ("[magnet]\nradius = 1e-6\n", "magnet.radius"),
    ("preset = 'sec5'\n[nv]\nd = 'far'\n", "nv.d must be a number in m"),
    ("preset = 'sec5'\n[simulation]\nn_step = 2.5\n", "simulation.n_step"),
    ("preset = 'sec5'\n[scenarios.fig4]\ngama = 1\n", "gama"),
    ("preset = 'sec5'\n[scenarios]\nselect = ['fig9']\n", "fig9"),
    ("preset = 'nope'\n", "unknown preset"),
    ("preset = 'sec5'\n[magnet\n", "malformed"),
])
def test_config_errors_name_the_key(tmp_path, capsys, text, needle):
    cfg = tmp_path / "c.toml"
    cfg.write_text(text)
    assert main(["validate-config", "--config", str(cfg)]) == 2
    assert needle in capsys.readouterr().err


def test_frequencies_are_hz_in_config():
    cfg = parse_config(text="preset = 'sec5'\n[drive]\nOmega_p = 1e6\n", env={})
    assert cfg.physical.Omega_p == pytest.approx(2 * math.pi * 1e6)


def test_precedence(tmp_path):
    text = "preset = 'sec5'\n[output]\ndir = 'from_file'\n[simulation]\nparallelism = 2\n"
    assert str(parse_config(text=text, env={}).outdir) == "from_file"
    env = {ENV_OUT: "from_env", ENV_PARALLELISM: "3"}
    cfg = parse_config(text=text, env=env)
    assert str(cfg.outdir) == "from_env" and cfg.settings.parallelism == 3
    cfg = parse_config(text=text, env=env, outdir="flag", parallelism=4)
    assert str(cfg.outdir) == "flag" and cfg.settings.parallelism == 4


def test_trap_summary_prints_csv(capsys):
    assert main(["trap-summary", "--preset", "sec5"]) == 0
    head, row = _rows(capsys.readouterr().out)
    assert head == ["k_ma[N/m]", "f_ma[Hz]", "z0[m]"]
    assert all(float(v) > 0 for v in row)


def test_coupling_scales_with_root_remanence(tmp_path, capsys):
    assert main(["coupling", "--preset", "sec5", "--r", "3"]) == 0
    head, base = _rows(capsys.readouterr().out)
    vals = dict(zip(head, map(float, base)))
    assert vals["lambda/2pi[Hz]"] == pytest.approx(2913, abs=1)
    assert vals["Lambda_eff/2pi[Hz]"] == pytest.approx(vals["Lambda/2pi[Hz]"] * math.exp(3) / 2)
    cfg = tmp_path / "br.toml"
    cfg.write_text("preset = 'sec5'\n[magnet]\nBr = 1.5\n")
    assert main(["coupling", "--config", str(cfg)]) == 0
    _, strong = _rows(capsys.readouterr().out)
    assert float(strong[0]) / float(base[0]) == pytest.approx(math.sqrt(2), rel=1e-9)


def test_sweep_writes_table(tmp_path):
    assert main(["sweep", "--preset", "sec5", "--param", "nv.d", "--start", "0.5e-6", "--stop", "1.5e-6",
                 "--num", "5", "--out", str(tmp_path), "-q"]) == 0
    rows = _rows((tmp_path / "sweep" / "sweep_nv_d.csv").read_text())
    assert rows[0][0] == "nv.d[m]" and len(rows) == 6
    lam = [float(r[4]) for r in rows[1:]]
    assert all(a > b for a, b in zip(lam, lam[1:]))
    assert main(["sweep", "--preset", "sec5", "--param", "nv.depth", "--start", "0", "--stop", "1"]) == 2
