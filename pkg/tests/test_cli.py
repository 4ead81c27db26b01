import json
import subprocess
import sys

import numpy as np
import pytest

from droplet_qed import cli, emission, qnm
from droplet_qed.errors import ParseError, ValidationError

SMALL = ["--a-min", "1", "--a-max", "2"]


@pytest.fixture(autouse=True)
def cache(tmp_path, monkeypatch):
    d = tmp_path / "cache"
    monkeypatch.setenv(cli.CACHE_ENV, str(d))
    return d


def test_empty_source_is_default_config():
    c = cli.parse_config("")
    assert c == cli.RunConfig()
    assert (c.n0, c.lambda0_nm, c.gamma_h_cm, c.dipole_dof) == (1.47, 560.0, 50.0, 2)
    assert c.xi is None and c.fsr is None and c.method is emission.Method.CLOSED_FORM


def test_parse_comments_and_values():
    c = cli.parse_config("# sweep\nn0 = 1.5  # glass\n\nxi = 1.2\nfsr=computed\nmethod = mode-sum\nm = 3\n")
    assert c.n0 == 1.5 and c.xi == 1.2 and c.fsr is None and c.dipole_dof == 3
    assert c.method is emission.Method.MODE_SUM


def test_parse_errors_name_line_and_field():
    with pytest.raises(ValidationError, match="n0"):
        cli.parse_config("n0 = 0.9")
    with pytest.raises(ParseError, match="line 2"):
        cli.parse_config("n0 = 1.5\njunk line\n")
    with pytest.raises(ParseError, match="line 1"):
        cli.parse_config("colour = red")
    with pytest.raises(ParseError, match="line 1"):
        cli.parse_config("steps = 2.5")
    with pytest.raises(ValidationError, match="a_min"):
        cli.parse_config("a_min = 5\na_max = 2")


def test_render_round_trip():
    c = cli.parse_config("n0 = 1.33\nxi = 1.1\nfsr = 0.71\nsteps = 7\nout = x.json\nformat = json\n")
    assert cli.parse_config(cli.render(c)) == c
    assert cli.parse_config(cli.render(cli.RunConfig())) == cli.RunConfig()


def test_flags_override_file(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("a_min = 2\na_max = 7.5\nsteps = 2\nxi = 1.0\n")
    out = tmp_path / "c.csv"
    assert cli.main(["decay-curve", "--config", str(cfg), "--xi", "real-cavity", "--fsr", "0.7",
                     "--out", str(out)]) == 0
    c = emission.DecayCurve.from_csv(out.read_text())
    assert np.allclose(c.rates, [1.748694526604357, 0.7290626589667017], rtol=1e-9)


def test_modes_summary_and_cache(tmp_path, cache, capsys):
    out1, out2 = tmp_path / "m1.csv", tmp_path / "m2.csv"
    assert cli.main(["modes", *SMALL, "--out", str(out1)]) == 0
    err = capsys.readouterr().err
    assert "solved" in err and "asymptotic width 1.128735" in err
    fsr = float(err.split("fsr at x = ")[1].split(": ")[1].split(";")[0])
    assert abs(fsr - 0.7) < 0.05
    assert cli.main(["modes", *SMALL, "--out", str(out2)]) == 0
    assert "cached" in capsys.readouterr().err
    assert out1.read_bytes() == out2.read_bytes()
    assert len(list(cache.iterdir())) == 1


def test_corrupt_cache_is_resolved(tmp_path, cache, capsys, caplog):
    out = tmp_path / "m.json"
    assert cli.main(["modes", *SMALL, "--out", str(out), "--format", "json"]) == 0
    entry = next(cache.iterdir())
    entry.write_text("{not json")
    assert cli.main(["modes", *SMALL, "--out", str(out), "--format", "json"]) == 0
    assert "unreadable" in caplog.text
    assert "solved" in capsys.readouterr().err
    qnm.table_from_json(entry.read_text())


def test_version_mismatch_misses_cache(tmp_path, cache, capsys, monkeypatch):
    assert cli.main(["modes", *SMALL, "--out", str(tmp_path / "a.csv")]) == 0
    monkeypatch.setattr(qnm, "SOLVER_VERSION", "test-bump")
    assert cli.main(["modes", *SMALL, "--out", str(tmp_path / "b.csv")]) == 0
    assert "solved" in capsys.readouterr().err.splitlines()[-1]
    assert len(list(cache.iterdir())) == 2


def test_decay_curve_anchor_values(tmp_path):
    out = tmp_path / "c.json"
    assert cli.main(["decay-curve", "--a-min", "2", "--a-max", "7.5", "--steps", "2",
                     "--fsr", "0.7", "--out", str(out), "--format", "json"]) == 0
    doc = json.loads(out.read_text())
    rates = [p["rate_vs_bulk"] for p in doc["points"]]
    assert np.allclose(rates, [1.748694526604357, 0.7290626589667017], rtol=1e-9)
    assert doc["params"]["method"] == "closed_form" and doc["params"]["fsr_x"] == 0.7


def test_fig1_preset(tmp_path, capsys):
    overlay = tmp_path / "data.txt"
    overlay.write_text("1 1\n")
    base = tmp_path / "fig"
    assert cli.main(["decay-curve", "--fig1", "--out", str(base), "--format", "json",
                     "--overlay", str(overlay)]) == 0
    curves = {}
    for tag, scale in (("100", 1.0), ("095", 0.95), ("090", 0.90)):
        doc = json.loads((tmp_path / f"fig_xi{tag}.json").read_text())
        assert len(doc["points"]) == 400
        assert doc["params"]["overlay"] == str(overlay.resolve())
        curves[scale] = np.array([p["rate_vs_bulk"] for p in doc["points"]])
    ref = curves[1.0]
    fsr = json.loads((tmp_path / "fig_xi100.json").read_text())["params"]["fsr_x"]
    first = emission.decay_rate_closed_form(emission.EmitterSpec(), emission.SphereSpec(1.47, 1.0),
                                            emission.real_cavity_factor(1.47), fsr)
    assert abs(ref[0] - first) < 1e-12
    assert np.allclose(curves[0.95], ref / 0.95, rtol=1e-12)
    assert np.allclose(curves[0.90], ref / 0.90, rtol=1e-12)


def test_fig1_curve_anchors(tmp_path):
    # closed form of the preset at a = 2 and at a = 50 against the quoted values
    e = emission.EmitterSpec()
    xi = emission.real_cavity_factor(1.47)
    fsr = qnm.local_fsr("TE", 1.47, e.size_parameter(10.5))
    at2 = emission.decay_rate_closed_form(e, emission.SphereSpec(1.47, 2.0), xi, fsr)
    at50 = emission.decay_rate_closed_form(e, emission.SphereSpec(1.47, 50.0), xi, fsr)
    assert abs(at2 / 1.751 - 1) < 0.01
    assert abs(at50 / 0.6877 - 1) < 0.01


def test_dos_command(tmp_path):
    out = tmp_path / "d.csv"
    assert cli.main(["dos", *SMALL, "--steps", "25", "--out", str(out)]) == 0
    x, y = emission.dos_from_csv(out.read_text())
    assert len(x) == 25 and np.all(y > 0)
    assert cli.main(["dos", *SMALL, "--steps", "25", "--bare", "--out", str(out)]) == 0


def test_extract_lfc_output(capsys):
    assert cli.main(["extract-lfc", "--g", "0.6877", "--n0", "1.47"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "xi = 1.483798" and lines[2].startswith("ratio = 0.9999")
    assert cli.main(["extract-lfc", "--g", "0.729"]) == 0
    out = capsys.readouterr().out
    assert "xi = 1.399737" in out and "ratio = 0.943304" in out


def test_error_exit_codes(tmp_path, capsys):
    assert cli.main(["extract-lfc", "--g", "0"]) == 1
    assert "extract" in capsys.readouterr().err
    assert cli.main(["decay-curve", "--n0", "0.9"]) == 1
    assert "config" in capsys.readouterr().err
    assert cli.main(["decay-curve", "--overlay", str(tmp_path / "missing")]) == 1
    assert "overlay" in capsys.readouterr().err
    bad = tmp_path / "bad.cfg"
    bad.write_text("n0 = 1.5\nwhat\n")
    assert cli.main(["modes", "--config", str(bad)]) == 1
    assert "line 2" in capsys.readouterr().err
    with pytest.raises(SystemExit) as exc:
        cli.main(["decay-curve", "--steps", "x"])
    assert exc.value.code == 2


def test_stdout_when_no_out(capsys):
    assert cli.main(["decay-curve", "--a-min", "2", "--a-max", "3", "--steps", "3", "--fsr", "0.7"]) == 0
    assert capsys.readouterr().out.splitlines()[0] == "radius_um,rate_vs_bulk"


def test_console_script_entry(tmp_path):
    r = subprocess.run([sys.executable, "-m", "droplet_qed.cli", "extract-lfc", "--g", "0.6877"],
                       capture_output=True, text=True)
    assert r.returncode == 0 and r.stdout.startswith("xi = ")
