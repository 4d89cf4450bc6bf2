import json
import math
import subprocess
import sys

import pytest

from wavecrest import cli, experiments
from wavecrest.errors import DomainError

FAST = {
    "semicircle": ["--m", "32", "--kappa", "10"],
    "clt": ["--m", "64", "--kappa", "15", "--samples", "2000", "--ks_max", "0.2"],
    "scaling2": ["--n", "2", "--rT", "20,40,80", "--mc_rT", "20", "--samples", "20000"],
    "scaling3": ["--rT", "5,10", "--samples", "200000"],
    "tail": ["--m", "64", "--kappa", "15", "--samples", "20000", "--y", "1,2"],
    "gegencheck": ["--samples", "20"],
    "kernelcheck": ["--rT", "10", "--samples", "20000", "--m", "4"],
    "wavescale": ["--m", "32,64"],
}


def run(tmp_path, *args):
    return cli.main([*args, "--out", str(tmp_path)])


def test_every_experiment_has_fast_case():
    assert set(FAST) == set(experiments.EXPERIMENTS)


@pytest.mark.parametrize("name", sorted(FAST))
def test_experiment_runs_and_writes(tmp_path, name, capsys):
    status = run(tmp_path, name, *FAST[name])
    out = capsys.readouterr().out
    assert status in (0, 1)
    assert ("FAIL" in out) == (status == 1)
    text = (tmp_path / f"{name}.csv").read_bytes()
    assert b"\r" not in text
    lines = text.decode().splitlines()
    header = lines[0].split(",")
    assert header[-2:] == ["seed", "version"]
    assert all(line.endswith(f",0,{experiments.VERSION}") for line in lines[1:])
    summary = json.loads((tmp_path / f"{name}.json").read_text())
    assert summary["experiment"] == name and summary["seed"] == 0
    assert summary["passed"] == (status == 0)


def test_semicircle_columns_and_pass(tmp_path):
    assert run(tmp_path, "semicircle", "--m", "128", "--kappa", "51.857") == 0
    lines = (tmp_path / "semicircle.csv").read_text().splitlines()
    assert lines[0] == "k,lambda_exact,lambda_bessel,semicircle,seed,version"
    assert len(lines) == 130
    # 17 significant digits
    assert len(lines[1].split(",")[1].replace(".", "").lstrip("0").split("e")[0]) >= 15


def test_wave_scale_clt_fails_by_design(tmp_path, capsys):
    status = run(tmp_path, "clt", "--kappa", "2", "--m", "128", "--samples", "10000")
    assert status == 1
    assert "FAIL gaussian fit" in capsys.readouterr().out


def test_byte_identical_outputs(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for d, threads in ((a, "1"), (b, "4")):
        assert run(d, "tail", *FAST["tail"], "--seed", "17", "--threads", threads) in (0, 1)
    assert (a / "tail.csv").read_bytes() == (b / "tail.csv").read_bytes()
    assert (a / "tail.json").read_bytes() == (b / "tail.json").read_bytes()


def test_seed_changes_output(tmp_path):
    run(tmp_path / "a", "tail", *FAST["tail"], "--seed", "1")
    run(tmp_path / "b", "tail", *FAST["tail"], "--seed", "2")
    assert (tmp_path / "a" / "tail.csv").read_bytes() != (tmp_path / "b" / "tail.csv").read_bytes()


def test_config_file(tmp_path):
    cfg = tmp_path / "exp.ini"
    cfg.write_text("[semicircle]\nm = 128\nkappa = 51.857\n\n[wavescale]\nm = 32\nseed = 3\n")
    assert cli.main(["run", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 0
    assert (tmp_path / "o" / "semicircle.csv").exists()
    assert (tmp_path / "o" / "wavescale.csv").read_text().splitlines()[1].endswith(",3," + experiments.VERSION)
    assert cli.main(["run", "--config", str(cfg), "--experiment", "wavescale",
                     "--out", str(tmp_path / "p")]) == 0
    assert not (tmp_path / "p" / "semicircle.csv").exists()


@pytest.mark.parametrize("body", ["[semicircle]\nbogus = 1\n", "[nothere]\nm = 1\n", "not an ini",
                                  "[semicircle]\nm = abc\n", ""])
def test_config_errors(tmp_path, body):
    cfg = tmp_path / "bad.ini"
    cfg.write_text(body)
    assert cli.main(["run", "--config", str(cfg), "--out", str(tmp_path)]) == 2


def test_missing_config_exit_2(tmp_path, capsys):
    assert cli.main(["run", "--config", str(tmp_path / "missing.toml")]) == 2
    assert "not found" in capsys.readouterr().err


def test_argument_errors_exit_2(tmp_path):
    assert cli.main(["nosuch"]) == 2
    assert cli.main(["semicircle", "--m", "x", "--out", str(tmp_path)]) == 2
    assert cli.main(["run", "--out", str(tmp_path)]) == 2
    assert cli.main(["run", "--experiment", "semicircle", "--m", "4"]) == 2


def test_underbudget_mc_exit_2(tmp_path, capsys):
    assert run(tmp_path, "scaling3", "--rT", "20", "--samples", "20000") == 2
    assert "parameter error" in capsys.readouterr().err


def test_help_exit_0(capsys):
    assert cli.main(["--help"]) == 0


def test_out_precedence(tmp_path, monkeypatch):
    monkeypatch.setenv("WAVECREST_OUT", str(tmp_path / "env"))
    assert cli.output_dir(None) == tmp_path / "env"
    assert cli.output_dir(str(tmp_path / "flag")) == tmp_path / "flag"
    monkeypatch.delenv("WAVECREST_OUT")
    assert str(cli.output_dir(None)) == cli.DEFAULT_OUT
    monkeypatch.setenv("WAVECREST_OUT", str(tmp_path / "env"))
    assert cli.main(["wavescale", "--m", "32"]) == 0
    assert (tmp_path / "env" / "wavescale.csv").exists()


def test_out_path_override(tmp_path):
    target = tmp_path / "deep" / "x.csv"
    assert run(tmp_path, "wavescale", "--m", "32", "--out_path", str(target)) == 0
    assert target.exists() and target.with_suffix(".json").exists()


def test_resolve_and_schema():
    p = experiments.resolve("clt", {"t": "0.5, 1", "seed": "9"})
    assert p["t"] == (0.5, 1.0) and p["seed"] == 9 and p["threads"] is None
    assert math.isnan(p["r"])
    with pytest.raises(KeyError):
        experiments.resolve("clt", {"bogus": 1})
    with pytest.raises(DomainError):
        experiments.schema("nosuch")


def test_clt_drops_t_outside_disk(tmp_path):
    p = experiments.resolve("clt", {"m": "64", "kappa": "2", "samples": "2000", "t": "0.1,50"})
    out = experiments.run("clt", p)
    assert out.summary["dropped_t"] == [50.0]
    assert [r[0] for r in out.rows] == [0.1]


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "wavecrest", "wavescale", "--m", "32", "--out", str(tmp_path)],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "PASS wave scale m=32" in proc.stdout
