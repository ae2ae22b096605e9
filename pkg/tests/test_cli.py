import csv
import json
import subprocess
import sys

import pytest

from cayperc.cli import COMMANDS, EXIT_ASSERT, EXIT_CONFIG, EXIT_OK, EXIT_RESOURCE, load_config, main

Z2 = """
seed = 11
[group]
family = "FreeAbelian"
d = 2
[window]
radius = 4
[pc]
sizes = [6, 10]
grid = {start = 0.4, stop = 0.8, step = 0.02}
samples = 100
[russo]
radius = 2
samples = 2000
[percolate]
p = [0.4, 0.8]
samples = 100
[comparison]
radius = 3
samples = 100
[gff-sample]
samples = 5
[isop-check]
s_max = 4
[profile]
s_max = 4
[quotient]
target = {family = "FreeAbelian", d = 1}
images = [[1], [1]]
source_sizes = [6, 10]
target_sizes = [6, 10]
source_grid = [0.5, 0.6, 0.7]
target_grid = [0.5, 0.6]
samples = 50
"""


@pytest.fixture
def cfg(tmp_path):
    p = tmp_path / "z2.toml"
    p.write_text(Z2)
    return p


def run(cfg, out, *args):
    return main([*args, "--config", str(cfg), "--out", str(out), "--workers", "1"])


def test_overrides(tmp_path, cfg):
    c = load_config(str(cfg), ["window.radius=7", "pc.samples=3", "group.family=\"FreeGroup\"", "new.key=[1, 2]"])
    assert c["window"]["radius"] == 7 and c["pc"]["samples"] == 3
    assert c["group"]["family"] == "FreeGroup" and c["new"]["key"] == [1, 2]


@pytest.mark.parametrize("command", COMMANDS)
def test_every_command_runs(tmp_path, cfg, command, capsys):
    code = run(cfg, tmp_path / "out", command)
    out = capsys.readouterr().out
    assert code == EXIT_OK, out
    report = json.loads((tmp_path / "out" / command / f"{command}.json").read_text())
    assert report["schema_version"] == "1.0" and "timestamp" in report
    assert report["seed"] == 11
    assert any(line.startswith(("PASS", "SKIP")) for line in out.splitlines())
    assert list((tmp_path / "out" / command).glob("*.csv"))


@pytest.mark.parametrize("command", COMMANDS)
def test_every_command_plans(tmp_path, cfg, command, capsys):
    code = run(cfg, tmp_path / "out", command, "--plan")
    plan = json.loads(capsys.readouterr().out)
    assert code == EXIT_OK and plan["command"] == command
    assert not (tmp_path / "out").exists()


def test_missing_seed_is_config_error(tmp_path, capsys):
    p = tmp_path / "noseed.toml"
    p.write_text(Z2.replace("seed = 11", ""))
    assert run(p, tmp_path / "out", "pc") == EXIT_CONFIG
    assert "seed" in capsys.readouterr().err


def test_config_errors(tmp_path, cfg):
    bad = tmp_path / "bad.toml"
    bad.write_text("seed = [")
    assert run(bad, tmp_path, "ball") == EXIT_CONFIG
    assert run(tmp_path / "missing.toml", tmp_path, "ball") == EXIT_CONFIG
    assert main(["ball", "--config", str(cfg), "--set", "window.radius=-1", "--out", str(tmp_path)]) == EXIT_CONFIG
    assert main(["ball", "--config", str(cfg), "--set", "group.family=\"Nope\"", "--out", str(tmp_path)]) == EXIT_CONFIG
    with pytest.raises(SystemExit) as exc:
        main(["no-such-command", "--config", str(cfg)])
    assert exc.value.code == EXIT_CONFIG


def test_assertion_failure_exit(tmp_path, cfg, capsys):
    code = main(["pc", "--config", str(cfg), "--out", str(tmp_path), "--set", "pc.expect=[0.9, 0.95]"])
    assert code == EXIT_ASSERT
    assert "FAIL pc" in capsys.readouterr().out


def test_resource_exit(tmp_path, cfg):
    code = main(["ball", "--config", str(cfg), "--out", str(tmp_path), "--set", "window.radius=30",
                 "--set", "max_vertices=100"])
    assert code == EXIT_RESOURCE


def test_csv_outputs_are_byte_identical(tmp_path, cfg):
    for command in ("pc", "russo", "percolate", "gff-sample", "comparison"):
        a, b = tmp_path / "a", tmp_path / "b"
        assert run(cfg, a, command) == EXIT_OK
        assert run(cfg, b, command) == EXIT_OK
        files = sorted(p.name for p in (a / command).iterdir() if p.suffix in (".csv", ".bin"))
        assert files
        for name in files:
            assert (a / command / name).read_bytes() == (b / command / name).read_bytes(), name
        ja = json.loads((a / command / f"{command}.json").read_text())
        jb = json.loads((b / command / f"{command}.json").read_text())
        ja.pop("timestamp"), jb.pop("timestamp")
        assert ja == jb


def test_seed_changes_outputs(tmp_path, cfg):
    assert run(cfg, tmp_path / "a", "percolate") == EXIT_OK
    assert main(["percolate", "--config", str(cfg), "--out", str(tmp_path / "b"), "--seed", "12"]) == EXIT_OK
    assert (tmp_path / "a/percolate/percolate.csv").read_bytes() != (tmp_path / "b/percolate/percolate.csv").read_bytes()


def test_schedules_lambda_one(tmp_path, cfg):
    p = tmp_path / "f2.toml"
    p.write_text('seed = 1\n[group]\nfamily = "FreeGroup"\nk = 2\n')
    assert run(p, tmp_path / "out", "schedules") == EXIT_OK
    with open(tmp_path / "out/schedules/schedules.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert float(rows[0]["lambda_n"]) == pytest.approx(-2.644934, abs=1e-6)
    assert {"n", "lambda_n", "g_n_diag", "term", "partial_t"} <= set(rows[0])


def test_verify_blocks_radius_12(tmp_path, cfg):
    code = main(["verify-blocks", "--config", str(cfg), "--out", str(tmp_path), "--set", "window.radius=12"])
    assert code == EXIT_OK
    rep = json.loads((tmp_path / "verify-blocks/verify-blocks.json").read_text())
    assert [b["scale"] for b in rep["blocks"]] == [1, 2, 3]
    for b in rep["blocks"]:
        assert b["min_eig"] >= -1e-9 * b["norm"]


def test_module_entry_point(tmp_path, cfg):
    res = subprocess.run([sys.executable, "-m", "cayperc", "run", "ball", "--config", str(cfg), "--out",
                          str(tmp_path)], capture_output=True, text=True)
    assert res.returncode == 0, res.stderr
    assert "PASS ball" in res.stdout
