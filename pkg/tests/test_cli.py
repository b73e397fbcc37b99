import json

import numpy as np
import pytest

from maslov_lab import cli

PI_HALF = float(np.pi / 2)


def write_config(tmp_path, text, name="config.toml"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


CONSTANT_SYSTEM = f"""
[system]
kind = "constant"
n = 1
period = 2.0
matrix = [{PI_HALF}, 0.0, 0.0, {PI_HALF}]
"""


def test_indices_command(tmp_path, capsys):
    cfg = write_config(tmp_path, 'command = "indices"\ntheta_points = 24\n' + CONSTANT_SYSTEM)
    out = tmp_path / "report.json"
    code = cli.main(["--config", cfg, "--out", str(out), "--quiet"])
    assert code == 0
    rep = json.loads(out.read_text())
    assert rep["status"] == "ok"
    L0 = rep["results"]["indices"]["L0"]
    assert (L0["index"], L0["nullity"], L0["winding"], L0["crossing"]) == (0, 0, 0, 0)
    assert rep["results"]["mean_index"]["closed_form"] == pytest.approx(0.5)
    assert rep["schema"] == cli.SCHEMA


def test_bott_check_command(tmp_path):
    cfg = write_config(tmp_path, 'command = "bott-check"\nk_max = 4\n' + CONSTANT_SYSTEM)
    with open(cfg, "rb") as fh:
        config = cli.tomli.load(fh)
    report, code = cli.run(config)
    assert code == 0
    assert report["results"]["exact"]
    assert all(p["match"] for p in report["results"]["precise_formula"])


def test_iterate_csv_output(tmp_path):
    cfg = write_config(tmp_path, 'command = "iterate"\nk_max = 3\n' + CONSTANT_SYSTEM)
    out = tmp_path / "ledger.csv"
    code = cli.main(["--config", cfg, "--out", str(out), "--format", "csv", "--quiet"])
    assert code == 0
    lines = out.read_text().strip().splitlines()
    assert lines[0].startswith("k,i_L0_direct")
    assert len(lines) == 4


def test_ellipsoid_command(tmp_path):
    cfg = write_config(
        tmp_path,
        'command = "ellipsoid"\nm_max_iterates = 2\n\n[system]\nkind = "ellipsoid"\nradii = [1.0, 1.189207115002721]\n',
    )
    out = tmp_path / "table.json"
    code = cli.main(["--config", cfg, "--out", str(out), "--quiet"])
    assert code == 0
    rep = json.loads(out.read_text())
    rows = rep["results"]["table"]
    first = [r for r in rows if r["orbit"] == 1 and r["m"] == 1][0]
    assert (first["i_L0"], first["nu_L0"]) == (0, 1)
    second = [r for r in rows if r["orbit"] == 2 and r["m"] == 1][0]
    assert (second["i_L0"], second["nu_L0"]) == (1, 1)
    assert rep["results"]["multiplicity"]["count_ge_half_bound"]


def test_jump_command(tmp_path):
    cfg = write_config(
        tmp_path,
        'command = "jump"\nR_max = 3\nverify = "all"\n\n[[systems]]\nkind = "constant"\nn = 1\nmatrix = '
        f"[{PI_HALF}, 0.0, 0.0, {PI_HALF}]\n",
    )
    out = tmp_path / "jump.json"
    assert cli.main(["--config", cfg, "--out", str(out), "--quiet"]) == 0
    rep = json.loads(out.read_text())
    assert rep["results"]["count"] == 3
    assert [c["R"] for c in rep["results"]["certificates"]] == [1, 2, 3]


def test_selftest_command_and_seed_flag(tmp_path):
    cfg = write_config(tmp_path, 'command = "selftest"\ncount = 2\nk_max = 2\n')
    out = tmp_path / "self.json"
    code = cli.main(["--config", cfg, "--out", str(out), "--seed", "42", "--quiet"])
    assert code == 0
    rep = json.loads(out.read_text())
    assert rep["results"]["seed"] == 42
    assert rep["results"]["violations"] == 0


def test_config_error_exit_code(tmp_path):
    cfg = write_config(tmp_path, 'command = "nonsense"\n')
    assert cli.main(["--config", cfg, "--quiet"]) == 1
    missing = write_config(tmp_path, 'command = "indices"\n', name="missing_system.toml")
    assert cli.main(["--config", missing, "--quiet"]) == 1
    assert cli.main(["--config", str(tmp_path / "nope.toml"), "--quiet"]) == 1


def test_identity_violation_exit_code(tmp_path, monkeypatch):
    from maslov_lab.iteration import IterationLedger

    fake = IterationLedger(
        (1,),
        (
            {
                "k": 1,
                "direct_L0": (0, 0),
                "predicted_L0": (1, 0),
                "direct_L1": (0, 0),
                "predicted_L1": (0, 0),
            },
        ),
    )
    monkeypatch.setattr(cli, "iteration_ledger", lambda *a, **k: fake)
    cfg = write_config(tmp_path, 'command = "iterate"\nk_max = 1\n' + CONSTANT_SYSTEM)
    assert cli.main(["--config", cfg, "--quiet"]) == 2


def test_unstabilized_exit_code(tmp_path):
    # a hard truncation cap far below the coefficient scale cannot stabilize
    cfg = write_config(
        tmp_path,
        'command = "indices"\ntheta_points = 4\n\n[scheme]\nm_max = 2\n' + CONSTANT_SYSTEM,
    )
    assert cli.main(["--config", cfg, "--quiet"]) == 3


def test_report_determinism(tmp_path):
    cfg = write_config(tmp_path, 'command = "iterate"\nk_max = 2\n' + CONSTANT_SYSTEM)
    out1, out2 = tmp_path / "a.json", tmp_path / "b.json"
    cli.main(["--config", cfg, "--out", str(out1), "--quiet"])
    cli.main(["--config", cfg, "--out", str(out2), "--quiet"])
    rep1 = json.loads(out1.read_text())
    rep2 = json.loads(out2.read_text())
    rep1.pop("timing_s")
    rep2.pop("timing_s")
    assert json.dumps(rep1, sort_keys=True) == json.dumps(rep2, sort_keys=True)


def test_mean_index_precondition_maps_to_config_error(tmp_path):
    cfg = write_config(
        tmp_path,
        'command = "jump"\nR_max = 2\n\n[[systems]]\nkind = "constant"\nn = 1\nmatrix = [0.0, 0.0, 0.0, 0.0]\n',
    )
    assert cli.main(["--config", cfg, "--quiet"]) == 1
