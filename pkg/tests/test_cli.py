from __future__ import annotations

import json

import pytest

from homolattice import gf2
from homolattice.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr()


def test_build_text(capsys):
    code, out = run(capsys, "build", "steane")
    assert code == 0
    assert out.out.splitlines()[:2] == ["7 7", "1111000"]


def test_build_json_and_out_dir(capsys, tmp_path):
    code, out = run(capsys, "build", "422", "--format", "json")
    assert code == 0 and "1111" in out.out
    assert run(capsys, "build", "rm15-padded", "--out-dir", str(tmp_path))[0] == 0
    written = list(tmp_path.iterdir())
    assert written


def test_product_report(capsys):
    code, out = run(capsys, "product", "steane", "rm15-padded", "--cap", "2")
    report = json.loads(out.out)
    assert code == 0
    assert (report["n"], report["k"], report["sparsity"], report["sparsity_bound"]) == (147, 1, 15, 15)


def test_product_boundary_out(capsys, tmp_path):
    path = tmp_path / "d.txt"
    assert run(capsys, "product", "steane", "trivial1", "--boundary-out", str(path))[0] == 0
    assert gf2.from_text(path.read_text()).shape == (7, 7)


def test_verify_band_theorem(capsys):
    code, out = run(capsys, "verify", "prod422", "--check", "band-theorem", "--axis", "1", "--budget", "1")
    assert code == 0 and '"passed": true' in out.out


def test_verify_failure_exit_code(capsys):
    code, _ = run(capsys, "verify", "prod422", "--check", "band-theorem", "--axis", "1",
                  "--budget", "2", "--mode", "sampled", "--samples", "20000")
    assert code == 1


def test_cap_exit_code(capsys):
    code, out = run(capsys, "verify", "prod147", "--check", "band-theorem", "--axis", "1", "--budget", "1")
    assert code == 3 and "cap" in out.err


def test_parse_error_exit_code(capsys, tmp_path):
    bad = tmp_path / "bad.txt"
    bad.write_text("3 4\n1100\n01x1\n0011\n")
    code, out = run(capsys, "build", str(bad))
    assert code == 2 and "line 3" in out.err


def test_unknown_command_exit_code():
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2


def test_distance(capsys):
    code, out = run(capsys, "distance", "steane")
    assert code == 0 and json.loads(out.out)["dx"] == 3


def test_profile_csv(capsys):
    code, out = run(capsys, "profile", "prod147", "--layer", "H", "--csv")
    lines = out.out.splitlines()
    assert code == 0 and lines[0] == "step,phase,sparsity"
    assert lines[1].endswith(",15") and lines[-1].endswith(",15")


def _protocol(capsys, tmp_path, name, *extra):
    path = tmp_path / name
    assert run(capsys, "protocol", "steane,steane", "--layer", "S", "--p", "0.01",
               "--trials", "300", "--out", str(path), *extra)[0] == 0
    return path.read_bytes()


def test_monte_carlo_byte_identical(capsys, tmp_path):
    a = _protocol(capsys, tmp_path, "a.json", "--seed", "5")
    b = _protocol(capsys, tmp_path, "b.json", "--seed", "5")
    c = _protocol(capsys, tmp_path, "c.json", "--seed", "6")
    assert a == b and a != c


def test_env_seed(capsys, tmp_path, monkeypatch):
    flagged = _protocol(capsys, tmp_path, "a.json", "--seed", "9")
    monkeypatch.setenv("HOMOLATTICE_SEED", "9")
    assert _protocol(capsys, tmp_path, "b.json") == flagged
    monkeypatch.setenv("HOMOLATTICE_SEED", "nine")
    code, out = run(capsys, "protocol", "steane,steane", "--trials", "10")
    assert code == 2


def test_config_defaults_and_override(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"trials": 40, "seed": 1, "p": 0.01}))
    code, out = run(capsys, "--config", str(cfg), "protocol", "steane,steane")
    assert code == 0 and json.loads(out.out)["trials"] == 40
    code, out = run(capsys, "--config", str(cfg), "protocol", "steane,steane", "--trials", "20")
    assert json.loads(out.out)["trials"] == 20


def test_sweep_command(capsys):
    code, out = run(capsys, "protocol", "steane,steane", "--layer", "S", "--sweep", "single-fault",
                    "--check-mapping")
    result = json.loads(out.out)
    assert code == 0 and result["logical_failures"] == 0 and result["mapping_mismatches"] == 0
