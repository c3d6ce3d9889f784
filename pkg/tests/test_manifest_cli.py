import os
import subprocess
import sys

import pytest

from vtres import (
    ExperimentManifest,
    emit_manifest,
    parse_manifest,
    run,
    spec_cycle,
    spec_cyclic_chords,
    spec_lattice,
    spec_z_times_torus,
)
from vtres.errors import BadArguments, MissingParam
from vtres.manifest import Table, emit

SRC = os.path.join(os.path.dirname(__file__), os.pardir, "src")


def _cli(*args, cwd=None, env_extra=None):
    env = dict(os.environ, PYTHONPATH=SRC)
    if env_extra:
        env.update(env_extra)
    return subprocess.run([sys.executable, "-m", "vtres", *args],
                          capture_output=True, text=True, cwd=cwd, env=env)


def _read(path):
    with open(path, "rb") as fh:
        return fh.read()


def test_manifest_round_trip():
    man = ExperimentManifest("escape", spec_cycle(20),
                             {"r": [1, 2, 5], "trials": 1000, "seed": 7},
                             "artifacts", "csv")
    assert parse_manifest(emit_manifest(man)) == man
    assert emit_manifest(parse_manifest(emit_manifest(man))) == emit_manifest(man)


def test_every_schema_param_serializes():
    from vtres.manifest import _PARAM_ORDER, _PARAM_SCHEMA
    for experiment, schema in _PARAM_SCHEMA.items():
        missing = set(schema) - set(_PARAM_ORDER)
        assert not missing, (experiment, missing)


def test_round_trip_with_every_param():
    man = ExperimentManifest(
        "resistance", spec_lattice(2),
        {"p": [2.0, 3.5], "r": [2, 4], "transitive": 0, "dump_potential": 1},
        "arts", "structured-text")
    assert parse_manifest(emit_manifest(man)) == man


def test_manifest_rejects_unknown_params():
    with pytest.raises(BadArguments):
        ExperimentManifest("escape", spec_cycle(8),
                           {"r": [1], "trials": 10, "seed": 0, "bogus": 1})
    with pytest.raises(MissingParam):
        ExperimentManifest("escape", spec_cycle(8), {"r": [1], "seed": 0})
    with pytest.raises(BadArguments):
        ExperimentManifest("sandwich", None,
                           {"p": [2.0], "r_min": 1, "r_max": 2})


def test_manifest_rejects_unknown_keys():
    man = ExperimentManifest("growth", spec_cycle(8, ), {}, "o", "csv")
    text = emit_manifest(man) + "mystery.key = 1\n"
    with pytest.raises(BadArguments):
        parse_manifest(text)


def test_run_escape_row_shape(tmp_path):
    spec = spec_cycle(20)
    man = ExperimentManifest("escape", spec,
                             {"r": [1, 5], "trials": 2000, "seed": 7},
                             "e", "csv")
    result = run(man, base_dir=str(tmp_path))
    assert result.exit_code == 0
    csv = _read(result.files[0]).decode().splitlines()
    assert csv[0].startswith("# manifest_hash = ")
    assert csv[1] == "# tool_version = vtres-0.1.0"
    assert csv[2] == "# rng = philox4x64"
    assert csv[3] == "spec_hash,r,trials,p_hat,stderr,seed"
    assert len(csv) == 6
    r5 = csv[5].split(",")
    assert float(r5[3]) == pytest.approx(0.2, abs=0.05)


def test_runs_are_byte_identical(tmp_path):
    man = ExperimentManifest("escape", spec_cycle(12),
                             {"r": [1, 2, 3], "trials": 3000, "seed": 11},
                             "e", "csv")
    r1 = run(man, base_dir=str(tmp_path / "a"))
    r2 = run(man, base_dir=str(tmp_path / "b"))
    for f1, f2 in zip(r1.files, r2.files):
        assert _read(f1) == _read(f2)


def test_run_growth(tmp_path):
    spec = spec_lattice(3)
    spec = type(spec)(spec.family, spec.factors, spec.generators, radius=4)
    man = ExperimentManifest("growth", spec, {}, "g", "csv")
    result = run(man, base_dir=str(tmp_path))
    rows = [l for l in _read(result.files[0]).decode().splitlines()
            if l and not l.startswith("#") and not l.startswith("r,")]
    betas = [int(r.split(",")[1]) for r in rows]
    assert betas == [(2 * r + 1) ** 3 for r in range(5)]


def test_run_isoperimetry_status(tmp_path):
    man = ExperimentManifest("isoperimetry", spec_cyclic_chords(10, 4),
                             {"max_n": 14}, "iso", "csv")
    result = run(man, base_dir=str(tmp_path))
    assert result.exit_code == 0
    assert any(r.quantity == "cyclic_edge_isoperimetry" for r in result.reports)
    summary = _read(result.files[-1]).decode()
    assert "status = PASS" in summary


def test_run_sandwich_metrics(tmp_path):
    man = ExperimentManifest("sandwich", spec_lattice(2),
                             {"p": [2.0], "r_min": 2, "r_max": 6}, "s", "csv")
    result = run(man, base_dir=str(tmp_path))
    assert "p2.log_regime_spread" in result.metrics
    assert result.metrics["p2.max_computed_over_upper"] <= 1.0


def test_run_var_converse(tmp_path):
    man = ExperimentManifest("var_converse", spec_z_times_torus(3, 3),
                             {"n": 4, "r": [8, 12]}, "v", "csv")
    result = run(man, base_dir=str(tmp_path))
    rows = [l.split(",") for l in _read(result.files[0]).decode().splitlines()[3:]]
    assert all(float(row[5]) >= 1.0 for row in rows)  # computed >= formula RHS


def test_run_table1_reports(tmp_path):
    man = ExperimentManifest("table1", None, {"n2": [8], "n3": [6]}, "t", "csv")
    result = run(man, base_dir=str(tmp_path))
    assert result.exit_code == 0
    assert all(r.status == "PASS" for r in result.reports)


def test_run_resistance_dump_potential(tmp_path):
    man = ExperimentManifest("resistance", spec_lattice(2),
                             {"p": [2.5], "r": [2], "dump_potential": 1},
                             "r", "csv")
    result = run(man, base_dir=str(tmp_path))
    (pot_file,) = [f for f in result.files if "potential" in f]
    body = _read(pot_file).decode()
    assert "resistance = " in body and "values.v0 = 1.0" in body
    from vtres.textspec import parse_document
    doc = parse_document(body)
    assert doc["capacity"] * doc["resistance"] == pytest.approx(1.0)


def test_emit_plotdata(tmp_path):
    table = Table("demo", ["x", "y"], [(1, 2.0), (2, 4.0)])
    (path,) = emit([table], "plotdata", str(tmp_path), "cafe")
    text = _read(path).decode()
    assert "# series: y" in text
    assert "1 2.0" in text


def test_cli_escape_and_status(tmp_path):
    out = tmp_path / "o"
    proc = _cli("escape", "--family", "torus_product", "--factors", "20",
                "--generators", "box", "--r", "1:4", "--trials", "2000",
                "--seed", "5", "--out", str(out))
    assert proc.returncode == 0, proc.stderr
    assert "status = PASS" in proc.stdout
    assert (out / "escape.csv").exists()


def test_cli_emit_manifest_round_trip(tmp_path):
    proc = _cli("escape", "--family", "torus_product", "--factors", "12",
                "--generators", "box", "--r", "1,2", "--trials", "100",
                "--seed", "1", "--emit-manifest")
    assert proc.returncode == 0, proc.stderr
    man = parse_manifest(proc.stdout)
    assert man.experiment == "escape"
    man_file = tmp_path / "m.txt"
    man_file.write_text(proc.stdout)
    proc2 = _cli("run", str(man_file), cwd=str(tmp_path))
    assert proc2.returncode == 0, proc2.stderr
    assert (tmp_path / "out" / "escape.csv").exists()


def test_cli_error_record():
    proc = _cli("escape", "--family", "torus_product", "--factors", "1",
                "--generators", "box", "--r", "1", "--trials", "10")
    assert proc.returncode == 2
    assert "error.type = BadArguments" in proc.stderr
    assert "error.message" in proc.stderr


def test_cli_env_override(tmp_path):
    out = tmp_path / "env_out"
    proc = _cli("growth", "--family", "torus_product", "--factors", "8",
                "--generators", "box", "--radius", "3",
                env_extra={"VTRES_OUT": str(out), "VTRES_FORMAT": "structured-text"})
    assert proc.returncode == 0, proc.stderr
    assert (out / "growth.txt").exists()


def test_cli_verify_subcommand(tmp_path):
    out = tmp_path / "v"
    proc = _cli("verify", "--family", "explicit", "--factors", "inf,inf",
                "--generators", "box", "--p", "2", "--r-max", "5",
                "--out", str(out))
    assert proc.returncode == 0, proc.stderr
    assert (out / "sandwich.csv").exists()


def test_cli_repro_var_converse(tmp_path):
    out = tmp_path / "vc"
    proc = _cli("repro", "var-converse", "--family", "z_times_torus",
                "--factors", "inf,3,3", "--generators", "box",
                "--n", "4", "--r", "8,12", "--out", str(out))
    assert proc.returncode == 0, proc.stderr
    assert (out / "var_converse.csv").exists()
