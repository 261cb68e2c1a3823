import json

import numpy as np
import pytest

from uvboot.cli import main, read_sample_csv


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


@pytest.fixture
def three_csv(tmp_path):
    path = tmp_path / "three.csv"
    path.write_text("1\n2\n3\n")
    return str(path)


def test_ustat_example(capsys, three_csv):
    code, out, _ = run_cli(capsys, "ustat", "--kernel", "product", "--in", three_csv)
    assert code == 0
    doc = json.loads(out)
    assert doc["u"] == pytest.approx(3.6666666667)
    assert doc["v"] == 4.0
    assert doc["n"] == 3 and doc["dim"] == 1
    jsonschema = pytest.importorskip("jsonschema")
    from uvboot.schemas import USTAT_SCHEMA

    jsonschema.validate(doc, USTAT_SCHEMA)


def test_ustat_unknown_kernel(capsys, three_csv):
    code, _, err = run_cli(capsys, "ustat", "--kernel", "nope", "--in", three_csv)
    assert code == 1
    assert "unknown kernel" in err


def test_missing_file(capsys):
    code, _, err = run_cli(capsys, "ustat", "--kernel", "product", "--in", "/does/not/exist.csv")
    assert code == 1
    assert "cannot read" in err


def test_malformed_csv_messages(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("x\n1\n2,oops\n")
    code, _, err = run_cli(capsys, "ustat", "--kernel", "product", "--in", str(bad))
    assert code == 1
    assert "row 3" in err and "column 2" in err

    ragged = tmp_path / "ragged.csv"
    ragged.write_text("1,2\n3\n")
    code, _, err = run_cli(capsys, "ustat", "--kernel", "kendall", "--in", str(ragged))
    assert code == 1
    assert "row 2" in err and "columns" in err


def test_header_row_is_skipped(tmp_path):
    path = tmp_path / "with_header.csv"
    path.write_text("value\n1.5\n2.5\n")
    sample = read_sample_csv(str(path))
    np.testing.assert_array_equal(sample.points[:, 0], [1.5, 2.5])


def test_bootstrap_zero_replicates_is_usage_error(capsys, three_csv):
    code, _, err = run_cli(
        capsys, "bootstrap", "--kernel", "product", "--in", three_csv,
        "--m", "3", "--replicates", "0", "--seed", "1",
    )
    assert code == 1
    assert "replicates" in err


def test_datagen_round_trip_reproducible(tmp_path, capsys):
    out1 = tmp_path / "a.csv"
    out2 = tmp_path / "b.csv"
    for out in (out1, out2):
        code, stdout, _ = run_cli(
            capsys, "datagen", "--dist", "normal(1,1)", "--n", "50", "--seed", "7",
            "--out", str(out),
        )
        assert code == 0
        doc = json.loads(stdout)
        assert doc["n"] == 50
        jsonschema = pytest.importorskip("jsonschema")
        from uvboot.schemas import DATAGEN_SCHEMA

        jsonschema.validate(doc, DATAGEN_SCHEMA)
    assert out1.read_bytes() == out2.read_bytes()


def test_datagen_ar1(tmp_path, capsys):
    out = tmp_path / "ar.csv"
    code, stdout, _ = run_cli(
        capsys, "datagen", "--dist", "ar1(0.5,1)", "--n", "100", "--seed", "3", "--out", str(out)
    )
    assert code == 0
    assert read_sample_csv(str(out)).n == 100


def test_bootstrap_summary_and_csv(tmp_path, capsys):
    data = tmp_path / "data.csv"
    run_cli(capsys, "datagen", "--dist", "normal(1,1)", "--n", "80", "--seed", "11", "--out", str(data))
    reps = tmp_path / "reps.csv"
    code, out, _ = run_cli(
        capsys, "bootstrap", "--kernel", "product", "--in", str(data),
        "--m", "80", "--replicates", "50", "--seed", "2", "--out-csv", str(reps),
    )
    assert code == 0
    doc = json.loads(out)
    jsonschema = pytest.importorskip("jsonschema")
    from uvboot.schemas import BOOTSTRAP_SUMMARY_SCHEMA

    jsonschema.validate(doc, BOOTSTRAP_SUMMARY_SCHEMA)
    lines = reps.read_text().strip().splitlines()
    assert lines[0] == "seed-index,u_star,v_star,q,pivot_u,pivot_v"
    assert len(lines) == 51

    # byte-identical on repeat with the same seed
    code, out2, _ = run_cli(
        capsys, "bootstrap", "--kernel", "product", "--in", str(data),
        "--m", "80", "--replicates", "50", "--seed", "2",
    )
    assert out2 == out


def test_ci_command(tmp_path, capsys):
    data = tmp_path / "data.csv"
    run_cli(capsys, "datagen", "--dist", "normal(1,1)", "--n", "100", "--seed", "4", "--out", str(data))
    code, out, _ = run_cli(
        capsys, "ci", "--kernel", "product", "--in", str(data),
        "--m", "100", "--replicates", "400", "--level", "0.95", "--seed", "6",
    )
    assert code == 0
    doc = json.loads(out)
    jsonschema = pytest.importorskip("jsonschema")
    from uvboot.schemas import CI_SCHEMA

    jsonschema.validate(doc, CI_SCHEMA)
    assert doc["lo"] < doc["u"] < doc["hi"]

    code, out2, _ = run_cli(
        capsys, "ci", "--kernel", "product", "--in", str(data),
        "--m", "100", "--replicates", "400", "--level", "0.5", "--seed", "6",
    )
    narrow = json.loads(out2)
    assert narrow["hi"] - narrow["lo"] < doc["hi"] - doc["lo"]


def test_verify_small_config_and_reproducibility(tmp_path, capsys):
    config = {
        "kind": "clt",
        "kernel": "product",
        "dist": {"family": "normal", "params": [1.0, 1.0]},
        "n": 60,
        "m_rule": {"kind": "match-n"},
        "replicates": 40,
        "master_seed": 5,
        "thresholds": {"ks_cutoff": 0.5},
    }
    cfg_path = tmp_path / "exp.json"
    cfg_path.write_text(json.dumps(config))
    out1 = tmp_path / "r1.json"
    out2 = tmp_path / "r2.json"
    raw = tmp_path / "raw.csv"
    code1, _, _ = run_cli(capsys, "verify", "--config", str(cfg_path), "--out", str(out1), "--raw-csv", str(raw))
    code2, _, _ = run_cli(capsys, "verify", "--config", str(cfg_path), "--out", str(out2))
    assert code1 == 0 and code2 == 0
    doc1 = json.loads(out1.read_text())
    doc2 = json.loads(out2.read_text())
    assert doc1["report"] == doc2["report"]
    assert raw.read_text().startswith("seed-index,")
    jsonschema = pytest.importorskip("jsonschema")
    from uvboot.schemas import REPORT_SCHEMA

    jsonschema.validate(doc1, REPORT_SCHEMA)


def test_verify_failing_config_exits_2(tmp_path, capsys):
    config = {
        "kind": "consistency-growing",
        "kernel": "product",
        "dist": {"family": "normal", "params": [1.0, 1.0]},
        "n_grid": [40, 80],
        "m_rule": {"kind": "match-n"},
        "replicates": 20,
        "master_seed": 5,
        "thresholds": {"shrink_factor": 1000000.0},
    }
    cfg_path = tmp_path / "fail.json"
    cfg_path.write_text(json.dumps(config))
    code, _, err = run_cli(capsys, "verify", "--config", str(cfg_path))
    assert code == 2
    assert "verification failed" in err


def test_verify_bad_config_is_usage_error(tmp_path, capsys):
    cfg_path = tmp_path / "broken.json"
    cfg_path.write_text("{not json")
    code, _, err = run_cli(capsys, "verify", "--config", str(cfg_path))
    assert code == 1
    assert "invalid JSON" in err
    cfg_path.write_text(json.dumps({"kind": "clt", "unknown_field": 1}))
    code, _, err = run_cli(capsys, "verify", "--config", str(cfg_path))
    assert code == 1


def test_verify_worker_env_override(tmp_path, capsys, monkeypatch):
    config = {
        "kind": "clt",
        "kernel": "product",
        "dist": {"family": "normal", "params": [1.0, 1.0]},
        "n": 60,
        "m_rule": {"kind": "match-n"},
        "replicates": 16,
        "master_seed": 5,
        "thresholds": {"ks_cutoff": 0.9},
    }
    cfg_path = tmp_path / "exp.json"
    cfg_path.write_text(json.dumps(config))
    out1 = tmp_path / "serial.json"
    out2 = tmp_path / "parallel.json"
    run_cli(capsys, "verify", "--config", str(cfg_path), "--out", str(out1))
    monkeypatch.setenv("UVBOOT_WORKERS", "2")
    run_cli(capsys, "verify", "--config", str(cfg_path), "--out", str(out2))
    assert json.loads(out1.read_text())["report"] == json.loads(out2.read_text())["report"]


def test_acceptance_clt_config_via_cli(capsys, repo_root):
    # the acceptance CLT config must verify with exit code 0 and pass = true
    code, out, _ = run_cli(capsys, "verify", "--config", str(repo_root / "docs/examples/clt500.json"))
    assert code == 0
    doc = json.loads(out)
    assert doc["report"]["pass"] is True


def test_usage_error_on_bad_flags(capsys):
    code, _, err = run_cli(capsys, "ustat", "--kernel", "product")
    assert code == 1
    code, _, err = run_cli(capsys, "nonsense")
    assert code == 1


def test_schema_docs_in_sync(repo_root):
    from uvboot.schemas import ALL_SCHEMAS

    for name, schema in ALL_SCHEMAS.items():
        path = repo_root / "docs" / "schemas" / f"{name}.schema.json"
        assert json.loads(path.read_text()) == schema, f"{path} out of date"
