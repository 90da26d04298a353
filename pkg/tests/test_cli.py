"""CLI behavior through real subprocess invocations."""

import json
import subprocess
import sys

import pytest

SMALL = {"n_bs": 12, "n_hours": 336, "seed": 1}


def run(*args, cwd=None):
    return subprocess.run(
        [sys.executable, "-m", "blockreg", *map(str, args)],
        capture_output=True,
        text=True,
        cwd=cwd,
    )


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    """Corpus plus one trained model of each kind, built once."""
    ws = tmp_path_factory.mktemp("cli")
    cfg = ws / "synth.json"
    cfg.write_text(json.dumps(SMALL))
    assert run("synth", "--output", ws / "corpus.csv", "--config", cfg).returncode == 0
    for kind in ("br", "lr", "sa"):
        r = run("train", "--input", ws / "corpus.csv",
                "--model", ws / f"{kind}.json", "--kind", kind)
        assert r.returncode == 0, r.stderr
    return ws


def test_synth_writes_deterministic_corpus(tmp_path):
    cfg = tmp_path / "synth.json"
    cfg.write_text(json.dumps(SMALL))
    a = run("synth", "--output", tmp_path / "a.csv", "--config", cfg)
    b = run("synth", "--output", tmp_path / "b.csv", "--config", cfg)
    assert a.returncode == 0 and b.returncode == 0
    assert "12 stations x 336 hours" in a.stdout
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def test_synth_seed_flag_overrides_config(tmp_path):
    cfg = tmp_path / "synth.json"
    cfg.write_text(json.dumps(SMALL))
    run("synth", "--output", tmp_path / "a.csv", "--config", cfg)
    run("synth", "--output", tmp_path / "b.csv", "--config", cfg, "--seed", 2)
    assert (tmp_path / "a.csv").read_bytes() != (tmp_path / "b.csv").read_bytes()


def test_clean_drops_faulty_station(workspace, tmp_path):
    dirty = tmp_path / "dirty.csv"
    text = (workspace / "corpus.csv").read_text().splitlines()
    first_data = text[1].split(",")[0]
    patched = [text[0]] + [
        f"{first_data},0,NA" if ln.startswith(f"{first_data},0,") else ln
        for ln in text[1:]
    ]
    dirty.write_text("\n".join(patched) + "\n")
    r = run("clean", "--input", dirty, "--output", tmp_path / "clean.csv")
    assert r.returncode == 0
    assert "kept 11/12" in r.stdout


def test_train_br_parameter_count(workspace):
    doc = json.loads((workspace / "br.json").read_text())
    assert doc["kind"] == "br"
    assert doc["params"] == 4
    assert len(doc["theta"]) == 3
    assert doc["m"] == 24


def test_train_lr_parameter_count(workspace):
    doc = json.loads((workspace / "lr.json").read_text())
    assert doc["params"] == 73
    assert doc["m"] == 0


def test_train_sa_parameter_count(workspace):
    doc = json.loads((workspace / "sa.json").read_text())
    assert doc["params"] == 5 * 12
    assert doc["failed_bs"] == []


def test_eval_report_and_threads_determinism(workspace, tmp_path):
    args = ("eval", "--input", workspace / "corpus.csv",
            "--model", workspace / "br.json")
    r1 = run(*args, "--output", tmp_path / "r1.json", "--seed", 9)
    r2 = run(*args, "--output", tmp_path / "r2.json", "--seed", 9)
    r3 = run(*args, "--output", tmp_path / "r3.json", "--seed", 9,
             "--threads", 6)
    assert r1.returncode == 0, r1.stderr
    b1 = (tmp_path / "r1.json").read_bytes()
    assert b1 == (tmp_path / "r2.json").read_bytes()
    assert b1 == (tmp_path / "r3.json").read_bytes()
    doc = json.loads(b1)
    assert doc["config"]["seed"] == 9
    assert "threads" not in doc["config"]
    assert len(doc["per_bs"]) == 12


def test_eval_csv_output(workspace, tmp_path):
    out = tmp_path / "report.csv"
    r = run("eval", "--input", workspace / "corpus.csv",
            "--model", workspace / "lr.json", "--output", out)
    assert r.returncode == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "bs_id,nrmse"
    assert len(lines) == 13


def test_eval_config_file_precedence(workspace, tmp_path):
    cfg = tmp_path / "eval.json"
    cfg.write_text(json.dumps({"train_hours": 200, "test_hours": 48}))
    out = tmp_path / "r.json"
    run("eval", "--input", workspace / "corpus.csv",
        "--model", workspace / "br.json", "--output", out, "--config", cfg)
    doc = json.loads(out.read_text())
    assert doc["config"]["train_hours"] == 200  # from file
    run("eval", "--input", workspace / "corpus.csv",
        "--model", workspace / "br.json", "--output", out, "--config", cfg,
        "--train-hours", 216)
    doc = json.loads(out.read_text())
    assert doc["config"]["train_hours"] == 216  # flag wins
    assert doc["config"]["test_hours"] == 48


def test_forecast_csv_layout(workspace, tmp_path):
    out = tmp_path / "fc.csv"
    r = run("forecast", "--input", workspace / "corpus.csv",
            "--model", workspace / "br.json", "--output", out,
            "--test-hours", 10)
    assert r.returncode == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "bs_id,hour,actual,forecast,mode"
    assert len(lines) == 1 + 12 * 10
    bs_id, hour, actual, forecast, mode = lines[1].split(",")
    assert hour == "240"
    assert mode == "one_step"
    float(actual), float(forecast)


def test_forecast_recursive_mode(workspace, tmp_path):
    out = tmp_path / "fc.csv"
    r = run("forecast", "--input", workspace / "corpus.csv",
            "--model", workspace / "sa.json", "--output", out,
            "--mode", "recursive", "--test-hours", 5)
    assert r.returncode == 0
    assert ",recursive" in out.read_text()


def test_sweep_grid_from_config(workspace, tmp_path):
    cfg = tmp_path / "sweep.json"
    cfg.write_text(json.dumps({"seasonalities": [12, 24]}))
    out = tmp_path / "sweep.json.out"
    r = run("sweep", "--input", workspace / "corpus.csv", "--output", out,
            "--config", cfg)
    assert r.returncode == 0
    doc = json.loads(out.read_text())
    assert [p["m"] for p in doc] == [12, 24]
    assert "best_m=" in r.stdout


def test_sweep_default_grid_has_seven_points(workspace, tmp_path):
    out = tmp_path / "sweep.json"
    r = run("sweep", "--input", workspace / "corpus.csv", "--output", out)
    assert r.returncode == 0
    assert len(json.loads(out.read_text())) == 7


def test_missing_input_exits_3(tmp_path):
    r = run("eval", "--input", tmp_path / "nope.csv",
            "--model", tmp_path / "nope.json", "--output", tmp_path / "r.json")
    assert r.returncode == 3
    err = json.loads(r.stderr)
    assert err["family"] == "DataError"


def test_bad_flag_value_exits_2(workspace, tmp_path):
    r = run("train", "--input", workspace / "corpus.csv",
            "--model", tmp_path / "m.json", "--m", 400)
    assert r.returncode == 2
    err = json.loads(r.stderr)
    assert err["family"] == "ConfigError"


def test_unknown_config_key_exits_2(workspace, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"wat": 1}))
    r = run("eval", "--input", workspace / "corpus.csv",
            "--model", workspace / "br.json", "--output", tmp_path / "r.json",
            "--config", cfg)
    assert r.returncode == 2
    assert "wat" in json.loads(r.stderr)["message"]


def test_unclean_corpus_exits_3(workspace, tmp_path):
    dirty = tmp_path / "dirty.csv"
    text = (workspace / "corpus.csv").read_text().splitlines()
    text[1] = text[1].rsplit(",", 1)[0] + ",NA"
    dirty.write_text("\n".join(text) + "\n")
    r = run("train", "--input", dirty, "--model", tmp_path / "m.json")
    assert r.returncode == 3
    assert json.loads(r.stderr)["error"] == "UncleanCorpus"


def test_argparse_errors_exit_2(workspace):
    assert run("train", "--input", workspace / "corpus.csv").returncode == 2
    assert run("frobnicate").returncode == 2


def test_threads_must_be_positive(workspace, tmp_path):
    r = run("eval", "--input", workspace / "corpus.csv",
            "--model", workspace / "br.json", "--output", tmp_path / "r.json",
            "--threads", 0)
    assert r.returncode == 2


def test_help_lists_defaults():
    top = run("--help")
    assert top.returncode == 0
    for sub in ("synth", "clean", "train", "forecast", "eval", "sweep"):
        assert sub in top.stdout
    train_help = run("train", "--help").stdout
    assert "--kind" in train_help and "default br" in train_help
    assert "default 24" in train_help
    assert "default 240" in train_help
    eval_help = run("eval", "--help").stdout
    assert "--mode" in eval_help and "--threads" in eval_help
