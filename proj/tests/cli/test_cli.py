import csv
import io
import json
import os
import subprocess
from pathlib import Path

import pytest

BIN = os.environ.get("QKDSIM_BIN", "qkdsim")
CONFIGS = Path(__file__).resolve().parents[2] / "configs"


def qkdsim(*args, env=None):
    full_env = {k: v for k, v in os.environ.items() if k != "QKDSIM_CONFIG_DIR"}
    full_env.update(env or {})
    return subprocess.run([BIN, *map(str, args)], capture_output=True, text=True, env=full_env)


def preset(name):
    return CONFIGS / f"{name}.yaml"


def test_honest_run_exits_zero():
    r = qkdsim("run", "--config", preset("kak_auth_honest"))
    assert r.returncode == 0, r.stderr
    report = json.loads(r.stdout)
    assert report["aborted"] is False
    assert report["recovered_bits"] == "10110"


def test_detected_attack_exits_one():
    r = qkdsim("run", "--config", preset("kak_auth_mitm"))
    assert r.returncode == 1
    report = json.loads(r.stdout)
    assert report["abort_reason"] == "integrity"
    assert report["abort_step"] in (2, 3)


def test_repeat_runs_are_byte_identical(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for out in (a, b):
        r = qkdsim("run", "--config", preset("bb84_pns"), "--set", "bb84.n_pulses=5000", "--output", out)
        assert r.returncode == 0, r.stderr
    assert a.read_bytes() == b.read_bytes()
    c = tmp_path / "c.json"
    qkdsim("run", "--config", preset("bb84_pns"), "--set", "bb84.n_pulses=5000", "--seed", "8", "--output", c)
    assert c.read_bytes() != a.read_bytes()


def test_seed_flag_matches_set_override():
    a = qkdsim("run", "--config", preset("kak_honest"), "--seed", "5")
    b = qkdsim("run", "--config", preset("kak_honest"), "--set", "seed=5")
    assert a.stdout == b.stdout
    assert json.loads(a.stdout)["seed"] == 5


def test_batch_csv_has_header_and_one_row_per_trial():
    r = qkdsim("batch", "--config", preset("kak_mitm"), "--trials", "20", "--format", "csv")
    assert r.returncode == 0, r.stderr
    rows = list(csv.reader(io.StringIO(r.stdout)))
    assert len(rows) == 21
    assert rows[0][:4] == ["trial", "seed", "protocol", "adversary"]
    assert [row[0] for row in rows[1:]] == [str(i) for i in range(20)]
    assert all(len(row) == len(rows[0]) for row in rows)


def test_batch_with_detections_exits_one():
    r = qkdsim("batch", "--config", preset("kak_auth_mitm"), "--trials", "5")
    assert r.returncode == 1
    assert json.loads(r.stdout)["detections"] == 5


def test_transcript_jsonl(tmp_path):
    t = tmp_path / "t.jsonl"
    r = qkdsim("run", "--config", preset("kak_mitm"), "--transcript", t)
    assert r.returncode == 0, r.stderr
    events = [json.loads(line) for line in t.read_text().splitlines()]
    assert len(events) == len(json.loads(r.stdout)["transcript"])
    assert all("amplitudes" in s for e in events for s in e["states"])


def test_all_config_problems_listed(tmp_path):
    out = tmp_path / "never.json"
    r = qkdsim(
        "run", "--config", preset("bb84_clean"),
        "--set", "bb84.sample_fraction=2", "--set", "bogus=1", "--set", "seed=x",
        "--format", "xml", "--output", out,
    )
    assert r.returncode == 2
    for needle in ("--format", "bogus", "seed", "sample_fraction"):
        assert needle in r.stderr
    assert r.stdout == ""
    assert not out.exists()


def test_zero_trials_rejected(tmp_path):
    out = tmp_path / "never.csv"
    r = qkdsim("batch", "--config", preset("bb84_clean"), "--trials", "0", "--output", out)
    assert r.returncode == 2
    assert "--trials" in r.stderr
    assert not out.exists()


def test_missing_config_names_path():
    r = qkdsim("run", "--config", "does/not/exist.yaml")
    assert r.returncode == 2
    assert "does/not/exist.yaml" in r.stderr


def test_config_dir_environment_variable():
    r = qkdsim("explain", "--config", "replay_stale", env={"QKDSIM_CONFIG_DIR": str(CONFIGS)})
    assert r.returncode == 0, r.stderr
    assert "replay_delay_millis: 30001" in r.stdout
    assert qkdsim("explain", "--config", "replay_stale").returncode == 2


def test_unwritable_output_is_an_io_error():
    r = qkdsim("run", "--config", preset("kak_honest"), "--output", "/nonexistent-dir/x.json")
    assert r.returncode == 2
    assert "/nonexistent-dir/x.json" in r.stderr


@pytest.mark.parametrize("args", [[], ["frobnicate"], ["run"], ["run", "--config"], ["batch", "--config", "x"]])
def test_usage_errors_exit_two(args):
    assert qkdsim(*args).returncode == 2


def test_help_exits_zero():
    r = qkdsim("--help")
    assert r.returncode == 0
    for sub in ("run", "batch", "attacks-list", "explain"):
        assert sub in r.stdout


def test_attacks_list():
    r = qkdsim("attacks-list")
    assert r.returncode == 0
    for name in ("none", "intercept_resend", "beam_splitting", "mitm", "replay"):
        assert name in r.stdout
