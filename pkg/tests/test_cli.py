import json
import subprocess
import sys

import numpy as np
import pytest

from cliquepart.cli import main
from cliquepart.environment import read_episode_log
from cliquepart.instance import load_instance, save_instance
from cliquepart.objective import evaluate, load_partition


def test_generate_is_seeded(tmp_path, capsys):
    assert main(["generate", "--env", "cities", "--n", "12", "--seed", "4", "--out", str(tmp_path / "a.json")]) == 0
    assert main(["generate", "--env", "cities", "--n", "12", "--seed", "4", "--out", str(tmp_path / "b.json")]) == 0
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()
    inst = load_instance(tmp_path / "a.json")
    assert inst.n == 12 and inst.threshold == 60.0


def test_threshold_flag(tmp_path):
    main(["generate", "--env", "general", "--n", "5", "--threshold", "30", "--out", str(tmp_path / "g.json")])
    assert load_instance(tmp_path / "g.json").threshold == 30.0


def test_solve_exact_on_fixture(tmp_path, capsys, golden):
    save_instance(golden, tmp_path / "f.json")
    assert main(["solve-exact", "--instance", str(tmp_path / "f.json"), "--out", str(tmp_path / "p.json")]) == 0
    out = capsys.readouterr().out
    assert "objective 74.0" in out and "[[0, 1, 2], [3]]" in out and "wall time" in out
    assert evaluate(golden, load_partition(tmp_path / "p.json")) == 74.0


def test_solve_exact_cap(tmp_path, capsys):
    main(["generate", "--env", "general", "--n", "9", "--out", str(tmp_path / "g.json")])
    assert main(["solve-exact", "--instance", str(tmp_path / "g.json"), "--cap", "8"]) == 2
    assert "capped" in capsys.readouterr().err


def test_solve_heuristic_outputs(tmp_path, capsys, golden):
    save_instance(golden, tmp_path / "f.json")
    args = ["solve-heuristic", "--policy", "random", "--instance", str(tmp_path / "f.json"), "--episodes", "20",
            "--log", str(tmp_path / "log.jsonl"), "--out", str(tmp_path / "p.json")]
    assert main(args) == 0
    assert "objective 74.0" in capsys.readouterr().out
    recs = read_episode_log(tmp_path / "log.jsonl")
    assert recs[-1]["objective_after"] == 74.0
    assert set(recs[0]) == {"step", "action", "reward", "added", "removed", "objective_after"}


def test_bad_instance_file(tmp_path, capsys):
    (tmp_path / "bad.json").write_text(json.dumps({"n": 2, "threshold": 60, "distances": [[0, 1], [2, 0]]}))
    assert main(["solve-exact", "--instance", str(tmp_path / "bad.json")]) == 2
    assert "error" in capsys.readouterr().err
    assert main(["solve-exact", "--instance", str(tmp_path / "missing.json")]) == 2


def test_evaluate_and_export(tmp_path, capsys):
    out = tmp_path / "rep"
    assert main(["evaluate", "--methods", "random,greedy", "--n", "10", "--count", "5", "--out", str(out)]) == 0
    text = capsys.readouterr().out
    assert "Mean opt. gap" in text
    assert main(["export", "--report", str(out) + ".csv", "--out", str(tmp_path / "again")]) == 0
    assert (tmp_path / "again.txt").read_text() == (tmp_path / "rep.txt").read_text()


def test_evaluate_best_known(tmp_path, capsys):
    assert main(["evaluate", "--n", "25", "--count", "3", "--reference", "best-known",
                 "--out", str(tmp_path / "r")]) == 0
    assert "regret vs best-known" in capsys.readouterr().out


def test_train_and_resume(tmp_path, capsys):
    cfg = tmp_path / "c.toml"
    cfg.write_text("n = 5\npool_size = 4\nepisodes_per_batch = 2\ntotal_batches = 2\ncheckpoint_every = 1\n")
    assert main(["train", "--config", str(cfg), "--out-dir", str(tmp_path / "run")]) == 0
    assert (tmp_path / "run" / "config.toml").exists()
    assert main(["train", "--resume", str(tmp_path / "run" / "checkpoint_000001.json"),
                 "--out-dir", str(tmp_path / "run")]) == 0
    assert (tmp_path / "run" / "checkpoint_000002.json").exists()
    lines = (tmp_path / "run" / "metrics.csv").read_text().splitlines()
    assert lines[0] == "batch,mean_return,mean_objective,mean_gap,policy_loss,value_loss,entropy"
    assert len(lines) == 3


def test_verify_fig1_subprocess():
    res = subprocess.run([sys.executable, "-m", "cliquepart.cli", "verify-fig1"], capture_output=True, text=True)
    assert res.returncode == 0
    assert res.stdout.count("PASS") == 9
