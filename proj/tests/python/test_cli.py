import json
import os
import re
import subprocess
import sys

import pytest

EFOLD = os.environ.get("EFOLD_BIN")
pytestmark = pytest.mark.skipif(not EFOLD, reason="EFOLD_BIN not set")

TINY = ["--epochs", "1", "--hidden-width", "8", "--set", "training.cycles_per_epoch=1",
        "--set", "training.eval_trials=3", "-q"]


def run(*args, env=None, **kw):
    e = dict(os.environ)
    e.update(env or {})
    return subprocess.run([EFOLD, *args], capture_output=True, text=True, env=e, **kw)


@pytest.fixture
def trained(tmp_path):
    logs = tmp_path / "logs"
    r = run("train", *TINY, "--seed", "3", env={"EFOLD_LOG_DIR": str(logs)})
    assert r.returncode == 0, r.stderr
    ck = logs / "train" / "run-0" / "checkpoint.json"
    assert ck.exists()
    return logs, ck


def test_exit_codes(tmp_path):
    assert run().returncode == 1
    assert run("eval").returncode == 1
    assert run("train", "--set", "plant.nope=1").returncode == 2
    assert run("train", "--set", "plant.travel=-1").returncode == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    assert run("train", "-c", str(bad)).returncode == 2
    assert run("eval", "--checkpoint", str(tmp_path / "missing.json")).returncode == 2


def test_config_dump_reload_round_trip(tmp_path):
    first = tmp_path / "a.json"
    second = tmp_path / "b.json"
    assert run("train", "--set", "plant.travel=0.9", "--epochs", "7", "--dump-config", str(first)).returncode == 0
    assert run("train", "-c", str(first), "--dump-config", str(second)).returncode == 0
    assert first.read_text() == second.read_text()
    cfg = json.loads(first.read_text())
    assert cfg["plant"]["travel"] == 0.9
    assert cfg["training"]["epochs"] == 7
    # Flags beat the file.
    out = run("train", "-c", str(first), "--epochs", "2", "--dump-config", "-").stdout
    assert json.loads(out)["training"]["epochs"] == 2


def test_log_dir_precedence(tmp_path):
    env_dir = tmp_path / "env"
    flag_dir = tmp_path / "flag"
    assert run("train", *TINY, env={"EFOLD_LOG_DIR": str(env_dir)}).returncode == 0
    assert (env_dir / "train" / "run-0" / "success.csv").exists()
    assert run("train", *TINY, "--log-dir", str(flag_dir), env={"EFOLD_LOG_DIR": str(env_dir)}).returncode == 0
    assert (flag_dir / "train" / "run-0" / "success.csv").exists()


def test_seeded_training_is_reproducible(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert run("train", *TINY, "--seed", "5", "--log-dir", str(d)).returncode == 0
    ck = "train/run-0/checkpoint.json"
    assert (a / ck).read_text() == (b / ck).read_text()


def test_eval_metrics_replay(trained, tmp_path):
    logs, ck = trained
    env = {"EFOLD_LOG_DIR": str(logs)}
    r = run("eval", "--checkpoint", str(ck), "--steps", "100", "--repeats", "2", "--sensor", "imu", "--seed", "1", env=env)
    assert r.returncode == 0, r.stderr
    assert r.stdout.startswith("reward,alpha,omega,mse_rad2")
    again = run("eval", "--checkpoint", str(ck), "--steps", "100", "--repeats", "2", "--sensor", "imu", "--seed", "1",
                "-o", str(tmp_path / "again"), env=env)
    assert again.stdout == r.stdout

    m = run("metrics", str(logs / "eval"), "--format", "json", env=env)
    assert m.returncode == 0, m.stderr
    rep = next((logs / "eval").rglob("rep-000.csv"))
    out = tmp_path / "replayed.csv"
    p = run("replay", "--checkpoint", str(ck), "--goals", str(rep), "--sensor", "camera", "--seed", "2", "-o", str(out))
    assert p.returncode == 0, p.stderr
    assert out.exists()


def test_serve_and_remote_replay(trained, tmp_path):
    logs, ck = trained
    goals = tmp_path / "goals.csv"
    goals.write_text("step,goal\n" + "".join(f"{i},{0.01 * i}\n" for i in range(60)))
    server = subprocess.Popen([EFOLD, "serve", "--checkpoint", str(ck), "--port", "0", "--log-dir", str(logs)],
                              stdout=subprocess.PIPE, stderr=subprocess.PIPE, text=True)
    try:
        line = server.stdout.readline()
        port = re.search(r":(\d+) ", line).group(1)
        local = tmp_path / "local.csv"
        remote = tmp_path / "remote.csv"
        common = ["--checkpoint", str(ck), "--goals", str(goals), "--sensor", "camera", "--seed", "8"]
        assert run("replay", *common, "-o", str(local)).returncode == 0
        r = run("replay", *common, "-o", str(remote), "--server", f"127.0.0.1:{port}")
        assert r.returncode == 0, r.stderr

        def body(path):
            return [l for l in path.read_text().splitlines() if not l.startswith("#")]

        assert body(local) == body(remote)
    finally:
        server.terminate()
        server.wait(timeout=10)
    assert server.returncode == 0


def test_unreachable_server_is_a_runtime_failure(trained, tmp_path):
    _, ck = trained
    goals = tmp_path / "goals.csv"
    goals.write_text("step,goal\n0,0.1\n")
    r = run("replay", "--checkpoint", str(ck), "--goals", str(goals), "--server", "127.0.0.1:1")
    assert r.returncode == 3
