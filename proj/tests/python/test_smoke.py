import math

import numpy as np
import pytest

import efold


def test_angles_and_rewards():
    assert efold.wrap_angle(3 * math.pi) == pytest.approx(math.pi)
    assert efold.angular_distance(math.pi - 0.01, -math.pi + 0.01) == pytest.approx(0.02)
    assert efold.sparse_reward(0.3, 0.3) == 0.0
    assert efold.sparse_reward(0.0, 0.5) == -1.0
    assert efold.dense_reward(0.0, 0.5) == pytest.approx(-1.5)


def test_plant_steps_and_stays_in_bounds():
    plant = efold.make_plant({"plant": {"fingers": 3}})
    assert plant.fingers == 3
    state = plant.reset(7)
    rng = np.random.default_rng(0)
    for _ in range(50):
        state, dropped = plant.step(state, list(rng.uniform(-1, 1, 6)))
        assert all(abs(s) <= 0.6 + 1e-12 for s in state.s)
        if dropped:
            break


def test_metrics_match_closed_forms():
    g = np.sin(0.05 * np.arange(400)) * 0.5
    assert efold.mse(g, g + 0.1) == pytest.approx(0.01)
    lagged = np.sin(0.05 * (np.arange(400) - 4)) * 0.5
    assert efold.latency(g, lagged) == pytest.approx(-4, abs=0.5)
    actions = np.zeros((10, 4))
    actions[:, 0] = 1.0
    assert efold.saturation(actions) == 25.0
    assert efold.energy(actions) == 10.0


def test_config_round_trip_and_errors():
    cfg = efold.default_config()
    assert efold.normalize_config(cfg) == cfg
    partial = efold.normalize_config({"training": {"epochs": 3}})
    assert partial["training"]["epochs"] == 3
    with pytest.raises(efold.ConfigError):
        efold.normalize_config({"plant": {"nope": 1}})


def test_train_replay_and_checkpoint(tmp_path):
    seen = []
    ck, rates = efold.train(
        {"training": {"epochs": 1, "cycles_per_epoch": 1, "hidden_width": 8, "eval_trials": 3}},
        seed=4,
        on_epoch=lambda e, r: seen.append(e),
    )
    assert seen == [0] and len(rates) == 1
    path = tmp_path / "ck.json"
    efold.save_checkpoint(ck, path)
    assert efold.load_checkpoint(path) == ck
    goals = [0.2] * 30
    a = efold.replay(ck, goals, sensor="camera", seed=9)
    b = efold.replay(ck, goals, sensor="camera", seed=9)
    assert a["phi"] == b["phi"]
    with pytest.raises(efold.LoadError):
        efold.load_checkpoint(tmp_path / "missing.json")
