"""Python interface to the efold workbench core."""

import json as _json

from . import _efold
from ._efold import (  # noqa: F401
    Checkpoint,
    ConfigError,
    DomainError,
    LoadError,
    Plant,
    PlantState,
    RuntimeFault,
    UsageError,
    angular_distance,
    dense_reward,
    energy,
    evaluate_success_rate,
    latency,
    load_checkpoint,
    mse,
    quaternion_distance,
    read_trajectory,
    replay,
    saturation,
    save_checkpoint,
    sinusoid_goal,
    sparse_reward,
    step_goal,
    step_metrics,
    wrap_angle,
)

__version__ = "0.1.0"


def _dump(config):
    if config is None:
        return ""
    if isinstance(config, str):
        return config
    return _json.dumps(config)


def default_config():
    """The full workbench config with every default filled in."""
    return _json.loads(_efold.default_config_json())


def normalize_config(config):
    """Validate a (partial) config dict and return it with defaults filled in."""
    return _json.loads(_efold.normalize_config_json(_dump(config)))


def make_plant(config=None):
    return Plant(_dump(config))


def train(config=None, seed=0, on_epoch=None):
    """Train one policy. Returns (checkpoint, per-epoch success rates)."""
    return _efold.train(_dump(config), seed, on_epoch)
