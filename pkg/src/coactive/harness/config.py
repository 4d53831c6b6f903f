"""Experiment configuration and its plain-text key=value file format."""
from __future__ import annotations

from dataclasses import dataclass, fields
from pathlib import Path

FAMILIES = ("manipulation", "environment", "human")
ALGORITHMS = ("tpp", "mmp", "geometric", "manual", "supervised")
FEEDBACK_MODES = (
    "replace_top",
    "one_from_5",
    "one_from_n",
    "approx_argmax",
    "noisy_click",
    "waypoint",
)
GENERALIZATION_MODES = ("same", "new_object", "new_environment", "new_both")


@dataclass
class ExperimentConfig:
    family: str = "manipulation"
    tasks: int = 1
    iterations: int = 200
    candidates: int = 50
    feedback: str = "one_from_n"
    target_alpha: float = 1.0
    noise_epsilon: float = 0.5
    seed: int = 0
    algo: str = "tpp"
    generalization: str = "same"
    pretrain_iterations: int = 30
    mmp_regularization: float = 0.0  # 0 means: pick from the hindsight grid
    mmp_passes: int = 200
    proximity: float = 0.10
    n_waypoints: int = 30
    rrt_step: float = 0.3
    max_rrt_nodes: int = 600
    blocking_radius: float = 0.08
    blocking_probability: float = 0.5
    goal_bias_lo: float = 0.1
    goal_bias_hi: float = 0.6

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if self.candidates < 2:
            raise ValueError("candidates must be >= 2")
        if self.family not in FAMILIES:
            raise ValueError(f"family must be one of {FAMILIES}")
        if self.algo not in ALGORITHMS:
            raise ValueError(f"algo must be one of {ALGORITHMS}")
        if self.feedback not in FEEDBACK_MODES:
            raise ValueError(f"feedback must be one of {FEEDBACK_MODES}")
        if self.generalization not in GENERALIZATION_MODES:
            raise ValueError(f"generalization must be one of {GENERALIZATION_MODES}")


def config_to_dict(cfg: ExperimentConfig) -> dict:
    return {f.name: getattr(cfg, f.name) for f in fields(ExperimentConfig)}


def config_from_dict(data: dict) -> ExperimentConfig:
    known = {f.name: f.type for f in fields(ExperimentConfig)}
    unknown = set(data) - set(known)
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    return ExperimentConfig(**data)


def load_config(path: str | Path) -> ExperimentConfig:
    """Parse a key=value file; '#' starts a comment, blank lines ignored."""
    values: dict = {}
    types = {f.name: f.type for f in fields(ExperimentConfig)}
    defaults = ExperimentConfig()
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in types:
            raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
        current = getattr(defaults, key)
        if isinstance(current, bool):
            values[key] = value.lower() in ("1", "true", "yes")
        elif isinstance(current, int):
            values[key] = int(value)
        elif isinstance(current, float):
            values[key] = float(value)
        else:
            values[key] = value
    return ExperimentConfig(**values)
