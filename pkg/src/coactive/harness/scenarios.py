"""Seeded scenario generation for three task families.

Layout lives on a tabletop at z=0 around a fixed two-link arm. The
environment stream draws start/goal postures and obstacle boxes; a
separate object stream draws the carried object, so generalization splits
can change one without the other. Families steer the attribute mix:

* manipulation: the carried object is spill- or damage-prone (liquid or
  fragile), obstacles get arbitrary attributes.
* environment: at least one electronic or fragile obstacle sits near the
  start-goal corridor and the carried object is liquid or heavy.
* human: the carried object is sharp or hot and a person-sized box stands
  near the corridor (all-zero attributes unless a "human" label is part
  of the attribute set).
"""
from __future__ import annotations

import math

import numpy as np

from ..sampler import rrt_plan
from ..world import (
    DEFAULT_ATTRIBUTES,
    ArmModel,
    Scene,
    SceneObject,
)
from .config import FAMILIES

TABLE_HEIGHT = 0.0

STANDARD_ARM = ArmModel(
    shoulder_origin=(0.0, 0.0, 0.45),
    link_upper=0.5,
    link_fore=0.5,
    joint_limits=(
        (-math.pi, math.pi),
        (-1.4, 1.6),
        (-2.6, 2.6),
        (-2.2, 2.2),
    ),
)

_ENV_STREAM = 0xE17
_OBJ_STREAM = 0x0B7


class ScenarioError(RuntimeError):
    """Raised when no feasible scene can be drawn for a seed."""


def _ik_start(arm: ArmModel, point: np.ndarray) -> np.ndarray | None:
    from ..sampler import wrist_ik

    solutions = wrist_ik(arm, point)
    if not solutions:
        return None
    # prefer the elbow-up posture and hold the object upright at the start
    q = solutions[0]
    lo, hi = arm.joint_limits[3]
    q = q.copy()
    q[3] = float(np.clip(-(q[1] + q[2]), lo, hi))
    return q


def _point_clear(obstacles: list[dict], x: float, y: float, margin: float) -> bool:
    for o in obstacles:
        dx = max(0.0, abs(x - o["center"][0]) - o["half"][0])
        dy = max(0.0, abs(y - o["center"][1]) - o["half"][1])
        if math.hypot(dx, dy) < margin:
            return False
    return True


def _boxes_disjoint(obstacles: list[dict], center, half) -> bool:
    for o in obstacles:
        gaps = np.abs(np.asarray(center) - o["center"]) - (np.asarray(half) + o["half"])
        if np.all(gaps < 0.02):
            return False
    return True


def _draw_environment(env_rng: np.random.Generator, family: str) -> dict:
    theta_start = env_rng.uniform(-math.pi, math.pi)
    swing = env_rng.uniform(1.0, 2.4) * (1.0 if env_rng.random() < 0.5 else -1.0)
    theta_goal = theta_start + swing
    r_start = env_rng.uniform(0.45, 0.78)
    r_goal = env_rng.uniform(0.45, 0.78)
    start_point = np.array(
        [r_start * math.cos(theta_start), r_start * math.sin(theta_start),
         env_rng.uniform(0.14, 0.40)]
    )
    goal_point = np.array(
        [r_goal * math.cos(theta_goal), r_goal * math.sin(theta_goal),
         env_rng.uniform(0.14, 0.40)]
    )

    obstacles: list[dict] = []
    theta_mid = theta_start + swing / 2.0
    r_mid = (r_start + r_goal) / 2.0

    def _place(cx, cy, half, kind) -> bool:
        center = np.array([cx, cy, half[2]])
        if not (
            _point_clear(obstacles, cx, cy, 0.0)
            and _boxes_disjoint(obstacles, center, half)
        ):
            return False
        for px, py in ((start_point[0], start_point[1]), (goal_point[0], goal_point[1])):
            dx = max(0.0, abs(px - cx) - half[0])
            dy = max(0.0, abs(py - cy) - half[1])
            if math.hypot(dx, dy) < 0.18:
                return False
        obstacles.append({"center": center, "half": np.asarray(half), "kind": kind})
        return True

    if family == "environment":
        for _ in range(20):
            off = env_rng.uniform(-0.15, 0.15)
            rr = r_mid + env_rng.uniform(-0.1, 0.1)
            cx = rr * math.cos(theta_mid) + off
            cy = rr * math.sin(theta_mid) - off
            half = env_rng.uniform((0.05, 0.05, 0.06), (0.11, 0.11, 0.16))
            if _place(cx, cy, half, "corridor"):
                break
    if family == "human":
        for _ in range(20):
            rr = env_rng.uniform(0.85, 1.1)
            jitter = env_rng.uniform(-0.3, 0.3)
            cx = rr * math.cos(theta_mid + jitter)
            cy = rr * math.sin(theta_mid + jitter)
            if _place(cx, cy, np.array([0.15, 0.15, 0.40]), "human"):
                break

    n_extra = int(env_rng.integers(2, 7))
    tries = 0
    while sum(o["kind"] == "plain" for o in obstacles) < n_extra and tries < 80:
        tries += 1
        ang = env_rng.uniform(-math.pi, math.pi)
        rad = env_rng.uniform(0.30, 0.92)
        half = env_rng.uniform((0.04, 0.04, 0.05), (0.12, 0.12, 0.18))
        _place(rad * math.cos(ang), rad * math.sin(ang), half, "plain")

    attribute_rolls = env_rng.integers(0, 2, size=(len(obstacles) + 8, len(DEFAULT_ATTRIBUTES)))
    return {
        "start_point": start_point,
        "goal_point": goal_point,
        "obstacles": obstacles,
        "attribute_rolls": attribute_rolls,
    }


_FAMILY_CARRIED = {
    "manipulation": ("liquid", "fragile"),
    "environment": ("liquid", "heavy"),
    "human": ("sharp", "hot"),
}


def _draw_carried(obj_rng: np.random.Generator, family: str, labels: tuple[str, ...]):
    half = obj_rng.uniform((0.030, 0.030, 0.035), (0.050, 0.050, 0.055))
    primary = _FAMILY_CARRIED[family][int(obj_rng.integers(2))]
    attrs = np.zeros(len(labels), dtype=np.int8)
    attrs[labels.index(primary)] = 1
    if obj_rng.random() < 0.3:
        extra = labels.index("heavy" if primary != "heavy" else "hot")
        attrs[extra] = 1
    return half, attrs


def _obstacle_attributes(
    env: dict, idx: int, kind: str, family: str, labels: tuple[str, ...]
) -> np.ndarray:
    attrs = np.zeros(len(labels), dtype=np.int8)
    if kind == "human":
        if "human" in labels:
            attrs[labels.index("human")] = 1
        return attrs
    if kind == "corridor":
        pick = "electronic" if env["attribute_rolls"][idx][0] else "fragile"
        attrs[labels.index(pick)] = 1
        return attrs
    roll = env["attribute_rolls"][idx]
    for m, label in enumerate(labels):
        if label == "human":
            continue
        if roll[m % roll.shape[0]] and np.count_nonzero(attrs) < 2:
            attrs[m] = 1
    return attrs


def generate_scenario(
    family: str, seed: int, attributes: tuple[str, ...] = DEFAULT_ATTRIBUTES
) -> Scene:
    """Deterministic feasible scene for (family, seed)."""
    if family not in FAMILIES:
        raise ValueError(f"family must be one of {FAMILIES}")
    env_rng = np.random.default_rng([seed, _ENV_STREAM])
    obj_rng = np.random.default_rng([seed, _OBJ_STREAM])
    return _generate(family, env_rng, obj_rng, attributes)


def generalization_pair(
    family: str,
    seed: int,
    mode: str,
    attributes: tuple[str, ...] = DEFAULT_ATTRIBUTES,
) -> tuple[Scene, Scene]:
    """Train/test scene pair; the mode picks which streams change."""
    new_env = mode in ("new_environment", "new_both")
    new_obj = mode in ("new_object", "new_both")
    train = _generate(
        family,
        np.random.default_rng([seed, _ENV_STREAM]),
        np.random.default_rng([seed, _OBJ_STREAM]),
        attributes,
    )
    test = _generate(
        family,
        np.random.default_rng([seed, _ENV_STREAM + (1 if new_env else 0)]),
        np.random.default_rng([seed, _OBJ_STREAM + (1 if new_obj else 0)]),
        attributes,
    )
    return train, test


def _generate(
    family: str,
    env_rng: np.random.Generator,
    obj_rng: np.random.Generator,
    attributes: tuple[str, ...],
) -> Scene:
    arm = STANDARD_ARM
    for _ in range(40):  # environment redraws are rare; margins keep scenes open
        env = _draw_environment(env_rng, family)
        start_config = _ik_start(arm, env["start_point"])
        if start_config is None:
            continue
        from ..sampler import wrist_ik

        if not wrist_ik(arm, env["goal_point"]):
            continue
        for _ in range(6):
            carried_half, carried_attrs = _draw_carried(obj_rng, family, attributes)
            objects = [
                SceneObject(
                    id="carried",
                    center=env["start_point"],
                    half_extents=carried_half,
                    attributes=carried_attrs,
                )
            ]
            for i, o in enumerate(env["obstacles"]):
                objects.append(
                    SceneObject(
                        id=f"box{i}",
                        center=o["center"],
                        half_extents=o["half"],
                        attributes=_obstacle_attributes(
                            env, i, o["kind"], family, attributes
                        ),
                    )
                )
            scene = Scene(
                attributes=attributes,
                objects=tuple(objects),
                manipulated_id="carried",
                table_height=TABLE_HEIGHT,
                goal=env["goal_point"],
                start_config=start_config,
                arm=arm,
            )
            probe = rrt_plan(scene, (), goal_bias=0.4, seed=0, max_nodes=1200)
            if probe is not None:
                return scene
    raise ScenarioError(f"no feasible {family} scene found for this seed")
