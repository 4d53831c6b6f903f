"""Scene geometry and kinematics of a 4-DoF manipulator over a tabletop.

Coordinates are meters in a fixed world frame with +z up. The arm is a
yaw-pitch-pitch-pitch chain: base yaw about the vertical axis through the
shoulder, then shoulder, elbow and wrist pitches acting in the resulting
vertical plane. All types here are immutable values; operations are pure.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

DEFAULT_ATTRIBUTES = ("heavy", "fragile", "sharp", "hot", "liquid", "electronic")

# x-y footprint expansion for the below test; avoids knife-edge toggling
# when waypoints jitter around a box boundary.
BELOW_MARGIN = 0.05


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


def _vec(value, shape: tuple[int, ...], name: str) -> np.ndarray:
    v = np.array(value, dtype=float)
    if v.shape != shape:
        raise ValueError(f"{name} must have shape {shape}, got {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name} must be finite")
    return _readonly(v)


@dataclass(frozen=True)
class SceneObject:
    """Axis-aligned box with a binary attribute vector."""

    id: str
    center: np.ndarray
    half_extents: np.ndarray
    attributes: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "center", _vec(self.center, (3,), "center"))
        he = _vec(self.half_extents, (3,), "half_extents")
        if not np.all(he > 0):
            raise ValueError("half_extents must be strictly positive")
        object.__setattr__(self, "half_extents", he)
        attrs = np.array(self.attributes, dtype=np.int8)
        if attrs.ndim != 1 or not np.all((attrs == 0) | (attrs == 1)):
            raise ValueError("attributes must be a flat binary vector")
        object.__setattr__(self, "attributes", _readonly(attrs))

    @property
    def top(self) -> float:
        return float(self.center[2] + self.half_extents[2])

    @property
    def bottom(self) -> float:
        return float(self.center[2] - self.half_extents[2])


@dataclass(frozen=True)
class ArmModel:
    """Two-link arm: shoulder origin, upper-arm and forearm lengths, joint limits."""

    shoulder_origin: np.ndarray
    link_upper: float
    link_fore: float
    joint_limits: np.ndarray  # (4, 2) radians, row per joint, lo < hi

    def __post_init__(self):
        object.__setattr__(
            self, "shoulder_origin", _vec(self.shoulder_origin, (3,), "shoulder_origin")
        )
        if not (self.link_upper > 0 and self.link_fore > 0):
            raise ValueError("link lengths must be positive")
        lim = _vec(self.joint_limits, (4, 2), "joint_limits")
        if not np.all(lim[:, 0] < lim[:, 1]):
            raise ValueError("joint limits must satisfy lo < hi")
        object.__setattr__(self, "joint_limits", lim)


@dataclass(frozen=True)
class ArmPose:
    shoulder: np.ndarray
    elbow: np.ndarray
    wrist: np.ndarray


@dataclass(frozen=True)
class Scene:
    """A task context: attributed boxes, table plane, goal and start posture."""

    attributes: tuple[str, ...]
    objects: tuple[SceneObject, ...]
    manipulated_id: str
    table_height: float
    goal: np.ndarray
    start_config: np.ndarray
    arm: ArmModel

    def __post_init__(self):
        labels = tuple(self.attributes)
        if len(labels) < 1 or len(set(labels)) != len(labels):
            raise ValueError("attribute labels must be non-empty and unique")
        object.__setattr__(self, "attributes", labels)
        object.__setattr__(self, "objects", tuple(self.objects))
        for obj in self.objects:
            if obj.attributes.shape != (len(labels),):
                raise ValueError(f"object {obj.id!r} attribute vector length != {len(labels)}")
        matches = [o for o in self.objects if o.id == self.manipulated_id]
        if len(matches) != 1:
            raise ValueError("manipulated_id must resolve to exactly one object")
        object.__setattr__(self, "goal", _vec(self.goal, (3,), "goal"))
        if not self.goal[2] > self.table_height:
            raise ValueError("goal must lie above the table plane")
        q = _vec(self.start_config, (4,), "start_config")
        if not within_limits(self.arm, q):
            raise ValueError("start_config violates joint limits")
        object.__setattr__(self, "start_config", q)

    @property
    def manipulated(self) -> SceneObject:
        return next(o for o in self.objects if o.id == self.manipulated_id)

    @property
    def obstacles(self) -> tuple[SceneObject, ...]:
        """Objects the carried one can collide with (the carried box itself is not an obstacle)."""
        return tuple(o for o in self.objects if o.id != self.manipulated_id)


def within_limits(arm: ArmModel, q: np.ndarray) -> bool:
    q = np.asarray(q, dtype=float)
    lim = arm.joint_limits
    return bool(np.all(q >= lim[:, 0]) and np.all(q <= lim[:, 1]))


def forward_kinematics(arm: ArmModel, q) -> ArmPose:
    """Shoulder, elbow and wrist positions for a joint configuration.

    Raises ValueError when the configuration violates the joint limits.
    """
    q = np.asarray(q, dtype=float)
    if q.shape != (4,):
        raise ValueError(f"configuration must be a 4-vector, got {q.shape}")
    if not within_limits(arm, q):
        raise ValueError("configuration violates joint limits")
    elbow, wrist = wrist_elbow_positions(arm, q[None, :])
    return ArmPose(
        shoulder=_readonly(np.array(arm.shoulder_origin)),
        elbow=_readonly(elbow[0]),
        wrist=_readonly(wrist[0]),
    )


def wrist_elbow_positions(arm: ArmModel, configs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized elbow and wrist positions for an (n, 4) block of configurations.

    Does not validate limits; hot paths check separately.
    """
    q = np.asarray(configs, dtype=float)
    c1, s1 = np.cos(q[:, 0]), np.sin(q[:, 0])
    c2, s2 = np.cos(q[:, 1]), np.sin(q[:, 1])
    pitch_w = q[:, 1] + q[:, 2]
    cw, sw = np.cos(pitch_w), np.sin(pitch_w)
    origin = arm.shoulder_origin
    elbow = np.empty((q.shape[0], 3))
    elbow[:, 0] = origin[0] + arm.link_upper * c2 * c1
    elbow[:, 1] = origin[1] + arm.link_upper * c2 * s1
    elbow[:, 2] = origin[2] + arm.link_upper * s2
    wrist = np.empty_like(elbow)
    wrist[:, 0] = elbow[:, 0] + arm.link_fore * cw * c1
    wrist[:, 1] = elbow[:, 1] + arm.link_fore * cw * s1
    wrist[:, 2] = elbow[:, 2] + arm.link_fore * sw
    return elbow, wrist


def wrist_positions(arm: ArmModel, configs: np.ndarray) -> np.ndarray:
    return wrist_elbow_positions(arm, configs)[1]


def cylindrical(p, origin) -> tuple[float, float, float]:
    """(r, theta, z) of a point about the vertical axis through origin.

    theta is 0 on the axis (r below 1e-12) rather than undefined.
    """
    p = np.asarray(p, dtype=float)
    origin = np.asarray(origin, dtype=float)
    dx, dy = p[0] - origin[0], p[1] - origin[1]
    r = math.hypot(dx, dy)
    theta = 0.0 if r < 1e-12 else math.atan2(dy, dx)
    return r, theta, float(p[2] - origin[2])


def cylindrical_many(points: np.ndarray, origin) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized cylindrical coordinates for an (n, 3) block of points."""
    pts = np.asarray(points, dtype=float)
    origin = np.asarray(origin, dtype=float)
    dx = pts[:, 0] - origin[0]
    dy = pts[:, 1] - origin[1]
    r = np.hypot(dx, dy)
    theta = np.where(r < 1e-12, 0.0, np.arctan2(dy, dx))
    return r, theta, pts[:, 2] - origin[2]


def box_point_distance(box: SceneObject, p) -> float:
    """Euclidean distance from a point to the solid box (0 inside)."""
    p = np.asarray(p, dtype=float)
    outside = np.maximum(np.abs(p - box.center) - box.half_extents, 0.0)
    return float(np.linalg.norm(outside))


def box_separations(center_a, half_a, center_b, half_b) -> np.ndarray:
    """Per-axis interval gaps between two boxes; 0 on axes where they overlap."""
    delta = np.abs(np.asarray(center_a, float) - np.asarray(center_b, float))
    gaps = delta - (np.asarray(half_a, float) + np.asarray(half_b, float))
    return np.maximum(gaps, 0.0)


def box_box_distance(center_a, half_a, center_b, half_b) -> float:
    return float(np.linalg.norm(box_separations(center_a, half_a, center_b, half_b)))


def is_below(candidate: SceneObject, object_position) -> bool:
    """True when the candidate box sits under the carried object's position.

    The candidate's top must be beneath the position and the position's x-y
    must fall inside the candidate footprint expanded by BELOW_MARGIN.
    """
    p = np.asarray(object_position, dtype=float)
    if not candidate.top < p[2]:
        return False
    within_x = abs(p[0] - candidate.center[0]) <= candidate.half_extents[0] + BELOW_MARGIN
    within_y = abs(p[1] - candidate.center[1]) <= candidate.half_extents[1] + BELOW_MARGIN
    return bool(within_x and within_y)


_SCENE_FIELDS = {
    "attributes",
    "objects",
    "manipulated_id",
    "table_height",
    "goal",
    "start_config",
    "arm",
}
_OBJECT_FIELDS = {"id", "center", "half_extents", "attributes"}
_ARM_FIELDS = {"shoulder_origin", "link_upper", "link_fore", "joint_limits"}


def scene_to_dict(scene: Scene) -> dict:
    return {
        "attributes": list(scene.attributes),
        "objects": [
            {
                "id": o.id,
                "center": o.center.tolist(),
                "half_extents": o.half_extents.tolist(),
                "attributes": o.attributes.tolist(),
            }
            for o in scene.objects
        ],
        "manipulated_id": scene.manipulated_id,
        "table_height": scene.table_height,
        "goal": scene.goal.tolist(),
        "start_config": scene.start_config.tolist(),
        "arm": {
            "shoulder_origin": scene.arm.shoulder_origin.tolist(),
            "link_upper": scene.arm.link_upper,
            "link_fore": scene.arm.link_fore,
            "joint_limits": scene.arm.joint_limits.tolist(),
        },
    }


def scene_to_json(scene: Scene) -> str:
    return json.dumps(scene_to_dict(scene))


def _reject_unknown(data: dict, allowed: set[str], what: str) -> None:
    unknown = set(data) - allowed
    if unknown:
        raise ValueError(f"unknown {what} fields: {sorted(unknown)}")


def scene_from_dict(data: dict) -> Scene:
    _reject_unknown(data, _SCENE_FIELDS, "scene")
    arm_data = data["arm"]
    _reject_unknown(arm_data, _ARM_FIELDS, "arm")
    objects = []
    for entry in data["objects"]:
        _reject_unknown(entry, _OBJECT_FIELDS, "object")
        objects.append(
            SceneObject(
                id=entry["id"],
                center=entry["center"],
                half_extents=entry["half_extents"],
                attributes=entry["attributes"],
            )
        )
    arm = ArmModel(
        shoulder_origin=arm_data["shoulder_origin"],
        link_upper=float(arm_data["link_upper"]),
        link_fore=float(arm_data["link_fore"]),
        joint_limits=arm_data["joint_limits"],
    )
    return Scene(
        attributes=tuple(data["attributes"]),
        objects=tuple(objects),
        manipulated_id=data["manipulated_id"],
        table_height=float(data["table_height"]),
        goal=data["goal"],
        start_config=data["start_config"],
        arm=arm,
    )


def scene_from_json(text: str) -> Scene:
    return scene_from_dict(json.loads(text))
