import math
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from coactive.world import ArmModel, Scene, SceneObject, DEFAULT_ATTRIBUTES
from coactive.trajectory import Trajectory


WIDE_LIMITS = (
    (-math.pi, math.pi),
    (-math.pi / 2, math.pi / 2),
    (-2.8, 2.8),
    (-2.8, 2.8),
)


@pytest.fixture
def unit_arm():
    return ArmModel(
        shoulder_origin=(0.0, 0.0, 1.0),
        link_upper=1.0,
        link_fore=1.0,
        joint_limits=WIDE_LIMITS,
    )


def make_object(oid, center, half=(0.05, 0.05, 0.05), attrs=None, m=6):
    vec = np.zeros(m, dtype=np.int8)
    for a in attrs or []:
        vec[DEFAULT_ATTRIBUTES.index(a)] = 1
    return SceneObject(id=oid, center=center, half_extents=half, attributes=vec)


def make_scene(objects=(), carried_attrs=("liquid",), goal=(0.5, 0.5, 0.3),
               start=(0.0, 0.3, -0.6, 0.3), carried_half=(0.04, 0.04, 0.05)):
    arm = ArmModel(
        shoulder_origin=(0.0, 0.0, 0.45),
        link_upper=0.5,
        link_fore=0.5,
        joint_limits=((-math.pi, math.pi), (-1.4, 1.6), (-2.6, 2.6), (-2.2, 2.2)),
    )
    carried = make_object("carried", (0.4, 0.0, 0.3), carried_half, carried_attrs)
    return Scene(
        attributes=DEFAULT_ATTRIBUTES,
        objects=(carried, *objects),
        manipulated_id="carried",
        table_height=0.0,
        goal=goal,
        start_config=start,
        arm=arm,
    )


@pytest.fixture
def simple_scene():
    return make_scene(
        objects=(
            make_object("laptop", (0.25, 0.35, 0.05), (0.10, 0.08, 0.05), ["electronic"]),
            make_object("vase", (-0.3, 0.4, 0.12), (0.06, 0.06, 0.12), ["fragile"]),
        )
    )


def random_toy_scene(rng, n_objects=None):
    """Small random scene plus a random in-limits trajectory; the pair is
    only meant for feature extraction, not for planning."""
    m = 6
    n_objects = n_objects if n_objects is not None else int(rng.integers(1, 5))
    objects = []
    for i in range(n_objects):
        center = rng.uniform((-0.8, -0.8, 0.03), (0.8, 0.8, 0.5))
        half = rng.uniform((0.03, 0.03, 0.03), (0.15, 0.15, 0.15))
        attrs = (rng.random(m) < 0.4).astype(np.int8)
        objects.append(
            SceneObject(id=f"o{i}", center=center, half_extents=half, attributes=attrs)
        )
    carried_attrs = (rng.random(m) < 0.5).astype(np.int8)
    if not carried_attrs.any():
        carried_attrs[int(rng.integers(m))] = 1
    base = make_scene()
    carried = SceneObject(
        id="carried",
        center=(0.4, 0.0, 0.3),
        half_extents=rng.uniform((0.02, 0.02, 0.02), (0.06, 0.06, 0.06)),
        attributes=carried_attrs,
    )
    scene = Scene(
        attributes=base.attributes,
        objects=(carried, *objects),
        manipulated_id="carried",
        table_height=0.0,
        goal=rng.uniform((-0.5, -0.5, 0.1), (0.5, 0.5, 0.5)),
        start_config=(0.0, 0.3, -0.6, 0.3),
        arm=base.arm,
    )
    n = int(rng.integers(3, 40))
    limits = np.array(scene.arm.joint_limits)
    waypoints = rng.uniform(limits[:, 0], limits[:, 1], size=(n, 4))
    return scene, Trajectory(waypoints)
