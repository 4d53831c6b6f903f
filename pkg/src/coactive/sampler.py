"""Diverse candidate-trajectory generation with a joint-space RRT.

Collision model: the carried object's box rides at the wrist and must not
intersect any obstacle box nor dip below the table plane; configurations
along every edge are checked at a joint-space resolution of one step.
Planning failures are values (None), not exceptions, so callers can
retry; only a whole diversity sweep coming up nearly empty raises.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .trajectory import DEFAULT_WAYPOINTS, Trajectory, resample
from .world import ArmModel, Scene, within_limits, wrist_positions

GOAL_TOLERANCE = 0.05

BoxLike = tuple[np.ndarray, np.ndarray]  # (center, half_extents)


class SamplerError(RuntimeError):
    """Raised when a diversity sweep cannot produce at least two trajectories."""


@dataclass(frozen=True)
class SamplerConfig:
    n_candidates: int = 50
    rrt_step: float = 0.3
    goal_bias_range: tuple[float, float] = (0.1, 0.6)
    max_rrt_nodes: int = 600
    blocking_radius: float = 0.08
    rng_seed: int = 0
    blocking_probability: float = 0.5

    def __post_init__(self):
        lo, hi = self.goal_bias_range
        if not (0.0 < lo < hi < 1.0):
            raise ValueError("goal_bias_range must satisfy 0 < lo < hi < 1")
        if self.n_candidates < 2:
            raise ValueError("need at least 2 candidates")


def _obstacle_arrays(
    scene: Scene, extra_obstacles: tuple[BoxLike, ...] | list[BoxLike]
) -> tuple[np.ndarray, np.ndarray]:
    centers = [o.center for o in scene.obstacles]
    halves = [o.half_extents for o in scene.obstacles]
    for center, half in extra_obstacles:
        centers.append(np.asarray(center, dtype=float))
        halves.append(np.asarray(half, dtype=float))
    if not centers:
        return np.zeros((0, 3)), np.zeros((0, 3))
    return np.stack(centers), np.stack(halves)


def _configs_free(
    arm: ArmModel,
    carried_half: np.ndarray,
    table_height: float,
    obs_centers: np.ndarray,
    obs_halves: np.ndarray,
    configs: np.ndarray,
) -> bool:
    """True when every configuration keeps the carried box clear."""
    wrist = wrist_positions(arm, configs)
    if np.any(wrist[:, 2] - carried_half[2] < table_height):
        return False
    if obs_centers.shape[0]:
        delta = np.abs(wrist[:, None, :] - obs_centers[None, :, :])
        overlap = np.all(
            delta < obs_halves[None, :, :] + carried_half[None, None, :], axis=2
        )
        if np.any(overlap):
            return False
    return True


def _interpolated_configs(waypoints: np.ndarray, step: float) -> np.ndarray:
    """All waypoints plus interior points so consecutive checked
    configurations sit at most `step` apart in joint space."""
    deltas = waypoints[1:] - waypoints[:-1]
    longest = float(np.sqrt((deltas * deltas).sum(axis=1)).max()) if len(deltas) else 0.0
    m = max(1, int(math.ceil(longest / step)))
    alphas = np.arange(1, m + 1) / m
    interior = waypoints[:-1, None, :] + alphas[None, :, None] * deltas[:, None, :]
    return np.concatenate([waypoints[0:1], interior.reshape(-1, 4)], axis=0)


def collision_free(
    scene: Scene,
    trajectory: Trajectory,
    extra_obstacles: tuple[BoxLike, ...] | list[BoxLike] = (),
    step: float = 0.3,
) -> bool:
    """Check a whole trajectory at joint-space resolution `step`."""
    obs_centers, obs_halves = _obstacle_arrays(scene, tuple(extra_obstacles))
    carried = scene.manipulated.half_extents
    configs = _interpolated_configs(trajectory.waypoints, step)
    if not within_limits_block(scene.arm, configs):
        return False
    return _configs_free(
        scene.arm, carried, scene.table_height, obs_centers, obs_halves, configs
    )


def within_limits_block(arm: ArmModel, configs: np.ndarray) -> bool:
    lim = arm.joint_limits
    return bool(
        np.all(configs >= lim[None, :, 0]) and np.all(configs <= lim[None, :, 1])
    )


def wrist_ik(arm: ArmModel, target) -> list[np.ndarray]:
    """Analytic wrist-position IK: up to two (q1, q2, q3) solutions inside
    the joint limits; q4 is free and returned as 0."""
    target = np.asarray(target, dtype=float)
    d = target - arm.shoulder_origin
    rho = math.hypot(d[0], d[1])
    q1 = 0.0 if rho < 1e-12 else math.atan2(d[1], d[0])
    l1, l2 = arm.link_upper, arm.link_fore
    cos_elbow = (rho * rho + d[2] * d[2] - l1 * l1 - l2 * l2) / (2.0 * l1 * l2)
    if not -1.0 <= cos_elbow <= 1.0:
        return []
    solutions = []
    base_pitch = math.atan2(d[2], rho)
    for q3 in (math.acos(cos_elbow), -math.acos(cos_elbow)):
        q2 = base_pitch - math.atan2(l2 * math.sin(q3), l1 + l2 * math.cos(q3))
        q = np.array([q1, q2, q3, 0.0])
        if within_limits(arm, q):
            solutions.append(q)
    return solutions


def rrt_plan(
    scene: Scene,
    extra_obstacles: tuple[BoxLike, ...] | list[BoxLike] = (),
    goal_bias: float = 0.3,
    seed: int = 0,
    step: float = 0.3,
    max_nodes: int = 600,
    n_waypoints: int = DEFAULT_WAYPOINTS,
) -> Trajectory | None:
    """Single RRT query from the scene's start posture to the goal region.

    Success returns the tree path resampled to the canonical waypoint
    count, re-validated at `step` resolution, with the wrist of the final
    waypoint within GOAL_TOLERANCE of the goal. Returns None on budget
    exhaustion or when the start itself is blocked. Deterministic per seed.
    """
    rng = np.random.default_rng(seed)
    arm = scene.arm
    carried = scene.manipulated.half_extents
    obs_centers, obs_halves = _obstacle_arrays(scene, tuple(extra_obstacles))
    start = np.array(scene.start_config, dtype=float)
    if not _configs_free(
        arm, carried, scene.table_height, obs_centers, obs_halves, start[None, :]
    ):
        return None
    goal_configs = wrist_ik(arm, scene.goal)
    limits = arm.joint_limits
    lim_lo = limits[:, 0].copy()
    lim_span = (limits[:, 1] - limits[:, 0]).copy()

    # scalar copies for the per-extension hot path
    ox, oy, oz = (float(v) for v in arm.shoulder_origin)
    l1, l2 = arm.link_upper, arm.link_fore
    chx, chy, chz = (float(v) for v in carried)
    floor_z = scene.table_height + chz
    gx, gy, gz = (float(v) for v in scene.goal)
    boxes = [
        (
            float(c[0]), float(c[1]), float(c[2]),
            float(h[0]) + chx, float(h[1]) + chy, float(h[2]) + chz,
        )
        for c, h in zip(obs_centers, obs_halves)
    ]
    goal_tol_sq = GOAL_TOLERANCE * GOAL_TOLERANCE
    cos, sin = math.cos, math.sin

    def wrist_of(q1: float, q2: float, q3: float) -> tuple[float, float, float]:
        c1, s1 = cos(q1), sin(q1)
        radial = l1 * cos(q2) + l2 * cos(q2 + q3)
        return (
            ox + radial * c1,
            oy + radial * s1,
            oz + l1 * sin(q2) + l2 * sin(q2 + q3),
        )

    def wrist_free(wx: float, wy: float, wz: float) -> bool:
        if wz < floor_z:
            return False
        for bx, by, bz, hx, hy, hz in boxes:
            if abs(wx - bx) < hx and abs(wy - by) < hy and abs(wz - bz) < hz:
                return False
        return True

    nodes = np.empty((max_nodes, 4))
    parents = np.empty(max_nodes, dtype=np.int64)
    nodes[0] = start
    parents[0] = -1
    count = 1

    def extract_path(idx: int) -> Trajectory | None:
        chain = []
        while idx >= 0:
            chain.append(nodes[idx])
            idx = int(parents[idx])
        path = np.array(chain[::-1])
        if path.shape[0] < 2:
            path = np.vstack([path, path[-1]])
        traj = resample(Trajectory(path), n_waypoints)
        if not collision_free(scene, traj, extra_obstacles, step):
            return None
        return traj

    swx, swy, swz = wrist_of(start[0], start[1], start[2])
    if (swx - gx) ** 2 + (swy - gy) ** 2 + (swz - gz) ** 2 <= goal_tol_sq:
        return extract_path(0)

    n_goal = len(goal_configs)
    while count < max_nodes:
        coin = rng.random(6)
        if n_goal and coin[0] < goal_bias:
            pick = goal_configs[0 if n_goal == 1 or coin[1] < 0.5 else 1]
            t0, t1, t2 = pick[0], pick[1], pick[2]
            t3 = lim_lo[3] + coin[2] * lim_span[3]
        else:
            t0 = lim_lo[0] + coin[2] * lim_span[0]
            t1 = lim_lo[1] + coin[3] * lim_span[1]
            t2 = lim_lo[2] + coin[4] * lim_span[2]
            t3 = lim_lo[3] + coin[5] * lim_span[3]
        live = nodes[:count]
        d0 = live[:, 0] - t0
        d1 = live[:, 1] - t1
        d2 = live[:, 2] - t2
        d3 = live[:, 3] - t3
        nearest = int(np.argmin(d0 * d0 + d1 * d1 + d2 * d2 + d3 * d3))
        nx0, nx1, nx2, nx3 = nodes[nearest]
        dq0, dq1, dq2, dq3 = t0 - nx0, t1 - nx1, t2 - nx2, t3 - nx3
        dist = math.sqrt(dq0 * dq0 + dq1 * dq1 + dq2 * dq2 + dq3 * dq3)
        if dist < 1e-9:
            continue
        scale = min(1.0, step / dist)
        q0 = nx0 + dq0 * scale
        q1 = nx1 + dq1 * scale
        q2 = nx2 + dq2 * scale
        q3 = nx3 + dq3 * scale
        wx, wy, wz = wrist_of(q0, q1, q2)
        if not wrist_free(wx, wy, wz):
            continue
        nodes[count, 0] = q0
        nodes[count, 1] = q1
        nodes[count, 2] = q2
        nodes[count, 3] = q3
        parents[count] = nearest
        count += 1
        if (wx - gx) ** 2 + (wy - gy) ** 2 + (wz - gz) ** 2 <= goal_tol_sq:
            traj = extract_path(count - 1)
            if traj is not None:
                return traj
    return None


def sample_diverse(scene: Scene, cfg: SamplerConfig) -> list[Trajectory]:
    """Up to n_candidates distinct trajectories for one context.

    Each attempt draws a goal bias uniformly from the configured range and,
    with the configured probability, blocks the wrist position of a random
    interior waypoint of one already accepted trajectory with a virtual
    cube, which pushes later queries onto different homotopy classes. The
    result is a pure function of (scene, cfg).
    """
    rng = np.random.default_rng(cfg.rng_seed)
    accepted: list[Trajectory] = []
    attempts = 0
    max_attempts = 5 * cfg.n_candidates
    lo, hi = cfg.goal_bias_range
    block_half = np.full(3, cfg.blocking_radius)
    while len(accepted) < cfg.n_candidates and attempts < max_attempts:
        attempts += 1
        goal_bias = float(rng.uniform(lo, hi))
        extra: list[BoxLike] = []
        if accepted and rng.random() < cfg.blocking_probability:
            which = int(rng.integers(len(accepted)))
            base = accepted[which].waypoints
            inner = int(rng.integers(1, base.shape[0] - 1))
            center = wrist_positions(scene.arm, base[inner : inner + 1])[0]
            extra.append((center, block_half))
        seed = int(rng.integers(2**63))
        traj = rrt_plan(
            scene,
            tuple(extra),
            goal_bias,
            seed,
            step=cfg.rrt_step,
            max_nodes=cfg.max_rrt_nodes,
        )
        if traj is None:
            continue
        duplicate = any(
            float(np.max(np.abs(traj.waypoints - prev.waypoints))) < 1e-6
            for prev in accepted
        )
        if duplicate:
            continue
        accepted.append(traj)
    if len(accepted) < 2:
        raise SamplerError(
            f"only {len(accepted)} trajectories after {attempts} attempts"
        )
    return accepted
