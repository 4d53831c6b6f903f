"""Server-held learning sessions driven by human feedback.

Each session owns a scene, the evolving weights, the current ranked
candidate set and an append-only event list. Mutations are serialized
through a per-session lock; event entries carry no timestamps so a
session's log depends only on the scene and the sequence of actions.
"""
from __future__ import annotations

import math
import threading
import uuid
from dataclasses import dataclass, field

import numpy as np

from ..features import FeatureVector, extract, feature_layout
from ..harness.scenarios import generate_scenario
from ..harness.session import weight_hash
from ..learner import WeightState, perceptron_update, rank, score, zero_weights
from ..sampler import SamplerConfig, collision_free, sample_diverse
from ..trajectory import Trajectory, object_track
from ..world import Scene, scene_from_dict, scene_to_dict, wrist_positions

_LIVE_STREAM = 0x11FE

IK_ITERATIONS = 200
IK_TOLERANCE = 0.02


class SessionNotFound(KeyError):
    pass


class EditRejected(RuntimeError):
    pass


class BadRequest(ValueError):
    pass


def solve_wrist_ik(
    arm, q_init: np.ndarray, target: np.ndarray, iterations: int = IK_ITERATIONS
) -> tuple[np.ndarray, float]:
    """Coordinate descent on the four joints toward a wrist target.

    Deterministic: sweeps joints in order with per-joint steps that halve
    whenever a full sweep yields no improvement.
    """
    limits = arm.joint_limits
    q = np.array(q_init, dtype=float)

    def residual(conf: np.ndarray) -> float:
        wrist = wrist_positions(arm, conf[None, :])[0]
        return float(np.linalg.norm(wrist - target))

    err = residual(q)
    steps = np.array([0.4, 0.4, 0.4, 0.4])
    for _ in range(iterations):
        improved = False
        for j in range(4):
            for sign in (1.0, -1.0):
                cand = q.copy()
                cand[j] = float(np.clip(q[j] + sign * steps[j], limits[j, 0], limits[j, 1]))
                if cand[j] == q[j]:
                    continue
                e = residual(cand)
                if e < err - 1e-12:
                    q, err = cand, e
                    improved = True
                    break
        if not improved:
            steps *= 0.5
            if float(steps.max()) < 1e-6:
                break
    return q, err


@dataclass
class LiveSession:
    id: str
    scene: Scene
    seed: int
    k: int
    n_candidates: int
    weights: WeightState
    iteration: int = 1
    trajectories: list[Trajectory] = field(default_factory=list)
    features: list[FeatureVector] = field(default_factory=list)
    events: list[dict] = field(default_factory=list)
    lock: threading.Lock = field(default_factory=threading.Lock)

    def ranked(self) -> list[int]:
        # always a fresh ranking over the stored candidates
        return rank(self.weights, self.features)


class SessionManager:
    def __init__(self, proximity: float = 0.10):
        self._sessions: dict[str, LiveSession] = {}
        self._registry_lock = threading.Lock()
        self.proximity = proximity
        self.manifest = feature_layout(("heavy", "fragile", "sharp", "hot", "liquid", "electronic"))

    def _candidate_seed(self, session: LiveSession, iteration: int) -> int:
        rng = np.random.default_rng([session.seed, _LIVE_STREAM, iteration])
        return int(rng.integers(2**63))

    def _resample(self, session: LiveSession) -> None:
        cfg = SamplerConfig(
            n_candidates=session.n_candidates,
            rng_seed=self._candidate_seed(session, session.iteration),
        )
        session.trajectories = sample_diverse(session.scene, cfg)
        session.features = [
            extract(session.scene, t, self.proximity) for t in session.trajectories
        ]

    def create(
        self,
        scenario_seed: int | None,
        family: str,
        scene_data: dict | None,
        seed: int,
        k: int,
        n_candidates: int,
    ) -> LiveSession:
        if scene_data is not None:
            scene = scene_from_dict(scene_data)
        else:
            scene = generate_scenario(family, scenario_seed if scenario_seed is not None else seed)
        n_attr = len(scene.attributes)
        session = LiveSession(
            id=uuid.uuid4().hex,
            scene=scene,
            seed=seed,
            k=k,
            n_candidates=n_candidates,
            weights=zero_weights(n_attr),
        )
        self._resample(session)
        session.events.append(
            {
                "event": "created",
                "scenario_seed": scenario_seed,
                "family": family if scene_data is None else None,
                "seed": seed,
                "k": k,
                "candidates": n_candidates,
                "weight_hash": weight_hash(session.weights),
            }
        )
        with self._registry_lock:
            self._sessions[session.id] = session
        return session

    def get(self, session_id: str) -> LiveSession:
        with self._registry_lock:
            if session_id not in self._sessions:
                raise SessionNotFound(session_id)
            return self._sessions[session_id]

    def rerank(self, session_id: str, clicked_rank: int) -> tuple[LiveSession, dict]:
        session = self.get(session_id)
        with session.lock:
            if not 1 <= clicked_rank <= min(session.k, len(session.features)):
                raise BadRequest(f"rank must be in 1..{session.k}")
            ranked = session.ranked()
            predicted = ranked[0]
            chosen = ranked[clicked_rank - 1]
            before = session.weights
            session.weights = perceptron_update(
                session.weights, session.features[predicted], session.features[chosen]
            )
            delta = float(
                np.linalg.norm(session.weights.stacked() - before.stacked())
            )
            t = session.iteration
            session.iteration += 1
            self._resample(session)
            event = {
                "event": "rerank",
                "t": t,
                "clicked_rank": clicked_rank,
                "predicted": predicted,
                "feedback_index": chosen,
                "weight_delta_norm": delta,
                "weight_hash": weight_hash(session.weights),
            }
            session.events.append(event)
            return session, event

    def edit(
        self, session_id: str, waypoint_index: int, target: list[float]
    ) -> tuple[LiveSession, dict]:
        session = self.get(session_id)
        with session.lock:
            ranked = session.ranked()
            predicted = ranked[0]
            top = session.trajectories[predicted]
            if not 1 <= waypoint_index <= len(top) - 2:
                raise BadRequest("waypoint index must be interior")
            goal = np.asarray(target, dtype=float)
            if goal.shape != (3,):
                raise BadRequest("target must be a 3-vector")
            q, residual = solve_wrist_ik(
                session.scene.arm, top.waypoints[waypoint_index], goal
            )
            if residual >= IK_TOLERANCE:
                raise EditRejected(f"wrist target unreachable (residual {residual:.3f} m)")
            edited = top.waypoints.copy()
            edited[waypoint_index] = q
            candidate = Trajectory(edited)
            if not collision_free(session.scene, candidate):
                raise EditRejected("edited trajectory collides")
            feat = extract(session.scene, candidate, self.proximity)
            before = session.weights
            session.weights = perceptron_update(
                session.weights, session.features[predicted], feat
            )
            delta = float(
                np.linalg.norm(session.weights.stacked() - before.stacked())
            )
            t = session.iteration
            session.iteration += 1
            self._resample(session)
            event = {
                "event": "edit",
                "t": t,
                "waypoint": waypoint_index,
                "target": [float(v) for v in goal],
                "residual": residual,
                "predicted": predicted,
                "weight_delta_norm": delta,
                "weight_hash": weight_hash(session.weights),
            }
            session.events.append(event)
            return session, event

    def top_view(self, session: LiveSession) -> list[dict]:
        ranked = session.ranked()
        out = []
        for position, idx in enumerate(ranked[: session.k], start=1):
            traj = session.trajectories[idx]
            track = object_track(session.scene, traj)
            out.append(
                {
                    "rank": position,
                    "index": idx,
                    "score": score(session.weights, session.features[idx]),
                    "waypoints": traj.waypoints.tolist(),
                    "wrist": track.positions.tolist(),
                    "deviation": track.deviations.tolist(),
                }
            )
        return out

    def payload(self, session: LiveSession) -> dict:
        return {
            "session_id": session.id,
            "iteration": session.iteration,
            "scene": scene_to_dict(session.scene),
            "top": self.top_view(session),
            "weight_hash": weight_hash(session.weights),
        }

    def state(self, session: LiveSession) -> dict:
        return {
            "session_id": session.id,
            "iteration": session.iteration,
            "weight_hash": weight_hash(session.weights),
            "weights": {
                "interaction": session.weights.w_interaction.tolist(),
                "motion": session.weights.w_motion.tolist(),
            },
            "history": list(session.events),
            "manifest": self.manifest,
            "top": self.top_view(session),
            "scene": scene_to_dict(session.scene),
        }
