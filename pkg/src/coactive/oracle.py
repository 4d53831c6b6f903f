"""Simulated user with a hidden linear utility.

The hidden weights are drawn once per experiment and are never exposed to
learner code paths; learners see only the improved trajectories the
mechanisms below return. Every mechanism also produces a bookkeeping
record with the utility of the prediction, the feedback and the best
candidate, plus the realized informativeness and the slack against a
configured target.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .features import MOTION_LENGTH, FeatureVector, extract, interaction_length
from .learner import rank as _rank_by
from .learner import WeightState
from .trajectory import Trajectory
from .world import Scene, within_limits


@dataclass(frozen=True)
class HiddenUtility:
    w_interaction: np.ndarray
    w_motion: np.ndarray
    norm: float

    def __post_init__(self):
        wi = np.array(self.w_interaction, dtype=float)
        wm = np.array(self.w_motion, dtype=float)
        wi.setflags(write=False)
        wm.setflags(write=False)
        object.__setattr__(self, "w_interaction", wi)
        object.__setattr__(self, "w_motion", wm)


@dataclass(frozen=True)
class FeedbackRecord:
    t: int
    mechanism: str
    score_predicted: float
    score_feedback: float
    score_best: float
    alpha_realized: float
    slack: float


def hidden_utility(seed: int, n_attributes: int = 6) -> HiddenUtility:
    """Unit-norm utility with coordinates drawn uniformly from [-1, 1]."""
    rng = np.random.default_rng(seed)
    raw = rng.uniform(-1.0, 1.0, interaction_length(n_attributes) + MOTION_LENGTH)
    raw /= np.linalg.norm(raw)
    cut = interaction_length(n_attributes)
    return HiddenUtility(raw[:cut], raw[cut:], norm=1.0)


def true_score(h: HiddenUtility, f: FeatureVector) -> float:
    return float(h.w_interaction @ f.interaction + h.w_motion @ f.motion)


def account(
    h: HiddenUtility,
    t: int,
    mechanism: str,
    candidates: Sequence[FeatureVector],
    predicted: int,
    score_feedback: float,
    target_alpha: float,
) -> FeedbackRecord:
    """Finish a feedback record with informativeness and slack bookkeeping.

    The best candidate is the utility argmax within the sampled set. When
    the best-versus-predicted gap vanishes the realized informativeness is
    defined as 1.
    """
    if not 0.0 < target_alpha <= 1.0:
        raise ValueError("target_alpha must lie in (0, 1]")
    scores = [true_score(h, f) for f in candidates]
    s_pred = scores[predicted]
    s_best = max(scores)
    gap = s_best - s_pred
    gain = score_feedback - s_pred
    alpha_realized = gain / gap if gap > 1e-12 else 1.0
    slack = max(0.0, target_alpha * gap - gain)
    return FeedbackRecord(
        t=t,
        mechanism=mechanism,
        score_predicted=s_pred,
        score_feedback=score_feedback,
        score_best=s_best,
        alpha_realized=alpha_realized,
        slack=slack,
    )


def feedback_replace_top(
    h: HiddenUtility,
    ranked: Sequence[FeatureVector],
    t: int = 1,
    target_alpha: float = 1.0,
) -> tuple[int, FeedbackRecord]:
    """First candidate down the ranking that beats the top one.

    Returns the index into the ranked list (0 when nothing beats the top).
    """
    top = true_score(h, ranked[0])
    chosen = 0
    for i in range(1, len(ranked)):
        if true_score(h, ranked[i]) > top:
            chosen = i
            break
    record = account(
        h, t, "replace_top", ranked, 0, true_score(h, ranked[chosen]), target_alpha
    )
    return chosen, record


def feedback_one_from_k(
    h: HiddenUtility,
    ranked: Sequence[FeatureVector],
    k: int = 5,
    t: int = 1,
    target_alpha: float = 1.0,
) -> tuple[int, FeedbackRecord]:
    """Best candidate by hidden utility among the k top-ranked ones."""
    k = min(k, len(ranked))
    scores = [true_score(h, f) for f in ranked[:k]]
    chosen = int(np.argmax(scores))
    record = account(h, t, f"one_from_{k}", ranked, 0, scores[chosen], target_alpha)
    return chosen, record


def feedback_approx_argmax(
    h: HiddenUtility,
    candidates: Sequence[FeatureVector],
    predicted: int,
    seed: int,
    t: int = 1,
    target_alpha: float = 1.0,
) -> tuple[int, FeedbackRecord]:
    """Best of 5 randomly drawn candidates, never worse than the prediction."""
    rng = np.random.default_rng(seed)
    n = len(candidates)
    draw = rng.choice(n, size=min(5, n), replace=False)
    pool = [int(i) for i in draw]
    if predicted not in pool:
        pool.append(predicted)
    scores = [true_score(h, candidates[i]) for i in pool]
    chosen = pool[int(np.argmax(scores))]
    record = account(
        h, t, "approx_argmax", candidates, predicted, max(scores), target_alpha
    )
    return chosen, record


def feedback_noisy_click(
    h: HiddenUtility,
    ranked: Sequence[FeatureVector],
    k: int,
    epsilon: float,
    seed: int,
    t: int = 1,
    target_alpha: float = 1.0,
) -> tuple[int, FeedbackRecord]:
    """Noisy variant of the top-k click: with probability epsilon the click
    lands uniformly in the top k, which may even worsen the prediction."""
    rng = np.random.default_rng(seed)
    k = min(k, len(ranked))
    if rng.random() < epsilon:
        chosen = int(rng.integers(k))
    else:
        scores = [true_score(h, f) for f in ranked[:k]]
        chosen = int(np.argmax(scores))
    record = account(
        h, t, "noisy_click", ranked, 0, true_score(h, ranked[chosen]), target_alpha
    )
    return chosen, record


def feedback_waypoint_correction(
    h: HiddenUtility,
    scene: Scene,
    trajectory: Trajectory,
    candidates: Sequence[FeatureVector],
    predicted: int,
    proximity: float,
    t: int = 1,
    target_alpha: float = 1.0,
    delta: float = 0.1,
) -> tuple[Trajectory, FeatureVector, FeedbackRecord]:
    """Single-waypoint kinesthetic nudge.

    Tries +/-delta on each joint of every interior waypoint and keeps the
    one collision-free edit with the best hidden utility; falls back to the
    unmodified trajectory when no edit improves it.
    """
    from .sampler import collision_free  # local import to avoid a cycle

    base = trajectory.waypoints
    best_traj = trajectory
    best_feat = extract(scene, trajectory, proximity)
    best_score = true_score(h, best_feat)
    limits = scene.arm.joint_limits
    for j in range(1, base.shape[0] - 1):
        for joint in range(4):
            for sign in (1.0, -1.0):
                q = base[j].copy()
                q[joint] += sign * delta
                if not (limits[joint, 0] <= q[joint] <= limits[joint, 1]):
                    continue
                edited = base.copy()
                edited[j] = q
                cand = Trajectory(edited)
                feat = extract(scene, cand, proximity)
                s = true_score(h, feat)
                if s > best_score and collision_free(scene, cand):
                    best_traj, best_feat, best_score = cand, feat, s
    record = account(
        h, t, "waypoint", candidates, predicted, best_score, target_alpha
    )
    return best_traj, best_feat, record


def rank_by_utility(h: HiddenUtility, candidates: Sequence[FeatureVector]) -> list[int]:
    """Candidate indices ordered by the hidden utility (internal tooling)."""
    w = WeightState(h.w_interaction, h.w_motion)
    return _rank_by(w, candidates)
