"""Comparison planners: margin-based online retraining, a task-blind
geometric planner, and a hand-coded preference ranker."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .features import FeatureVector
from .learner import WeightState, from_stacked
from .sampler import rrt_plan
from .trajectory import Trajectory
from .world import Scene


@dataclass
class MmpState:
    """Accumulated feedback-as-demonstration training set plus weights.

    Every observed feedback is treated as an optimal demonstration; each
    observation triggers a full retrain from zero with stochastic
    subgradient descent on the regularized structured hinge objective.
    """

    regularization: float = 1.0
    passes: int = 200
    n_attributes: int = 6
    demonstrations: list[np.ndarray] = field(default_factory=list)
    candidate_sets: list[np.ndarray] = field(default_factory=list)
    margins: list[np.ndarray] = field(default_factory=list)
    weights: np.ndarray | None = None
    objective_trace: list[float] = field(default_factory=list)

    def __post_init__(self):
        if not self.regularization > 0:
            raise ValueError("regularization must be positive")

    def weight_state(self) -> WeightState:
        if self.weights is None:
            raise ValueError("model has not been trained yet")
        return from_stacked(self.weights, self.n_attributes)


def _objective(state: MmpState, w: np.ndarray) -> float:
    lam = state.regularization
    total = 0.5 * lam * float(w @ w)
    hinge = 0.0
    for demo, cands, margin in zip(
        state.demonstrations, state.candidate_sets, state.margins
    ):
        violations = margin + cands @ w - float(demo @ w)
        hinge += max(0.0, float(violations.max()))
    return total + hinge / len(state.demonstrations)


@njit(cache=True)
def _sgd_block(demos, cands, margins, order, lam, w, avg, step0):
    """One block of subgradient visits; mutates w and avg in place.

    demos: (m, d); cands: (m, n, d); margins: (m, n); order: visit list.
    Written with explicit loops so the arithmetic is identical wherever
    the kernel runs.
    """
    n = cands.shape[1]
    d = cands.shape[2]
    step = step0
    for v in range(order.shape[0]):
        ex = order[v]
        step += 1
        eta = 1.0 / (lam * step)
        demo_dot = 0.0
        for c in range(d):
            demo_dot += demos[ex, c] * w[c]
        best_j = 0
        best_violation = -1e300
        for j in range(n):
            s = 0.0
            for c in range(d):
                s += cands[ex, j, c] * w[c]
            violation = margins[ex, j] + s - demo_dot
            if violation > best_violation:
                best_violation = violation
                best_j = j
        shrink = 1.0 - eta * lam
        if best_violation > 0.0:
            for c in range(d):
                w[c] = w[c] * shrink - eta * (cands[ex, best_j, c] - demos[ex, c])
        else:
            for c in range(d):
                w[c] = w[c] * shrink
        for c in range(d):
            avg[c] += w[c]
    return step


def _stacked_training_arrays(state: MmpState) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Uniform (m, n, d) arrays; ragged sets are padded with the example's
    own demonstration, whose hinge violation is exactly zero (inert)."""
    m = len(state.demonstrations)
    d = state.demonstrations[0].shape[0]
    n = max(c.shape[0] for c in state.candidate_sets)
    demos = np.stack(state.demonstrations)
    cands = np.empty((m, n, d))
    margins = np.zeros((m, n))
    for i, (cand, margin) in enumerate(zip(state.candidate_sets, state.margins)):
        k = cand.shape[0]
        cands[i, :k] = cand
        margins[i, :k] = margin
        if k < n:
            cands[i, k:] = state.demonstrations[i]
            margins[i, k:] = 0.0
    return demos, cands, margins


def mmp_observe_and_train(
    state: MmpState,
    feedback: FeatureVector,
    candidates: list[FeatureVector],
    pass_seed: int = 0,
    record_objective: bool = False,
) -> MmpState:
    """Append one feedback example and retrain from scratch.

    The loss for an example is the worst structured-hinge violation over
    its candidate set with an L2 feature-distance margin. Training runs a
    fixed number of shuffled subgradient passes with step 1/(lambda * i)
    and keeps the averaged iterate; the whole procedure is deterministic
    given the pass seed. With record_objective the objective of the
    averaged iterate is stored after every pass (costs a full evaluation
    per pass, so sessions leave it off).
    """
    demo = feedback.stacked()
    cand_matrix = np.stack([f.stacked() for f in candidates])
    margin = np.linalg.norm(cand_matrix - demo[None, :], axis=1)
    new = MmpState(
        regularization=state.regularization,
        passes=state.passes,
        n_attributes=state.n_attributes,
        demonstrations=state.demonstrations + [demo],
        candidate_sets=state.candidate_sets + [cand_matrix],
        margins=state.margins + [margin],
    )
    rng = np.random.default_rng(pass_seed)
    m = len(new.demonstrations)
    orders = np.stack([rng.permutation(m) for _ in range(new.passes)])
    demos, cands, margins = _stacked_training_arrays(new)
    dim = demos.shape[1]
    w = np.zeros(dim)
    avg = np.zeros(dim)
    lam = new.regularization
    trace = []
    if record_objective:
        step = 0
        for p in range(new.passes):
            step = _sgd_block(demos, cands, margins, orders[p], lam, w, avg, step)
            trace.append(_objective(new, avg / step))
    else:
        step = _sgd_block(demos, cands, margins, orders.reshape(-1), lam, w, avg, 0)
    new.weights = avg / step
    new.objective_trace = trace
    return new


def geometric_plan(scene: Scene, step: float = 0.3, max_nodes: int = 600) -> Trajectory:
    """Task-independent plan: one RRT query with fixed bias and seed 0.

    Falls back to successive seeds when the fixed-seed query fails so that
    cluttered scenes still yield a baseline trajectory; the fallback is
    deterministic.
    """
    for seed in range(20):
        traj = rrt_plan(scene, (), goal_bias=0.3, seed=seed, step=step, max_nodes=max_nodes)
        if traj is not None:
            return traj
    raise RuntimeError("geometric baseline could not find any plan")


def manual_weights(n_attributes: int = 6) -> WeightState:
    """Hand-coded preferences: keep clearance under the object and keep its
    tilt steady; everything else is left at zero."""
    w = WeightState(
        w_interaction=np.zeros(4 * n_attributes * n_attributes),
        w_motion=np.zeros(75),
    )
    motion = np.array(w.w_motion)
    for third in range(3):
        motion[27 + 9 * third] = 1.0       # tilt-excursion cosine per third
        motion[55 + 4 * third] = 1.0       # min support gap per third
    motion[67] = 1.0                        # mean support gap
    return WeightState(w.w_interaction, motion)


_MANUAL = manual_weights()


def manual_rank(candidates: list[FeatureVector], n_attributes: int = 6) -> list[int]:
    """Rank candidates with the fixed hand-coded weights (stable on ties)."""
    from .learner import rank

    if n_attributes == 6:
        return rank(_MANUAL, candidates)
    return rank(manual_weights(n_attributes), candidates)
