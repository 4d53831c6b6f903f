"""Linear scoring, ranking and the preference-perceptron update.

The learner keeps one weight vector per feature block. Ranking sorts a
candidate set by score; the update moves the weights by the feature
difference between the user's improved trajectory and the prediction,
with no learning rate and no projection.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .features import MOTION_LENGTH, FeatureVector, interaction_length


@dataclass(frozen=True)
class WeightState:
    w_interaction: np.ndarray
    w_motion: np.ndarray
    iteration: int = 1

    def __post_init__(self):
        wi = np.array(self.w_interaction, dtype=float)
        wm = np.array(self.w_motion, dtype=float)
        if wm.shape != (MOTION_LENGTH,):
            raise ValueError(f"motion weights must have length {MOTION_LENGTH}")
        if wi.ndim != 1 or wi.size % 4 != 0:
            raise ValueError("interaction weight length must be a multiple of 4")
        if not (np.all(np.isfinite(wi)) and np.all(np.isfinite(wm))):
            raise ValueError("weights must be finite")
        wi.setflags(write=False)
        wm.setflags(write=False)
        object.__setattr__(self, "w_interaction", wi)
        object.__setattr__(self, "w_motion", wm)

    def stacked(self) -> np.ndarray:
        return np.concatenate([self.w_interaction, self.w_motion])


def zero_weights(n_attributes: int = 6) -> WeightState:
    return WeightState(
        w_interaction=np.zeros(interaction_length(n_attributes)),
        w_motion=np.zeros(MOTION_LENGTH),
        iteration=1,
    )


def from_stacked(v: np.ndarray, n_attributes: int = 6, iteration: int = 1) -> WeightState:
    v = np.asarray(v, dtype=float)
    cut = interaction_length(n_attributes)
    if v.shape != (cut + MOTION_LENGTH,):
        raise ValueError("stacked weight length does not match the feature layout")
    return WeightState(v[:cut], v[cut:], iteration)


def score(w: WeightState, f: FeatureVector) -> float:
    if w.w_interaction.shape != f.interaction.shape:
        raise ValueError("interaction layout mismatch between weights and features")
    return float(w.w_interaction @ f.interaction + w.w_motion @ f.motion)


def rank(w: WeightState, candidates: Sequence[FeatureVector]) -> list[int]:
    """Candidate indices in descending score order; ties keep insertion order.

    Index 0 of the result is the learner's prediction.
    """
    if len(candidates) == 0:
        raise ValueError("cannot rank an empty candidate set")
    scores = np.array([score(w, f) for f in candidates])
    # stable sort on negated scores preserves insertion order among ties
    return [int(i) for i in np.argsort(-scores, kind="stable")]


def perceptron_update(
    w: WeightState, f_predicted: FeatureVector, f_feedback: FeatureVector
) -> WeightState:
    """Move weights by the feedback-minus-prediction feature difference."""
    if w.w_interaction.shape != f_predicted.interaction.shape or (
        f_predicted.interaction.shape != f_feedback.interaction.shape
    ):
        raise ValueError("interaction layout mismatch")
    return WeightState(
        w_interaction=w.w_interaction + (f_feedback.interaction - f_predicted.interaction),
        w_motion=w.w_motion + (f_feedback.motion - f_predicted.motion),
        iteration=w.iteration + 1,
    )
