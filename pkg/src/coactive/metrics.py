"""Regret, the perceptron regret bound, and ranking quality metrics."""
from __future__ import annotations

import math
from typing import Iterable, Sequence

import numpy as np

from .features import FeatureVector
from .oracle import FeedbackRecord, HiddenUtility, true_score


def regret(records: Sequence[FeedbackRecord]) -> float:
    """Average best-minus-predicted utility gap over the recorded rounds."""
    if not records:
        raise ValueError("regret needs at least one record")
    return float(
        sum(r.score_best - r.score_predicted for r in records) / len(records)
    )


def regret_bound(
    feature_bound: float,
    utility_norm: float,
    alpha: float,
    slacks: Sequence[float],
    rounds: int,
) -> float:
    """Upper bound on average regret under alpha-informative feedback:
    2*C*|w|/(alpha*sqrt(T)) plus the slack average divided by alpha."""
    if rounds < 1:
        raise ValueError("rounds must be positive")
    if not 0.0 < alpha <= 1.0:
        raise ValueError("alpha must lie in (0, 1]")
    return (
        2.0 * feature_bound * utility_norm / (alpha * math.sqrt(rounds))
        + sum(slacks) / (alpha * rounds)
    )


def feature_norm_bound(candidate_sets: Iterable[Sequence[FeatureVector]]) -> float:
    """Largest stacked feature norm observed across candidate sets."""
    best = 0.0
    for candidates in candidate_sets:
        for f in candidates:
            best = max(best, float(np.linalg.norm(f.stacked())))
    return best


def ndcg_at_k(labels_in_ranked_order: Sequence[float], k: int) -> float:
    """Normalized discounted cumulative gain of a ranked label list.

    Position i (1-based) contributes label/log2(i+1); the ideal ordering
    ranks labels in descending order. Labels must be positive.
    """
    labels = list(labels_in_ranked_order)
    if not 1 <= k <= len(labels):
        raise ValueError("k must satisfy 1 <= k <= len(labels)")
    if any(l <= 0 for l in labels):
        raise ValueError("labels must be positive")
    discounts = [1.0 / math.log2(i + 1) for i in range(1, k + 1)]
    dcg = sum(l * d for l, d in zip(labels[:k], discounts))
    ideal = sorted(labels, reverse=True)
    idcg = sum(l * d for l, d in zip(ideal[:k], discounts))
    return dcg / idcg


def likert_labels(
    h: HiddenUtility, candidates: Sequence[FeatureVector]
) -> list[int]:
    """Simulated 1..5 quality grades: utility quintiles over the set.

    The top quintile maps to 5. Equal utilities share the lowest label any
    of them would get, so a constant set grades all 1.
    """
    scores = np.array([true_score(h, f) for f in candidates])
    n = scores.size
    order = np.argsort(scores, kind="stable")
    ranks = np.empty(n, dtype=int)
    ranks[order] = np.arange(n)
    labels = (ranks * 5) // n + 1
    for value in np.unique(scores):
        tied = scores == value
        labels[tied] = labels[tied].min()
    return [int(l) for l in labels]


def rolling_mean(values: Sequence[float], window: int) -> list[float]:
    """Trailing mean over up to `window` latest values at each position."""
    out = []
    acc = 0.0
    vals = list(values)
    for i, v in enumerate(vals):
        acc += v
        if i >= window:
            acc -= vals[i - window]
        out.append(acc / min(i + 1, window))
    return out


def iterations_to_reach(
    values: Sequence[float], threshold: float, window: int = 10
) -> int:
    """First 1-based round where the trailing mean clears the threshold;
    len(values) + 1 when it never does."""
    smoothed = rolling_mean(values, window)
    for i, v in enumerate(smoothed):
        if v >= threshold:
            return i + 1
    return len(values) + 1
