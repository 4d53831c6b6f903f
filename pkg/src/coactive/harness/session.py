"""Experiment sessions: the online learning loop, event log and replay.

A session is a pure function of its configuration. Every source of
randomness is drawn from streams derived from the config seed and written
to an append-only JSON-lines event log, so `replay_session` can rebuild
each iteration from the stored seeds and feedback decisions (no fresh
planning decisions) and must reproduce every weight hash and the metrics
CSV byte for byte.
"""
from __future__ import annotations

import hashlib
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..baselines import MmpState, geometric_plan, manual_rank, mmp_observe_and_train
from ..features import FeatureVector, extract
from ..learner import WeightState, perceptron_update, rank, zero_weights
from ..metrics import (
    feature_norm_bound,
    likert_labels,
    ndcg_at_k,
    regret,
    regret_bound,
)
from ..oracle import (
    FeedbackRecord,
    HiddenUtility,
    account,
    feedback_approx_argmax,
    feedback_noisy_click,
    feedback_one_from_k,
    feedback_replace_top,
    feedback_waypoint_correction,
    hidden_utility,
    true_score,
)
from ..sampler import SamplerConfig, sample_diverse
from ..trajectory import Trajectory
from ..world import Scene
from .config import ExperimentConfig, config_from_dict, config_to_dict
from .scenarios import generalization_pair, generate_scenario

MMP_LAMBDA_GRID = (0.01, 0.1, 1.0, 10.0)

_SCENARIO_STREAM = 0x5CE
_UTILITY_STREAM = 0x07E
_CANDIDATE_STREAM = 0xCA4
_ORACLE_STREAM = 0x0AC
_PASS_STREAM = 0x9A5

CSV_HEADER = "t,regret,bound,ndcg1,ndcg3,alpha_t,xi_t"


class ReplayError(RuntimeError):
    """A replayed log disagreed with what the log recorded."""


@dataclass
class SessionResult:
    config: ExperimentConfig
    records: list[FeedbackRecord]
    rows: list[dict]
    csv_text: str
    log_lines: list[str]
    final_weights: WeightState
    feature_bound: float
    csv_path: str | None = None
    log_path: str | None = None

    def regrets(self) -> list[float]:
        return [row["regret"] for row in self.rows]

    def ndcg1_series(self) -> list[float]:
        return [row["ndcg1"] for row in self.rows]

    def ndcg3_series(self) -> list[float]:
        return [row["ndcg3"] for row in self.rows]


def weight_hash(w: WeightState) -> str:
    digest = hashlib.sha256()
    digest.update(w.w_interaction.tobytes())
    digest.update(w.w_motion.tobytes())
    return digest.hexdigest()


def _sampler_config(cfg: ExperimentConfig, seed: int) -> SamplerConfig:
    return SamplerConfig(
        n_candidates=cfg.candidates,
        rrt_step=cfg.rrt_step,
        goal_bias_range=(cfg.goal_bias_lo, cfg.goal_bias_hi),
        max_rrt_nodes=cfg.max_rrt_nodes,
        blocking_radius=cfg.blocking_radius,
        rng_seed=seed,
        blocking_probability=cfg.blocking_probability,
    )


def _session_seeds(cfg: ExperimentConfig) -> dict:
    scen = np.random.default_rng([cfg.seed, _SCENARIO_STREAM])
    util = np.random.default_rng([cfg.seed, _UTILITY_STREAM])
    cand = np.random.default_rng([cfg.seed, _CANDIDATE_STREAM])
    orac = np.random.default_rng([cfg.seed, _ORACLE_STREAM])
    pas = np.random.default_rng([cfg.seed, _PASS_STREAM])
    return {
        "scenario_seeds": [int(s) for s in scen.integers(2**32, size=cfg.tasks)],
        "utility_seed": int(util.integers(2**32)),
        "candidate_seeds": [int(s) for s in cand.integers(2**63, size=cfg.iterations)],
        "oracle_seeds": [int(s) for s in orac.integers(2**63, size=cfg.iterations)],
        "pass_seeds": [int(s) for s in pas.integers(2**63, size=cfg.iterations)],
    }


def _format_row(row: dict) -> str:
    return (
        f"{row['t']},{row['regret']!r},{row['bound']!r},{row['ndcg1']!r},"
        f"{row['ndcg3']!r},{row['alpha_t']!r},{row['xi_t']!r}"
    )


def _rows_to_csv(rows: list[dict]) -> str:
    return "\n".join([CSV_HEADER] + [_format_row(r) for r in rows]) + "\n"


def _give_feedback(
    cfg: ExperimentConfig,
    h: HiddenUtility,
    t: int,
    scene: Scene,
    trajectories: list[Trajectory],
    feats: list[FeatureVector],
    ranked: list[int],
    oracle_seed: int,
) -> tuple[FeatureVector, dict, FeedbackRecord]:
    """Run the configured mechanism; returns the feedback features, the
    loggable decision, and the bookkeeping record."""
    predicted = ranked[0]
    alpha = cfg.target_alpha
    ranked_feats = [feats[i] for i in ranked]
    if cfg.feedback == "replace_top":
        j, rec = feedback_replace_top(h, ranked_feats, t, alpha)
        idx = ranked[j]
        return feats[idx], {"feedback_index": idx}, rec
    if cfg.feedback == "one_from_5":
        j, rec = feedback_one_from_k(h, ranked_feats, 5, t, alpha)
        idx = ranked[j]
        return feats[idx], {"feedback_index": idx}, rec
    if cfg.feedback == "one_from_n":
        j, rec = feedback_one_from_k(h, ranked_feats, len(ranked), t, alpha)
        idx = ranked[j]
        return feats[idx], {"feedback_index": idx}, rec
    if cfg.feedback == "approx_argmax":
        idx, rec = feedback_approx_argmax(h, feats, predicted, oracle_seed, t, alpha)
        return feats[idx], {"feedback_index": idx}, rec
    if cfg.feedback == "noisy_click":
        j, rec = feedback_noisy_click(
            h, ranked_feats, 5, cfg.noise_epsilon, oracle_seed, t, alpha
        )
        idx = ranked[j]
        return feats[idx], {"feedback_index": idx}, rec
    if cfg.feedback == "waypoint":
        traj_fb, feat_fb, rec = feedback_waypoint_correction(
            h, scene, trajectories[predicted], feats, predicted, cfg.proximity, t, alpha
        )
        return (
            feat_fb,
            {"feedback_waypoints": traj_fb.waypoints.tolist()},
            rec,
        )
    raise ValueError(f"unknown feedback mechanism {cfg.feedback!r}")


def run_session(
    cfg: ExperimentConfig,
    out_dir: str | Path | None = None,
    initial_weights: WeightState | None = None,
) -> SessionResult:
    seeds = _session_seeds(cfg)
    scenes = [
        generate_scenario(cfg.family, s) for s in seeds["scenario_seeds"]
    ]
    n_attr = len(scenes[0].attributes)
    h = hidden_utility(seeds["utility_seed"], n_attr)
    weights = initial_weights if initial_weights is not None else zero_weights(n_attr)

    mmp: MmpState | None = None
    if cfg.algo == "mmp":
        lam = cfg.mmp_regularization if cfg.mmp_regularization > 0 else 1.0
        mmp = MmpState(regularization=lam, passes=cfg.mmp_passes, n_attributes=n_attr)
    supervised: WeightState | None = None
    if cfg.algo == "supervised":
        supervised = supervised_reference(scenes, h, cfg)
    geometric_feats: dict[int, FeatureVector] = {}
    if cfg.algo == "geometric":
        for i, scene in enumerate(scenes):
            plan = geometric_plan(scene, cfg.rrt_step, cfg.max_rrt_nodes)
            geometric_feats[i] = extract(scene, plan, cfg.proximity)

    log_lines = [
        json.dumps(
            {
                "event": "start",
                "config": config_to_dict(cfg),
                "seeds": seeds,
                "n_attributes": n_attr,
            }
        )
    ]
    records: list[FeedbackRecord] = []
    rows: list[dict] = []
    slacks: list[float] = []
    bound_c = 0.0

    for t in range(1, cfg.iterations + 1):
        task = (t - 1) % cfg.tasks
        scene = scenes[task]
        cand_seed = seeds["candidate_seeds"][t - 1]
        trajectories = sample_diverse(scene, _sampler_config(cfg, cand_seed))
        feats = [extract(scene, traj, cfg.proximity) for traj in trajectories]

        if cfg.algo in ("tpp", "mmp"):
            rank_weights = weights if cfg.algo == "tpp" else (
                mmp.weight_state() if mmp.weights is not None else zero_weights(n_attr)
            )
            ranked = rank(rank_weights, feats)
            feat_fb, decision, rec = _give_feedback(
                cfg, h, t, scene, trajectories, feats, ranked,
                seeds["oracle_seeds"][t - 1],
            )
            f_pred = feats[ranked[0]]
            if cfg.algo == "tpp":
                weights = perceptron_update(weights, f_pred, feat_fb)
            else:
                mmp = mmp_observe_and_train(
                    mmp, feat_fb, feats, seeds["pass_seeds"][t - 1]
                )
                weights = mmp.weight_state()
        else:
            if cfg.algo == "manual":
                ranked = manual_rank(feats, n_attr)
            elif cfg.algo == "supervised":
                ranked = rank(supervised, feats)
            else:  # geometric: no preference signal over the set
                ranked = list(range(len(feats)))
            decision = {"feedback_index": None}
            if cfg.algo == "geometric":
                s_pred = true_score(h, geometric_feats[task])
                s_best = max(true_score(h, f) for f in feats)
                rec = FeedbackRecord(
                    t=t,
                    mechanism="geometric",
                    score_predicted=s_pred,
                    score_feedback=s_pred,
                    score_best=max(s_best, s_pred),
                    alpha_realized=1.0,
                    slack=0.0,
                )
            else:
                rec = account(
                    h, t, cfg.algo, feats, ranked[0],
                    true_score(h, feats[ranked[0]]), cfg.target_alpha,
                )
            feat_fb = feats[ranked[0]]

        records.append(rec)
        slacks.append(rec.slack)
        bound_c = max(bound_c, feature_norm_bound([feats + [feat_fb]]))
        labels = likert_labels(h, feats)
        ranked_labels = [labels[i] for i in ranked]
        row = {
            "t": t,
            "regret": regret(records),
            "bound": regret_bound(bound_c, 1.0, cfg.target_alpha, slacks, t),
            "ndcg1": ndcg_at_k(ranked_labels, 1),
            "ndcg3": ndcg_at_k(ranked_labels, min(3, len(ranked_labels))),
            "alpha_t": rec.alpha_realized,
            "xi_t": rec.slack,
        }
        rows.append(row)
        log_lines.append(
            json.dumps(
                {
                    "event": "iteration",
                    "t": t,
                    "task": task,
                    "candidate_seed": cand_seed,
                    "oracle_seed": seeds["oracle_seeds"][t - 1],
                    "pass_seed": seeds["pass_seeds"][t - 1],
                    "predicted": ranked[0],
                    "mechanism": rec.mechanism,
                    **decision,
                    "score_predicted": rec.score_predicted,
                    "score_feedback": rec.score_feedback,
                    "score_best": rec.score_best,
                    "alpha_realized": rec.alpha_realized,
                    "slack": rec.slack,
                    "feature_bound": bound_c,
                    "weight_hash": weight_hash(weights),
                }
            )
        )

    log_lines.append(
        json.dumps(
            {
                "event": "end",
                "final_weight_hash": weight_hash(weights),
                "regret": rows[-1]["regret"],
            }
        )
    )
    csv_text = _rows_to_csv(rows)
    result = SessionResult(
        config=cfg,
        records=records,
        rows=rows,
        csv_text=csv_text,
        log_lines=log_lines,
        final_weights=weights,
        feature_bound=bound_c,
    )
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        log_path = out / "session.jsonl"
        csv_path = out / "metrics.csv"
        log_path.write_text("\n".join(log_lines) + "\n")
        csv_path.write_text(csv_text)
        for i, scene in enumerate(scenes):
            (out / f"scene_{i}.json").write_text(scene_to_json(scene))
        if last_prediction is not None:
            (out / "final_prediction.json").write_text(
                trajectory_to_json(last_prediction)
            )
        result.log_path = str(log_path)
        result.csv_path = str(csv_path)
    return result


def replay_session(
    log: str | Path | list[str], out_dir: str | Path | None = None
) -> SessionResult:
    """Re-execute a logged session from its stored seeds and decisions.

    Candidate sets are regenerated from the stored per-iteration seeds and
    the stored feedback choices are applied verbatim; any divergence from
    the logged predictions or weight hashes raises ReplayError.
    """
    if isinstance(log, (str, Path)):
        lines = Path(log).read_text().splitlines()
    else:
        lines = list(log)
    events = [json.loads(line) for line in lines if line.strip()]
    if not events or events[0]["event"] != "start":
        raise ReplayError("log does not begin with a start event")
    cfg = config_from_dict(events[0]["config"])
    seeds = events[0]["seeds"]
    n_attr = events[0]["n_attributes"]
    scenes = [generate_scenario(cfg.family, s) for s in seeds["scenario_seeds"]]
    h = hidden_utility(seeds["utility_seed"], n_attr)
    weights = zero_weights(n_attr)
    mmp: MmpState | None = None
    if cfg.algo == "mmp":
        lam = cfg.mmp_regularization if cfg.mmp_regularization > 0 else 1.0
        mmp = MmpState(regularization=lam, passes=cfg.mmp_passes, n_attributes=n_attr)

    records: list[FeedbackRecord] = []
    rows: list[dict] = []
    slacks: list[float] = []
    bound_c = 0.0
    for event in events[1:]:
        if event["event"] != "iteration":
            continue
        t = event["t"]
        scene = scenes[event["task"]]
        trajectories = sample_diverse(
            scene, _sampler_config(cfg, event["candidate_seed"])
        )
        feats = [extract(scene, traj, cfg.proximity) for traj in trajectories]
        if cfg.algo in ("tpp", "mmp"):
            rank_weights = weights if cfg.algo == "tpp" else (
                mmp.weight_state() if mmp.weights is not None else zero_weights(n_attr)
            )
            ranked = rank(rank_weights, feats)
        elif cfg.algo == "manual":
            ranked = manual_rank(feats, n_attr)
        elif cfg.algo == "supervised":
            raise ReplayError("supervised sessions replay via run_session")
        else:
            ranked = list(range(len(feats)))
        if ranked[0] != event["predicted"]:
            raise ReplayError(f"iteration {t}: prediction diverged")
        if event.get("feedback_waypoints") is not None:
            feat_fb = extract(
                scene,
                Trajectory(np.array(event["feedback_waypoints"], dtype=float)),
                cfg.proximity,
            )
        elif event.get("feedback_index") is not None:
            feat_fb = feats[event["feedback_index"]]
        else:
            feat_fb = feats[ranked[0]]
        rec = account(
            h, t, event["mechanism"], feats, event["predicted"],
            true_score(h, feat_fb), cfg.target_alpha,
        ) if cfg.algo in ("tpp", "mmp", "manual", "supervised") else None
        if cfg.algo == "geometric":
            rec = FeedbackRecord(
                t=t,
                mechanism="geometric",
                score_predicted=event["score_predicted"],
                score_feedback=event["score_feedback"],
                score_best=event["score_best"],
                alpha_realized=event["alpha_realized"],
                slack=event["slack"],
            )
        if cfg.algo in ("tpp", "mmp"):
            if cfg.algo == "tpp":
                weights = perceptron_update(weights, feats[ranked[0]], feat_fb)
            else:
                mmp = mmp_observe_and_train(mmp, feat_fb, feats, event["pass_seed"])
                weights = mmp.weight_state()
        if weight_hash(weights) != event["weight_hash"]:
            raise ReplayError(f"iteration {t}: weight hash diverged")
        records.append(rec)
        slacks.append(rec.slack)
        bound_c = max(bound_c, feature_norm_bound([feats + [feat_fb]]))
        labels = likert_labels(h, feats)
        ranked_labels = [labels[i] for i in ranked]
        rows.append(
            {
                "t": t,
                "regret": regret(records),
                "bound": regret_bound(bound_c, 1.0, cfg.target_alpha, slacks, t),
                "ndcg1": ndcg_at_k(ranked_labels, 1),
                "ndcg3": ndcg_at_k(ranked_labels, min(3, len(ranked_labels))),
                "alpha_t": rec.alpha_realized,
                "xi_t": rec.slack,
            }
        )
    csv_text = _rows_to_csv(rows)
    result = SessionResult(
        config=cfg,
        records=records,
        rows=rows,
        csv_text=csv_text,
        log_lines=lines,
        final_weights=weights,
        feature_bound=bound_c,
    )
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        csv_path = out / "replayed_metrics.csv"
        csv_path.write_text(csv_text)
        result.csv_path = str(csv_path)
    return result


def supervised_reference(
    scenes: list[Scene],
    h: HiddenUtility,
    cfg: ExperimentConfig,
    passes: int = 100,
) -> WeightState:
    """Idealized fully-supervised reference: pairwise ranking hinge trained
    on simulated quality labels of training candidates, then frozen."""
    rng = np.random.default_rng([cfg.seed, 0x50F])
    stacked_sets = []
    label_sets = []
    for i, scene in enumerate(scenes):
        cand_seed = int(rng.integers(2**63))
        trajectories = sample_diverse(scene, _sampler_config(cfg, cand_seed))
        feats = [extract(scene, traj, cfg.proximity) for traj in trajectories]
        stacked_sets.append(np.stack([f.stacked() for f in feats]))
        label_sets.append(np.array(likert_labels(h, feats)))
    pairs = []
    for si, (mat, labels) in enumerate(zip(stacked_sets, label_sets)):
        for i in range(len(labels)):
            for j in range(len(labels)):
                if labels[i] > labels[j]:
                    pairs.append(mat[i] - mat[j])
    if not pairs:
        n_attr = len(scenes[0].attributes)
        return zero_weights(n_attr)
    diffs = np.stack(pairs)
    dim = diffs.shape[1]
    w = np.zeros(dim)
    lam = 1e-3
    step_index = 0
    for _ in range(passes):
        order = rng.permutation(diffs.shape[0])
        for idx in order:
            step_index += 1
            eta = 1.0 / (lam * step_index)
            margin = float(diffs[idx] @ w)
            w *= 1.0 - eta * lam
            if margin < 1.0:
                w += eta * diffs[idx]
    n_attr = len(scenes[0].attributes)
    from ..learner import from_stacked

    return from_stacked(w, n_attr)


def run_mmp_hindsight(
    cfg: ExperimentConfig, out_dir: str | Path | None = None
) -> SessionResult:
    """Run the margin baseline over the regularization grid and keep the
    run with the best final regret (its unfair hindsight advantage)."""
    best: SessionResult | None = None
    for lam in MMP_LAMBDA_GRID:
        trial_cfg = config_from_dict(
            {**config_to_dict(cfg), "algo": "mmp", "mmp_regularization": lam}
        )
        result = run_session(trial_cfg)
        if best is None or result.rows[-1]["regret"] < best.rows[-1]["regret"]:
            best = result
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "session.jsonl").write_text("\n".join(best.log_lines) + "\n")
        (out / "metrics.csv").write_text(best.csv_text)
        best.log_path = str(out / "session.jsonl")
        best.csv_path = str(out / "metrics.csv")
    return best


GENERALIZATION_CSV_HEADER = "mode,setting,t,ndcg1,ndcg3"


def _learning_curve(
    cfg: ExperimentConfig,
    scene: Scene,
    h: HiddenUtility,
    start_weights: WeightState,
    candidate_seeds: list[int],
    oracle_seeds: list[int],
) -> list[dict]:
    """Feedback loop on one scene starting from given weights; returns the
    per-iteration ndcg rows (used by the generalization study)."""
    weights = start_weights
    out = []
    for t, (cand_seed, oracle_seed) in enumerate(
        zip(candidate_seeds, oracle_seeds), start=1
    ):
        trajectories = sample_diverse(scene, _sampler_config(cfg, cand_seed))
        feats = [extract(scene, traj, cfg.proximity) for traj in trajectories]
        ranked = rank(weights, feats)
        labels = likert_labels(h, feats)
        ranked_labels = [labels[i] for i in ranked]
        out.append(
            {
                "t": t,
                "ndcg1": ndcg_at_k(ranked_labels, 1),
                "ndcg3": ndcg_at_k(ranked_labels, min(3, len(ranked_labels))),
            }
        )
        feat_fb, _, _ = _give_feedback(
            cfg, h, t, scene, trajectories, feats, ranked, oracle_seed
        )
        weights = perceptron_update(weights, feats[ranked[0]], feat_fb)
    return out


def run_generalization(
    cfg: ExperimentConfig,
    out_dir: str | Path | None = None,
    eval_iterations: int = 10,
    modes: tuple[str, ...] = ("new_object", "new_environment", "new_both"),
) -> tuple[list[dict], str]:
    """Pre-train on the base task, then learn on held-out variants.

    For each mode the held-out task is evaluated twice with identical
    candidate seeds: continuing from the pre-trained weights, and reset to
    zero. Returns rows and the CSV text (mode, setting, t, ndcg values).
    """
    seeds = _session_seeds(cfg)
    h_seed = seeds["utility_seed"]
    rng = np.random.default_rng([cfg.seed, 0x6E4])
    pre_cand = [int(s) for s in rng.integers(2**63, size=cfg.pretrain_iterations)]
    pre_orac = [int(s) for s in rng.integers(2**63, size=cfg.pretrain_iterations)]
    eval_cand = [int(s) for s in rng.integers(2**63, size=eval_iterations)]
    eval_orac = [int(s) for s in rng.integers(2**63, size=eval_iterations)]

    rows: list[dict] = []
    pretrained: WeightState | None = None
    for mode in modes:
        train_scene, test_scene = generalization_pair(cfg.family, cfg.seed, mode)
        n_attr = len(train_scene.attributes)
        h = hidden_utility(h_seed, n_attr)
        if pretrained is None:
            # the train scene is the same base scene for every mode
            pretrained = zero_weights(n_attr)
            curve_cfg = cfg
            weights = pretrained
            for t, (cs, osd) in enumerate(zip(pre_cand, pre_orac), start=1):
                trajectories = sample_diverse(train_scene, _sampler_config(cfg, cs))
                feats = [extract(train_scene, tr, cfg.proximity) for tr in trajectories]
                ranked = rank(weights, feats)
                feat_fb, _, _ = _give_feedback(
                    curve_cfg, h, t, train_scene, trajectories, feats, ranked, osd
                )
                weights = perceptron_update(weights, feats[ranked[0]], feat_fb)
            pretrained = weights
        for setting, start in (
            ("pretrained", pretrained),
            ("untrained", zero_weights(len(test_scene.attributes))),
        ):
            curve = _learning_curve(cfg, test_scene, h, start, eval_cand, eval_orac)
            for row in curve:
                rows.append({"mode": mode, "setting": setting, **row})
    csv_lines = [GENERALIZATION_CSV_HEADER]
    for row in rows:
        csv_lines.append(
            f"{row['mode']},{row['setting']},{row['t']},{row['ndcg1']!r},{row['ndcg3']!r}"
        )
    csv_text = "\n".join(csv_lines) + "\n"
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "generalization.csv").write_text(csv_text)
    return rows, csv_text


def _run_session_worker(args: tuple) -> SessionResult:
    cfg_dict, out_dir = args
    return run_session(config_from_dict(cfg_dict), out_dir)


def run_sessions_parallel(
    configs: list[ExperimentConfig],
    out_dirs: list[str | None] | None = None,
    workers: int = 2,
) -> list[SessionResult]:
    """Independent (config, seed) runs on a small process pool."""
    if out_dirs is None:
        out_dirs = [None] * len(configs)
    payload = [(config_to_dict(c), d) for c, d in zip(configs, out_dirs)]
    if workers <= 1 or len(configs) == 1:
        return [_run_session_worker(p) for p in payload]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_session_worker, payload))
