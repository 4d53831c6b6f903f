"""Command-line entry points: experiment runs, replay, scene tooling, server."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from ..features import feature_layout
from ..world import DEFAULT_ATTRIBUTES, scene_to_dict
from .config import ExperimentConfig, config_to_dict, load_config
from .scenarios import generate_scenario
from .session import (
    ReplayError,
    replay_session,
    run_generalization,
    run_mmp_hindsight,
    run_session,
)


def _apply_overrides(cfg: ExperimentConfig, args: argparse.Namespace) -> ExperimentConfig:
    data = config_to_dict(cfg)
    if args.seed is not None:
        data["seed"] = args.seed
    if args.algo is not None:
        data["algo"] = args.algo
    if args.feedback is not None:
        data["feedback"] = args.feedback
    if args.alpha is not None:
        data["target_alpha"] = args.alpha
    if args.iters is not None:
        data["iterations"] = args.iters
    return ExperimentConfig(**data)


def _base_config(args: argparse.Namespace) -> ExperimentConfig:
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    return _apply_overrides(cfg, args)


def _add_run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key=value config file")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out-dir", default="out")
    p.add_argument("--algo", default=None)
    p.add_argument("--feedback", default=None)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--iters", type=int, default=None)


def cmd_run(args: argparse.Namespace) -> int:
    cfg = _base_config(args)
    if cfg.algo == "mmp" and cfg.mmp_regularization <= 0:
        result = run_mmp_hindsight(cfg, args.out_dir)
    else:
        result = run_session(cfg, args.out_dir)
    final = result.rows[-1]
    print(
        f"{cfg.algo} seed={cfg.seed} T={cfg.iterations}: "
        f"regret={final['regret']:.4f} ndcg1={final['ndcg1']:.3f} "
        f"ndcg3={final['ndcg3']:.3f}"
    )
    print(f"wrote {result.csv_path} and {result.log_path}")
    return 0


def cmd_generalize(args: argparse.Namespace) -> int:
    cfg = _base_config(args)
    rows, _ = run_generalization(cfg, args.out_dir)
    firsts = {
        (r["mode"], r["setting"]): r["ndcg3"] for r in rows if r["t"] == 1
    }
    for (mode, setting), value in sorted(firsts.items()):
        print(f"{mode:16s} {setting:10s} first-iteration ndcg3={value:.3f}")
    print(f"wrote {Path(args.out_dir) / 'generalization.csv'}")
    return 0


def cmd_replay(args: argparse.Namespace) -> int:
    try:
        result = replay_session(args.log, args.out_dir)
    except ReplayError as err:
        print(f"replay failed: {err}", file=sys.stderr)
        return 1
    print(f"replayed {len(result.rows)} iterations; wrote {result.csv_path}")
    return 0


def cmd_scenario(args: argparse.Namespace) -> int:
    scene = generate_scenario(args.family, args.seed)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    scene_path = out / f"scene_{args.family}_{args.seed}.json"
    scene_path.write_text(json.dumps(scene_to_dict(scene), indent=2))
    print(f"wrote {scene_path}")
    if args.manifest:
        manifest_path = out / "feature_layout.json"
        manifest_path.write_text(
            json.dumps(feature_layout(DEFAULT_ATTRIBUTES), indent=2)
        )
        print(f"wrote {manifest_path}")
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from ..service.app import create_app

    uvicorn.run(create_app(), host=args.host, port=args.port, log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="coactive",
        description="Coactive trajectory preference learning experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one learning session")
    _add_run_flags(p_run)
    p_run.set_defaults(func=cmd_run)

    p_gen = sub.add_parser("generalize", help="pre-train and evaluate held-out tasks")
    _add_run_flags(p_gen)
    p_gen.set_defaults(func=cmd_generalize)

    p_replay = sub.add_parser("replay", help="re-execute a logged session")
    p_replay.add_argument("--log", required=True)
    p_replay.add_argument("--out-dir", default="out")
    p_replay.set_defaults(func=cmd_replay)

    p_scene = sub.add_parser("scenario", help="generate a scene JSON")
    p_scene.add_argument("--family", default="manipulation")
    p_scene.add_argument("--seed", type=int, default=0)
    p_scene.add_argument("--out-dir", default="out")
    p_scene.add_argument("--manifest", action="store_true")
    p_scene.set_defaults(func=cmd_scenario)

    p_serve = sub.add_parser("serve", help="start the live feedback service")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8000)
    p_serve.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
