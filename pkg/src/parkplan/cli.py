"""Command-line surface.

Subcommands: plan (Hybrid A* on one scenario), train (full RL loop), eval
(metric sweep), rollout-init (sample curriculum initial poses), ablate-astar
(planner hyperparameter grid), viz (replay log to SVG). Exit code 0 on
success; 2 for input/config errors; 1 for runtime failures. Causes are
printed to stderr.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .config import load_config
from .curriculum import sample_init
from .env import ParkingEnv, load_replay
from .errors import InputError, ParkPlanError
from .evaluate import evaluate, pivot_count, travel_distance
from .geometry import Pose2D, VehicleSpec, ego_to_world
from .hybrid_astar import PlannedPath, PlannerConfig, plan
from .policy import PolicyNetwork
from .ppo import train
from .render import render_svg, save_svg
from .scenarios import bundled_scenarios, load_scenario


def _load_scenarios(args) -> list:
    if getattr(args, "scenario", None):
        return [load_scenario(args.scenario)]
    if getattr(args, "scenarios", None):
        root = Path(args.scenarios)
        if root.is_dir():
            files = sorted(root.glob("*.json"))
            if not files:
                raise InputError(f"no scenario files in {root}")
            return [load_scenario(f) for f in files]
        return [load_scenario(root)]
    return bundled_scenarios()


def _out_dir(args) -> Path:
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_plan(args) -> int:
    cfg = load_config(args.config)
    scenarios = _load_scenarios(args)
    out = _out_dir(args)
    spec = VehicleSpec()
    failures = 0
    for s in scenarios:
        result = plan(s, spec, cfg.planner)
        if isinstance(result, PlannedPath):
            svg = render_svg(s, result.poses, spec=spec)
            save_svg(svg, out / f"{s.id}.svg")
            print(
                f"{s.id}: cost={result.cost:.2f} length={result.length:.2f} m "
                f"pivots={pivot_count(result.directions)} "
                f"time={result.planning_time:.2f} s -> {out / (s.id + '.svg')}"
            )
        else:
            failures += 1
            print(f"{s.id}: {result}", file=sys.stderr)
    return 0 if failures == 0 else 1


def cmd_train(args) -> int:
    cfg = load_config(args.config)
    scenarios = _load_scenarios(args)
    out = _out_dir(args)
    train_cfg = cfg.train
    if args.seed is not None:
        train_cfg = replace(train_cfg, seed=args.seed)
    if args.total_steps is not None:
        train_cfg = replace(train_cfg, total_steps=args.total_steps)
    log_path = out / "training_log.txt"
    log_fh = open(log_path, "w")

    def log_fn(row):
        print(row.line())
        log_fh.write(row.line() + "\n")
        log_fh.flush()

    try:
        def env_factory():
            return ParkingEnv(spec=VehicleSpec(), **cfg.env_kwargs())

        # the checkpoint must record the observation width actually used,
        # so the env section's K wins over the policy section's
        policy_cfg = replace(cfg.policy, k_obstacles=cfg.env.k_obstacles)
        policy, rows = train(
            train_cfg,
            scenarios,
            policy_cfg=policy_cfg,
            env_factory=env_factory,
            stages=cfg.stages,
            checkpoint_dir=str(out),
            log_fn=log_fn,
        )
    finally:
        log_fh.close()
    print(f"checkpoints and log in {out}")
    return 0


def cmd_eval(args) -> int:
    cfg = load_config(args.config)
    scenarios = _load_scenarios(args)
    out = _out_dir(args)
    if args.method == "rl-policy":
        if not args.checkpoint:
            raise InputError("--checkpoint is required for rl-policy evaluation")
        policy = PolicyNetwork.load_checkpoint(args.checkpoint)
        report = evaluate(
            "rl-policy", scenarios, planner_cfg=None, policy=policy,
            env_kwargs=cfg.env_kwargs(),
        )
    else:
        report = evaluate("hybrid-astar", scenarios, planner_cfg=cfg.planner)
    csv_path = out / f"eval_{args.method}.csv"
    csv_path.write_text(report.to_csv())
    print(report.summary())
    print(f"rows -> {csv_path}")
    return 0


def cmd_rollout_init(args) -> int:
    cfg = load_config(args.config)
    scenarios = _load_scenarios(args)
    out = _out_dir(args)
    spec = VehicleSpec()
    stages = cfg.stages
    if not 1 <= args.stage <= len(stages):
        raise InputError(f"stage must be in 1..{len(stages)}")
    stage = stages[args.stage - 1]
    rng = np.random.default_rng(args.seed)
    for s in scenarios:
        poses = [sample_init(stage, s, spec, rng) for _ in range(args.samples)]
        svg = render_svg(s, spec=spec, extra_poses=poses)
        path = out / f"{s.id}_stage{args.stage}_init.svg"
        save_svg(svg, path)
        print(f"{s.id}: {args.samples} stage-{args.stage} poses -> {path}")
    return 0


ABLATION_GRID = [
    # (xy res, theta res deg, motion res, n_steer)
    (0.1, 8.0, 1.0, 9),
    (0.32, 8.0, 1.0, 9),
    (0.5, 8.0, 1.0, 9),
    (0.5, 8.0, 0.5, 9),
    (0.5, 8.0, 2.0, 9),
    (0.5, 5.0, 1.0, 20),
    (1.0, 5.0, 1.0, 20),
]


def cmd_ablate_astar(args) -> int:
    cfg = load_config(args.config)
    scenarios = _load_scenarios(args)
    out = _out_dir(args)
    lines = ["xy_res,theta_res_deg,motion_res,n_steer,success_rate,"
             "mean_time_s,mean_distance_m,mean_pivots"]
    for xy, th, motion, n_steer in ABLATION_GRID:
        pcfg = PlannerConfig(
            xy_resolution=xy,
            theta_resolution=math.radians(th),
            motion_resolution=motion,
            n_steer=n_steer,
            switch_back_cost=cfg.planner.switch_back_cost,
            backward_cost=cfg.planner.backward_cost,
            steer_angle_cost=cfg.planner.steer_angle_cost,
            steer_change_cost=cfg.planner.steer_change_cost,
            heuristic_weight=cfg.planner.heuristic_weight,
            time_budget=cfg.planner.time_budget,
        )
        report = evaluate("hybrid-astar", scenarios, planner_cfg=pcfg)
        agg = report.aggregates()
        lines.append(
            f"{xy},{th},{motion},{n_steer},{agg['success_rate']:.3f},"
            f"{agg.get('mean_time_s', float('nan')):.3f},"
            f"{agg.get('mean_distance_m', float('nan')):.2f},"
            f"{agg.get('mean_pivots', float('nan')):.2f}"
        )
        print(lines[-1])
    path = out / "ablate_astar.csv"
    path.write_text("\n".join(lines) + "\n")
    print(f"grid -> {path}")
    return 0


def cmd_viz(args) -> int:
    cfg = load_config(args.config)
    scenarios = _load_scenarios(args)
    if len(scenarios) != 1:
        raise InputError("viz needs exactly one scenario (--scenario)")
    scenario = scenarios[0]
    out = _out_dir(args)
    log = load_replay(args.replay)

    env = ParkingEnv(spec=VehicleSpec(), **cfg.env_kwargs())
    init = Pose2D(*(float(v) for v in log["init_pose"]))
    obs = env.reset(scenario, init, int(log.get("max_episode_len", 1000)))
    poses = [env.state.pose()]
    for idx in log["actions"]:
        env.step_primitive(int(idx))
        poses.append(env.state.pose())

    attention = None
    attention_points = None
    if args.checkpoint:
        policy = PolicyNetwork.load_checkpoint(args.checkpoint)
        w = policy.attention_weights(obs)  # at the initial observation
        # tokens are ego-frame over the nearest points; recover world points
        local = obs.tokens[obs.mask] * env.horizon
        attention_points = ego_to_world(init, local)
        attention = w.mean(axis=0)[obs.mask]
    svg = render_svg(
        scenario, poses, spec=VehicleSpec(),
        attention=attention, attention_points=attention_points,
    )
    path = out / f"{scenario.id}_replay.svg"
    save_svg(svg, path)
    dists = env.displacements()
    print(
        f"{scenario.id}: steps={len(log['actions'])} "
        f"distance={travel_distance(dists):.2f} m "
        f"pivots={pivot_count(np.sign(dists))} -> {path}"
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="parkplan",
        description="Constrained-parking planning: RL planner and Hybrid A* baseline",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, scenarios=True):
        p.add_argument("--config", default=None, help="YAML config file")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--out", default=None, help="output directory")
        if scenarios:
            p.add_argument("--scenario", default=None, help="one scenario file")
            p.add_argument(
                "--scenarios", default=None,
                help="directory of scenario files (default: bundled pack)",
            )

    p = sub.add_parser("plan", help="run Hybrid A* and emit path SVGs")
    common(p)
    p.set_defaults(fn=cmd_plan)

    p = sub.add_parser("train", help="train the RL planner")
    common(p)
    p.add_argument("--total-steps", type=int, default=None,
                   help="override the primitive-step budget")
    p.set_defaults(fn=cmd_train)

    p = sub.add_parser("eval", help="metric sweep over scenarios")
    common(p)
    p.add_argument("--method", choices=["rl-policy", "hybrid-astar"], required=True)
    p.add_argument("--checkpoint", default=None)
    p.set_defaults(fn=cmd_eval)

    p = sub.add_parser("rollout-init", help="sample curriculum initial poses")
    common(p)
    p.add_argument("--stage", type=int, default=1)
    p.add_argument("--samples", type=int, default=20)
    p.set_defaults(fn=cmd_rollout_init)

    p = sub.add_parser("ablate-astar", help="planner hyperparameter grid")
    common(p)
    p.set_defaults(fn=cmd_ablate_astar)

    p = sub.add_parser("viz", help="render a replay log")
    common(p)
    p.add_argument("--replay", required=True)
    p.add_argument("--checkpoint", default=None,
                   help="overlay attention from this checkpoint")
    p.set_defaults(fn=cmd_viz)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (InputError, FileNotFoundError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    except ParkPlanError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
