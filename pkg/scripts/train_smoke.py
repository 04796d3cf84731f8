"""Stage-1 training smoke run: one perpendicular-bay scenario, chunk
length 4, published optimization hyperparameters, greedy evaluation on 50
held-out initial poses, early stop at 80% success.

    python3 scripts/train_smoke.py [--seed 0] [--max-steps 2000000]
"""

import argparse
import time

import numpy as np

from parkplan.curriculum import default_stages
from parkplan.env import ParkingEnv
from parkplan.evaluate import run_policy_episode
from parkplan.geometry import VehicleSpec
from parkplan.policy import PolicyConfig
from parkplan.ppo import TrainConfig, train
from parkplan.scenarios import synth_scenario

SMOKE_POLICY = PolicyConfig(embed_dim=32, n_heads=4, fusion_width=64,
                            k_obstacles=64, chunk_length=4)
HELDOUT_SEED = 987654321
EVAL_EVERY = 5
TARGET = 0.8


def heldout_poses(scenario, spec, n=50):
    stage1 = default_stages()[0]
    rng = np.random.default_rng(HELDOUT_SEED)
    from parkplan.curriculum import sample_init

    return [sample_init(stage1, scenario, spec, rng) for _ in range(n)]


def eval_success(policy, scenario, spec, poses, max_episode_len=100):
    env = ParkingEnv(spec=spec, k_obstacles=policy.cfg.k_obstacles)
    wins = 0
    for pose in poses:
        ok, _, _, _ = run_policy_episode(
            policy, env, scenario, init_pose=pose, max_episode_len=max_episode_len
        )
        wins += ok
    return wins / len(poses)


def run_smoke(seed: int, max_steps: int = 2_000_000, verbose=True):
    spec = VehicleSpec()
    scenario = synth_scenario("perpendicular_bay")
    stage1 = default_stages()[0]
    poses = heldout_poses(scenario, spec)
    cfg = TrainConfig(total_steps=max_steps, chunk_length=4, seed=seed)
    state = {"rate": 0.0, "evals": []}

    def stop_fn(policy, rows):
        if len(rows) % EVAL_EVERY != 0:
            return False
        rate = eval_success(policy, scenario, spec, poses)
        state["rate"] = rate
        state["evals"].append((rows[-1].primitive_steps, rate))
        if verbose:
            print(f"  eval@update {len(rows)}: success {rate:.2f}")
        return rate >= TARGET

    t0 = time.time()
    policy, rows = train(
        cfg,
        [scenario],
        policy_cfg=SMOKE_POLICY,
        spec=spec,
        stages=(stage1,),  # stage-1 curriculum only
        log_fn=(lambda r: print(" ", r.line())) if verbose else None,
        stop_fn=stop_fn,
    )
    if state["rate"] < TARGET:  # final evaluation if budget ran out
        state["rate"] = eval_success(policy, scenario, spec, poses)
    steps = rows[-1].primitive_steps if rows else 0
    return policy, state["rate"], steps, time.time() - t0


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--max-steps", type=int, default=2_000_000)
    args = ap.parse_args()
    policy, rate, steps, elapsed = run_smoke(args.seed, args.max_steps)
    print(
        f"seed {args.seed}: success {rate:.2f} after {steps} primitive steps "
        f"({elapsed:.0f}s) -> {'PASS' if rate >= TARGET else 'FAIL'}"
    )


if __name__ == "__main__":
    main()
