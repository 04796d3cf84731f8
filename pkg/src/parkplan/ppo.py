"""Clipped-surrogate policy optimization over chunked macro-actions.

The training loop mirrors the closed-loop recipe end to end: pick the
curriculum stage for the update iteration, roll out parallel environments
(scenario sampled per episode, initial pose from the stage's sampler,
macro-actions through the chunk wrapper), then run several epochs of
minibatch clipped-surrogate updates once the transition buffer is full.

Transitions live at macro-action granularity; rewards are the env-emitted
chunk sums, stored untouched.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .curriculum import CurriculumStage, default_stages, sample_init, stage_for_iteration
from .env import ParkingEnv
from .errors import NumericError
from .geometry import VehicleSpec
from .policy import (
    PolicyConfig,
    PolicyNetwork,
    batch_observations,
    make_distribution,
)
from .scenarios import Scenario


@dataclass(frozen=True)
class TrainConfig:
    total_steps: int = 1_000_000  # primitive env-step budget
    buffer_size: int = 1024  # macro transitions per update
    batch_size: int = 256  # minibatch size
    ppo_epochs: int = 10
    gamma: float = 1.0
    gae_lambda: float = 0.95
    clip_range: float = 0.2
    learning_rate: float = 3e-4  # constant schedule
    entropy_coef: float = 0.001
    vf_coef: float = 0.5
    max_grad_norm: float = 0.5
    chunk_length: int = 4
    n_envs: int = 8
    seed: int = 0


class Adam:
    def __init__(self, params: dict, lr: float, betas=(0.9, 0.999), eps=1e-8):
        self.lr = lr
        self.b1, self.b2 = betas
        self.eps = eps
        self.t = 0
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}

    def step(self, params: dict, grads: dict) -> None:
        self.t += 1
        c1 = 1.0 - self.b1**self.t
        c2 = 1.0 - self.b2**self.t
        for key, g in grads.items():
            self.m[key] = self.b1 * self.m[key] + (1.0 - self.b1) * g
            self.v[key] = self.b2 * self.v[key] + (1.0 - self.b2) * g * g
            mhat = self.m[key] / c1
            vhat = self.v[key] / c2
            params[key] -= self.lr * mhat / (np.sqrt(vhat) + self.eps)


def clip_grad_norm(grads: dict, max_norm: float) -> float:
    total = math.sqrt(sum(float((g * g).sum()) for g in grads.values()))
    if max_norm > 0 and total > max_norm:
        scale = max_norm / total
        for g in grads.values():
            g *= scale
    return total


# ---------------------------------------------------------------------------
# rollout buffer and advantage estimation
# ---------------------------------------------------------------------------


@dataclass
class RolloutBuffer:
    """Macro-transition storage. Transitions of one env are contiguous in
    collection order; ``episode_starts`` marks trajectory boundaries so
    advantage scans never leak across episodes or envs."""

    feats: np.ndarray
    tokens: np.ndarray
    mask: np.ndarray
    actions: np.ndarray
    log_probs: np.ndarray
    values: np.ndarray
    rewards: np.ndarray
    terminals: np.ndarray  # True terminal (not truncation/cut)
    bootstraps: np.ndarray  # V(s') for the last step of each trajectory piece
    trajectory_ends: np.ndarray  # True where a trajectory piece ends
    primitive_steps: int
    episodes: int
    episode_successes: int
    episode_rewards: list[float] = field(default_factory=list)

    def __len__(self):
        return self.rewards.shape[0]

    def batch(self, idx) -> dict:
        return {
            "feats": self.feats[idx],
            "tokens": self.tokens[idx],
            "mask": self.mask[idx],
        }


def compute_advantages(buffer: RolloutBuffer, gamma: float, lam: float):
    """GAE over the buffer at macro-step granularity. Terminal pieces
    bootstrap zero; truncated or cut pieces bootstrap the stored value."""
    n = len(buffer)
    adv = np.zeros(n)
    next_adv = 0.0
    next_value = 0.0
    for t in reversed(range(n)):
        if buffer.trajectory_ends[t]:
            nonterminal = 0.0 if buffer.terminals[t] else 1.0
            next_value = buffer.bootstraps[t]
            next_adv = 0.0
        else:
            nonterminal = 1.0
            next_value = buffer.values[t + 1]
        delta = buffer.rewards[t] + gamma * next_value * nonterminal - buffer.values[t]
        next_adv = delta + gamma * lam * nonterminal * next_adv
        adv[t] = next_adv
    returns = adv + buffer.values
    return adv, returns


# ---------------------------------------------------------------------------
# rollout collection
# ---------------------------------------------------------------------------


class _Worker:
    """One environment plus its episode bookkeeping."""

    def __init__(self, env: ParkingEnv, rng: np.random.Generator):
        self.env = env
        self.rng = rng
        self.obs = None
        self.primitives = 0

    def begin_episode(self, scenarios, stage, spec, stages):
        scenario = scenarios[self.rng.integers(len(scenarios))]
        init = sample_init(stage, scenario, spec, self.rng, stages=stages)
        self.obs = self.env.reset(scenario, init, stage.max_episode_len)


def collect_rollouts(
    policy: PolicyNetwork,
    workers: list[_Worker],
    scenarios: list[Scenario],
    stage: CurriculumStage,
    spec: VehicleSpec,
    buffer_size: int,
    action_rng: np.random.Generator,
    stages=None,
) -> RolloutBuffer:
    """Fill a buffer with ``buffer_size`` macro transitions, resetting
    workers onto freshly sampled scenarios/poses as their episodes end."""
    feats, tokens, masks = [], [], []
    actions_out, logps, values_out = [], [], []
    rewards, terminals, traj_ends, bootstraps = [], [], [], []
    primitive_steps = 0
    episodes = 0
    successes = 0
    episode_rewards = []

    for w in workers:
        if w.obs is None:
            w.begin_episode(scenarios, stage, spec, stages)
    ep_reward = {id(w): 0.0 for w in workers}

    n = 0
    while n < buffer_size:
        # one batched forward per cycle; each worker appends one transition
        obs_batch = batch_observations([w.obs for w in workers])
        dist, vals, _ = policy.distribution(obs_batch)
        acts = dist.sample(action_rng)
        logp_all = dist.log_prob(acts)
        chunk_lists = dist.chunks(acts)
        for wi, w in enumerate(workers):
            if n >= buffer_size:
                break
            out = w.env.chunk_step(chunk_lists[wi])

            feats.append(obs_batch["feats"][wi])
            tokens.append(obs_batch["tokens"][wi])
            masks.append(obs_batch["mask"][wi])
            actions_out.append(acts[wi])
            logps.append(float(logp_all[wi]))
            values_out.append(float(vals[wi]))
            rewards.append(out.reward)
            primitive_steps += out.info["primitives_executed"]
            ep_reward[id(w)] += out.reward

            if out.done:
                terminal = not out.info["truncated"]
                terminals.append(terminal)
                traj_ends.append(True)
                if terminal:
                    bootstraps.append(0.0)
                else:
                    _, v_next = policy.act(out.observation)
                    bootstraps.append(v_next)
                episodes += 1
                successes += bool(out.info["goal_reached"])
                episode_rewards.append(ep_reward[id(w)])
                ep_reward[id(w)] = 0.0
                w.begin_episode(scenarios, stage, spec, stages)
            else:
                w.obs = out.observation
                terminals.append(False)
                traj_ends.append(False)
                bootstraps.append(0.0)
            n += 1

    # transitions were appended round-robin (one per worker per cycle), so
    # index t belongs to workers[t % W]; the trailing piece of any worker
    # whose episode is still open gets cut here and bootstraps its value
    pending = {id(w) for w in workers}
    for t in reversed(range(n)):
        if not pending:
            break
        w = workers[t % len(workers)]
        if id(w) in pending:
            pending.discard(id(w))
            if not traj_ends[t]:
                traj_ends[t] = True
                terminals[t] = False
                _, v_next = policy.act(w.obs)
                bootstraps[t] = v_next

    return RolloutBuffer(
        feats=np.array(feats),
        tokens=np.array(tokens),
        mask=np.array(masks),
        actions=np.array(actions_out),
        log_probs=np.array(logps),
        values=np.array(values_out),
        rewards=np.array(rewards),
        terminals=np.array(terminals, dtype=bool),
        bootstraps=np.array(bootstraps),
        trajectory_ends=np.array(traj_ends, dtype=bool),
        primitive_steps=primitive_steps,
        episodes=episodes,
        episode_successes=successes,
        episode_rewards=episode_rewards,
    )


# ---------------------------------------------------------------------------
# the PPO objective
# ---------------------------------------------------------------------------


def ppo_loss_and_grads(
    policy: PolicyNetwork,
    batch: dict,
    actions: np.ndarray,
    old_log_probs: np.ndarray,
    advantages: np.ndarray,
    returns: np.ndarray,
    cfg: TrainConfig,
    params: dict | None = None,
):
    """Loss, diagnostics, and exact parameter gradients for one minibatch."""
    logits, values, cache = policy.forward(batch, params)
    dist = make_distribution(logits, policy.cfg)
    b = logits.shape[0]

    logp = dist.log_prob(actions)
    ratio = np.exp(logp - old_log_probs)
    clipped = np.clip(ratio, 1.0 - cfg.clip_range, 1.0 + cfg.clip_range)
    surr_raw = ratio * advantages
    surr_clip = clipped * advantages
    pg_loss = -np.minimum(surr_raw, surr_clip).mean()

    v_err = values - returns
    value_loss = float((v_err * v_err).mean())
    entropy = dist.entropy.mean()

    loss = pg_loss + cfg.vf_coef * value_loss - cfg.entropy_coef * entropy
    if not np.isfinite(loss):
        raise NumericError(
            f"non-finite loss: pg={pg_loss} value={value_loss} entropy={entropy}"
        )

    # seed gradients at the network outputs
    use_raw = surr_raw <= surr_clip  # min() subgradient follows the raw branch
    dlogp = -(use_raw * ratio * advantages) / b  # (B,)

    probs, logps_full = dist.probs, dist.log_probs
    if policy.cfg.chunk_mode == "factored":
        onehot = np.zeros_like(probs)
        np.put_along_axis(onehot, actions[..., None], 1.0, axis=-1)
        dlogits = dlogp[:, None, None] * (onehot - probs)
        ent_per = -(probs * logps_full).sum(axis=-1, keepdims=True)
        dent = -probs * (logps_full + ent_per)
        dlogits += (-cfg.entropy_coef / b) * dent
        dlogits = dlogits.reshape(b, -1)
    else:
        onehot = np.zeros_like(probs)
        np.put_along_axis(onehot, actions[:, None], 1.0, axis=-1)
        dlogits = dlogp[:, None] * (onehot - probs)
        dent = -probs * (logps_full + dist.entropy[:, None])
        dlogits += (-cfg.entropy_coef / b) * dent
    dvalues = cfg.vf_coef * 2.0 * v_err / b

    grads = policy.gradients(cache, dlogits, dvalues, params)
    stats = {
        "loss": float(loss),
        "policy_loss": float(pg_loss),
        "value_loss": value_loss,
        "entropy": float(entropy),
        "approx_kl": float((old_log_probs - logp).mean()),
        "clip_fraction": float((np.abs(ratio - 1.0) > cfg.clip_range).mean()),
    }
    return loss, stats, grads


def ppo_update(
    policy: PolicyNetwork,
    optimizer: Adam,
    buffer: RolloutBuffer,
    cfg: TrainConfig,
    rng: np.random.Generator,
) -> dict:
    """Several epochs of shuffled minibatch updates over one buffer.
    Advantages are normalized once per buffer."""
    adv, returns = compute_advantages(buffer, cfg.gamma, cfg.gae_lambda)
    adv = (adv - adv.mean()) / (adv.std() + 1e-8)
    n = len(buffer)
    stats_acc: dict[str, float] = {}
    count = 0
    for _ in range(cfg.ppo_epochs):
        order = rng.permutation(n)
        for start in range(0, n, cfg.batch_size):
            idx = order[start : start + cfg.batch_size]
            _, stats, grads = ppo_loss_and_grads(
                policy,
                buffer.batch(idx),
                buffer.actions[idx],
                buffer.log_probs[idx],
                adv[idx],
                returns[idx],
                cfg,
            )
            clip_grad_norm(grads, cfg.max_grad_norm)
            optimizer.step(policy.params, grads)
            for k, v in stats.items():
                stats_acc[k] = stats_acc.get(k, 0.0) + v
            count += 1
    return {k: v / count for k, v in stats_acc.items()}


# ---------------------------------------------------------------------------
# full training loop
# ---------------------------------------------------------------------------


@dataclass
class TrainLogRow:
    update: int
    stage: int
    primitive_steps: int
    episodes: int
    mean_episode_reward: float
    success_rate: float
    policy_loss: float
    value_loss: float
    entropy: float
    approx_kl: float
    clip_fraction: float
    elapsed: float

    def line(self) -> str:
        return (
            f"update={self.update} stage={self.stage} steps={self.primitive_steps} "
            f"episodes={self.episodes} ep_reward={self.mean_episode_reward:.3f} "
            f"success={self.success_rate:.3f} pg={self.policy_loss:.4f} "
            f"vf={self.value_loss:.4f} ent={self.entropy:.4f} "
            f"kl={self.approx_kl:.5f} clip={self.clip_fraction:.3f} "
            f"t={self.elapsed:.1f}s"
        )


def train(
    cfg: TrainConfig,
    scenarios: list[Scenario],
    policy_cfg: PolicyConfig | None = None,
    spec: VehicleSpec | None = None,
    env_factory=None,
    stages: tuple[CurriculumStage, ...] | None = None,
    checkpoint_dir=None,
    log_fn=None,
    stop_fn=None,
):
    """Run the full loop: stage selection, chunked rollouts, updates.

    Returns (policy, log_rows). ``stop_fn(policy, rows)``, when given, is
    polled after every update and may end training early (used by
    evaluation-based early stopping).
    """
    spec = spec or VehicleSpec()
    policy_cfg = policy_cfg or PolicyConfig(chunk_length=cfg.chunk_length)
    if policy_cfg.chunk_length != cfg.chunk_length:
        policy_cfg = replace(policy_cfg, chunk_length=cfg.chunk_length)
    stages = stages or default_stages()
    policy = PolicyNetwork(policy_cfg, seed=cfg.seed)
    optimizer = Adam(policy.params, cfg.learning_rate)

    seeds = np.random.SeedSequence(cfg.seed)
    worker_seeds = seeds.spawn(cfg.n_envs + 2)
    action_rng = np.random.default_rng(worker_seeds[-1])
    update_rng = np.random.default_rng(worker_seeds[-2])
    if env_factory is None:
        env_factory = lambda: ParkingEnv(spec=spec, k_obstacles=policy_cfg.k_obstacles)
    workers = [
        _Worker(env_factory(), np.random.default_rng(ws))
        for ws in worker_seeds[: cfg.n_envs]
    ]

    total_updates = max(
        len(stages), int(math.ceil(cfg.total_steps / (cfg.buffer_size * cfg.chunk_length)))
    )
    rows: list[TrainLogRow] = []
    primitive_steps = 0
    update = 0
    t0 = time.perf_counter()
    last_stage = None

    while primitive_steps < cfg.total_steps:
        stage = stage_for_iteration(update, total_updates, stages)
        if checkpoint_dir is not None and last_stage is not None and stage.index != last_stage:
            policy.save_checkpoint(
                f"{checkpoint_dir}/stage{last_stage}.npz",
                extra={"primitive_steps": primitive_steps, "update": update},
            )
        last_stage = stage.index
        buffer = collect_rollouts(
            policy, workers, scenarios, stage, spec, cfg.buffer_size, action_rng,
            stages=stages,
        )
        primitive_steps += buffer.primitive_steps
        stats = ppo_update(policy, optimizer, buffer, cfg, update_rng)
        update += 1
        row = TrainLogRow(
            update=update,
            stage=stage.index,
            primitive_steps=primitive_steps,
            episodes=buffer.episodes,
            mean_episode_reward=(
                float(np.mean(buffer.episode_rewards)) if buffer.episode_rewards else 0.0
            ),
            success_rate=(
                buffer.episode_successes / buffer.episodes if buffer.episodes else 0.0
            ),
            policy_loss=stats["policy_loss"],
            value_loss=stats["value_loss"],
            entropy=stats["entropy"],
            approx_kl=stats["approx_kl"],
            clip_fraction=stats["clip_fraction"],
            elapsed=time.perf_counter() - t0,
        )
        rows.append(row)
        if log_fn is not None:
            log_fn(row)
        if stop_fn is not None and stop_fn(policy, rows):
            break

    if checkpoint_dir is not None:
        policy.save_checkpoint(
            f"{checkpoint_dir}/final.npz",
            extra={"primitive_steps": primitive_steps, "update": update},
        )
    return policy, rows
