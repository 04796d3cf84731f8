"""Closed-loop parking environment.

Episodes run at primitive granularity (0.1 s bicycle-model steps); the
chunk wrapper executes a fixed-length sequence of primitives as one
macro-action, summing rewards and stopping at the first terminal primitive.

The reward of every primitive step is a linear combination of event
indicators plus a constant per-step time penalty:

    r = goal_reward * [goal] + collision_penalty * [collision]
      + out_of_bounds_penalty * [out_of_bounds]
      + gear_change_penalty * [direction change] + idle_penalty * [idle]
      + time_penalty

Goal attainment is measured at the body's geometric center (not the rear
axle) with a positional and a heading tolerance.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import kinematics
from .errors import InputError, ProtocolError, ResetRejectedError
from .geometry import (
    Pose2D,
    VehicleSpec,
    collides,
    transform_to_ego,
    wrap_angle,
    world_to_ego,
)
from .kinematics import VehicleState
from .scenarios import Scenario

DEFAULT_HORIZON = 15.0  # observation range R, meters
DEFAULT_K = 256  # obstacle token slots
DEFAULT_BOUNDS_MARGIN = 5.0  # inflation of the obstacle bounding box, meters
DEFAULT_MAX_TARGET_RANGE = 30.0  # hard out-of-bounds distance from the target


@dataclass(frozen=True)
class RewardConfig:
    goal_reward: float = 3.0
    collision_penalty: float = -3.0
    out_of_bounds_penalty: float = -3.0
    gear_change_penalty: float = -0.01
    idle_penalty: float = -0.2
    time_penalty: float = -0.01
    goal_pos_tol: float = 0.2  # meters, at the geometric center
    goal_heading_tol: float = math.radians(3.0)


@dataclass
class Observation:
    """Ego-centric, normalized observation. All numeric entries lie in
    [-1, 1]; masked token slots are zero-filled."""

    ego_steer: float  # steering angle / max_steer
    gear: float  # sign of the last nonzero displacement
    goal: np.ndarray  # (4,) x/R, y/R (clipped), sin(dtheta), cos(dtheta)
    tokens: np.ndarray  # (K, 2) ego-frame obstacle points / R
    mask: np.ndarray  # (K,) True where the slot holds a real point

    def features(self) -> np.ndarray:
        """Ego/goal feature vector consumed by the policy's query token."""
        return np.concatenate(([self.ego_steer, self.gear], self.goal))


@dataclass
class StepOutcome:
    observation: Observation
    reward: float
    done: bool
    info: dict


def check_goal(
    state: VehicleState, goal: Pose2D, spec: VehicleSpec, cfg: RewardConfig
) -> bool:
    """True when the geometric-center distance and the heading difference
    are both within tolerance."""
    d = spec.center_offset
    cx = state.x + d * math.cos(state.theta)
    cy = state.y + d * math.sin(state.theta)
    gx = goal.x + d * math.cos(goal.theta)
    gy = goal.y + d * math.sin(goal.theta)
    if math.hypot(cx - gx, cy - gy) > cfg.goal_pos_tol:
        return False
    return abs(wrap_angle(state.theta - goal.theta)) <= cfg.goal_heading_tol


def build_observation(
    state: VehicleState,
    goal: Pose2D,
    obstacles: np.ndarray,
    horizon: float = DEFAULT_HORIZON,
    k: int = DEFAULT_K,
    max_steer: float = math.radians(32.0),
    gear: float = 0.0,
) -> Observation:
    """Ego-centric observation: obstacles beyond ``horizon`` are dropped,
    the nearest ``k`` survivors (ties by original index) fill the token
    slots, and all positions are divided by ``horizon``."""
    ego = state.pose()
    goal_rel = world_to_ego(ego, goal)
    goal_vec = np.array(
        [
            np.clip(goal_rel.x / horizon, -1.0, 1.0),
            np.clip(goal_rel.y / horizon, -1.0, 1.0),
            math.sin(goal_rel.theta),
            math.cos(goal_rel.theta),
        ]
    )
    tokens = np.zeros((k, 2))
    mask = np.zeros(k, dtype=bool)
    if obstacles.shape[0]:
        local = transform_to_ego(obstacles, ego)
        ranges = np.hypot(local[:, 0], local[:, 1])
        in_range = ranges <= horizon
        local = local[in_range]
        ranges = ranges[in_range]
        if local.shape[0] > k:
            order = np.argsort(ranges, kind="stable")[:k]
            local = local[order]
        n = local.shape[0]
        tokens[:n] = local / horizon
        mask[:n] = True
    return Observation(
        ego_steer=state.delta / max_steer,
        gear=float(gear),
        goal=goal_vec,
        tokens=tokens,
        mask=mask,
    )


class ParkingEnv:
    """Single-scenario episodic environment (one instance per worker;
    instances share no mutable state)."""

    def __init__(
        self,
        spec: VehicleSpec | None = None,
        reward: RewardConfig | None = None,
        horizon: float = DEFAULT_HORIZON,
        k_obstacles: int = DEFAULT_K,
        bounds_margin: float = DEFAULT_BOUNDS_MARGIN,
        max_target_range: float = DEFAULT_MAX_TARGET_RANGE,
    ):
        self.spec = spec or VehicleSpec()
        self.reward_cfg = reward or RewardConfig()
        self.horizon = horizon
        self.k_obstacles = k_obstacles
        self.bounds_margin = bounds_margin
        self.max_target_range = max_target_range
        self._scenario: Scenario | None = None
        self._active = False

    # -- episode lifecycle -------------------------------------------------

    def reset(
        self, scenario: Scenario, init_pose: Pose2D, max_episode_len: int
    ) -> Observation:
        if max_episode_len < 1:
            raise InputError("max_episode_len must be >= 1")
        if collides(init_pose, self.spec, scenario.obstacles):
            raise ResetRejectedError(
                f"scenario '{scenario.id}': initial pose collides"
            )
        self._scenario = scenario
        self._init_pose = init_pose
        self._state = VehicleState.from_pose(init_pose, delta=0.0)
        self._gear = 0
        self._t = 0
        self._max_len = max_episode_len
        self._active = True
        self._actions: list[int] = []
        self._displacements: list[float] = []
        if scenario.obstacles.shape[0]:
            lo = scenario.obstacles.min(axis=0) - self.bounds_margin
            hi = scenario.obstacles.max(axis=0) + self.bounds_margin
            self._bounds = (lo, hi)
        else:
            self._bounds = None
        self._target_center = self.spec.geometric_center(scenario.target_pose)
        return self._observe()

    @property
    def state(self) -> VehicleState:
        return self._state

    @property
    def steps_elapsed(self) -> int:
        return self._t

    def _observe(self) -> Observation:
        return build_observation(
            self._state,
            self._scenario.target_pose,
            self._scenario.obstacles,
            horizon=self.horizon,
            k=self.k_obstacles,
            max_steer=self.spec.max_steer,
            gear=self._gear,
        )

    def _out_of_bounds(self, state: VehicleState) -> bool:
        center = self.spec.geometric_center(state.pose())
        if (
            math.hypot(*(center - self._target_center))
            > self.max_target_range
        ):
            return True
        if self._bounds is not None:
            lo, hi = self._bounds
            if np.any(center < lo) or np.any(center > hi):
                return True
        return False

    def reward_from_flags(self, info: dict) -> float:
        """The reward equation evaluated on emitted event flags."""
        cfg = self.reward_cfg
        return (
            cfg.goal_reward * info["goal_reached"]
            + cfg.collision_penalty * info["collided"]
            + cfg.out_of_bounds_penalty * info["out_of_bounds"]
            + cfg.gear_change_penalty * info["direction_change"]
            + cfg.idle_penalty * info["idle"]
            + cfg.time_penalty
        )

    def step_primitive(self, action_index: int) -> StepOutcome:
        if not self._active:
            raise ProtocolError("step_primitive called on a finished episode")
        if not 0 <= action_index < kinematics.N_ACTIONS:
            raise InputError(f"action index {action_index} out of range")
        action = kinematics.ACTIONS[action_index]
        new_state = kinematics.step(self._state, action, self.spec)

        ds = action.displacement
        idle = ds == 0.0
        motion = 0 if idle else (1 if ds > 0 else -1)
        direction_change = motion != 0 and self._gear != 0 and motion == -self._gear

        # terminal causes, mutually exclusive, checked in priority order
        collided = collides(new_state.pose(), self.spec, self._scenario.obstacles)
        goal = (not collided) and check_goal(
            new_state, self._scenario.target_pose, self.spec, self.reward_cfg
        )
        oob = (not collided) and (not goal) and self._out_of_bounds(new_state)

        self._state = new_state
        self._t += 1
        if motion != 0:
            self._gear = motion
        truncated = not (collided or goal or oob) and self._t >= self._max_len
        done = collided or goal or oob or truncated

        info = {
            "goal_reached": goal,
            "collided": collided,
            "out_of_bounds": oob,
            "truncated": truncated,
            "idle": idle,
            "direction_change": direction_change,
            "steps_elapsed": self._t,
        }
        reward = self.reward_from_flags(info)
        if done:
            self._active = False
        self._actions.append(action_index)
        self._displacements.append(ds)
        return StepOutcome(self._observe(), reward, done, info)

    def chunk_step(self, chunk) -> StepOutcome:
        """Execute up to ``len(chunk)`` primitives as one macro-action,
        stopping at the first terminal primitive and summing rewards."""
        chunk = list(chunk)
        if len(chunk) < 1:
            raise InputError("chunk must contain at least one action index")
        total = 0.0
        any_idle = False
        any_dir_change = False
        executed = 0
        for idx in chunk:
            out = self.step_primitive(idx)
            total += out.reward
            executed += 1
            any_idle = any_idle or out.info["idle"]
            any_dir_change = any_dir_change or out.info["direction_change"]
            if out.done:
                break
        info = dict(out.info)
        info["idle"] = any_idle
        info["direction_change"] = any_dir_change
        info["primitives_executed"] = executed
        return StepOutcome(out.observation, total, out.done, info)

    # -- replay ------------------------------------------------------------

    def replay_log(self, seed: int | None = None) -> dict:
        """Deterministic record of the episode so far."""
        p = self._init_pose
        return {
            "scenario_id": self._scenario.id,
            "init_pose": [p.x, p.y, p.theta],
            "actions": list(self._actions),
            "max_episode_len": self._max_len,
            "seed": seed,
        }

    def displacements(self) -> list[float]:
        """Signed per-primitive displacements of the episode so far."""
        return list(self._displacements)


def save_replay(log: dict, path) -> None:
    Path(path).write_text(json.dumps(log, indent=1))


def load_replay(path) -> dict:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"replay file not found: {path}")
    return json.loads(path.read_text())


def replay_episode(
    env: ParkingEnv, scenario: Scenario, log: dict
) -> list[StepOutcome]:
    """Re-execute a recorded episode step by step."""
    if log.get("scenario_id") not in (None, scenario.id):
        raise InputError(
            f"replay was recorded on '{log.get('scenario_id')}', not '{scenario.id}'"
        )
    init = Pose2D(*(float(v) for v in log["init_pose"]))
    env.reset(scenario, init, int(log.get("max_episode_len", 1000)))
    outcomes = []
    for idx in log["actions"]:
        outcomes.append(env.step_primitive(int(idx)))
    return outcomes
