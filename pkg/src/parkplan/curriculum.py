"""Eight-stage training curriculum.

Difficulty grows by driving the rollout sampler further from the target
pose and widening the heading perturbation: stages 1-2 inherit the rollout
heading, stages 3-7 resample it from a stage-specific range, and stage 8
starts every episode from the scenario's logged initial pose. Episode caps
per stage: 100, 200, 400, 400, 800, 800, 800, 1000 primitive steps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, SamplingExhaustedError
from .geometry import Pose2D, VehicleSpec
from .scenarios import RolloutParams, Scenario, rollout_initial_pose

MAX_EPISODE_LEN = (100, 200, 400, 400, 800, 800, 800, 1000)
# rollout distance per stage 1-7 in primitive steps (12 steps ~ 1 m);
# stage 8 ignores this field (logged poses)
DEFAULT_ROLLOUT_STEPS = (12, 25, 50, 75, 100, 150, 200, 200)
# heading half-widths for the resampling stages 3-7 widen linearly
_RESAMPLE_HALFWIDTH_DEG = {3: 15.0, 4: 33.75, 5: 52.5, 6: 71.25, 7: 90.0}


@dataclass(frozen=True)
class CurriculumStage:
    index: int  # 1..8
    rollout_steps: int
    heading_mode: str  # inherit | resample | logged
    heading_range: tuple[float, float]
    max_episode_len: int


def default_stages() -> tuple[CurriculumStage, ...]:
    stages = []
    for i in range(1, 9):
        if i <= 2:
            mode, rng = "inherit", (0.0, 0.0)
        elif i <= 7:
            hw = math.radians(_RESAMPLE_HALFWIDTH_DEG[i])
            mode, rng = "resample", (-hw, hw)
        else:
            mode, rng = "logged", (0.0, 0.0)
        stages.append(
            CurriculumStage(
                index=i,
                rollout_steps=DEFAULT_ROLLOUT_STEPS[i - 1],
                heading_mode=mode,
                heading_range=rng,
                max_episode_len=MAX_EPISODE_LEN[i - 1],
            )
        )
    return tuple(stages)


def stage_schedule(
    total_iterations: int, stages: tuple[CurriculumStage, ...] | None = None
) -> list[tuple[range, CurriculumStage]]:
    """Partition ``total_iterations`` into contiguous equal blocks, one per
    stage (earlier blocks absorb the remainder)."""
    stages = stages or default_stages()
    n = len(stages)
    if total_iterations < n:
        raise ConfigurationError(
            f"need at least {n} iterations to visit every stage, "
            f"got {total_iterations}"
        )
    base, extra = divmod(total_iterations, n)
    blocks = []
    start = 0
    for i, stage in enumerate(stages):
        size = base + (1 if i < extra else 0)
        blocks.append((range(start, start + size), stage))
        start += size
    return blocks


def stage_for_iteration(
    iteration: int,
    total_iterations: int,
    stages: tuple[CurriculumStage, ...] | None = None,
) -> CurriculumStage:
    iteration = min(max(iteration, 0), total_iterations - 1)
    for block, stage in stage_schedule(total_iterations, stages):
        if iteration in block:
            return stage
    raise AssertionError("unreachable: schedule covers every iteration")


def sample_init(
    stage: CurriculumStage,
    scenario: Scenario,
    spec: VehicleSpec,
    rng: np.random.Generator,
    stages: tuple[CurriculumStage, ...] | None = None,
) -> Pose2D:
    """Initial pose for one episode at the given stage.

    Stage 8 returns the logged pose; other stages sample via the rollout.
    If heading resampling exhausts its attempts (cramped scenes), the
    episode falls back to the previous stage's parameters.
    """
    if stage.heading_mode == "logged":
        return scenario.initial_pose
    stages = stages or default_stages()
    # fall back by table position, not stage.index: custom tables may
    # number stages arbitrarily
    pos = next((i for i, s in enumerate(stages) if s is stage or s == stage), 0)
    while True:
        params = RolloutParams(
            steps=stage.rollout_steps,
            heading_mode=stage.heading_mode,
            heading_range=stage.heading_range,
        )
        try:
            return rollout_initial_pose(scenario, spec, params, rng)
        except SamplingExhaustedError:
            if pos <= 0:
                raise
            pos -= 1
            stage = stages[pos]
