import math

import numpy as np
import pytest

from parkplan.curriculum import (
    MAX_EPISODE_LEN,
    CurriculumStage,
    default_stages,
    sample_init,
    stage_for_iteration,
    stage_schedule,
)
from parkplan.errors import ConfigurationError
from parkplan.geometry import Pose2D, collides
from parkplan.scenarios import Scenario, synth_scenario


def test_default_stage_table():
    stages = default_stages()
    assert len(stages) == 8
    assert tuple(s.max_episode_len for s in stages) == MAX_EPISODE_LEN
    assert [s.heading_mode for s in stages[:2]] == ["inherit", "inherit"]
    assert all(s.heading_mode == "resample" for s in stages[2:7])
    assert stages[7].heading_mode == "logged"
    steps = [s.rollout_steps for s in stages]
    assert steps == sorted(steps)


def test_schedule_partition():
    blocks = stage_schedule(80)
    assert len(blocks) == 8
    assert blocks[0][0] == range(0, 10)
    assert blocks[-1][0] == range(70, 80)
    # uneven split: earlier stages absorb the remainder
    blocks = stage_schedule(11)
    sizes = [len(b[0]) for b in blocks]
    assert sum(sizes) == 11 and max(sizes) - min(sizes) == 1


def test_schedule_requires_enough_iterations():
    with pytest.raises(ConfigurationError):
        stage_schedule(7)


def test_stage_lookup_edges():
    assert stage_for_iteration(0, 80).index == 1
    assert stage_for_iteration(79, 80).index == 8
    assert stage_for_iteration(39, 80).index == 4
    assert stage_for_iteration(40, 80).max_episode_len == 800


def test_stage8_uses_logged_pose(spec, rng):
    s = synth_scenario("perpendicular_bay")
    stage = default_stages()[7]
    assert sample_init(stage, s, spec, rng) == s.initial_pose


def test_stage1_distance_bound_and_inherited_heading(spec, rng):
    s = Scenario("open", Pose2D(0, 0, 0), Pose2D(0, 0, 0), np.empty((0, 2)))
    stage = default_stages()[0]
    for _ in range(100):
        pose = sample_init(stage, s, spec, rng)
        d = math.hypot(pose.x, pose.y)
        assert d <= stage.rollout_steps * 0.08 + 1e-12
        # inherit mode: final heading produced by the rollout itself; from a
        # straight start, 12 steps of +-8 deg steering stay within the arc bound
        assert abs(pose.theta) <= stage.rollout_steps * 0.08 / spec.min_turn_radius + 1e-9


def test_stage5_heading_inside_range_and_free(spec, rng):
    s = synth_scenario("perpendicular_bay", corridor_width=8.0)
    stages = default_stages()
    stage = stages[4]
    hw = math.radians(52.5)
    for _ in range(50):
        pose = sample_init(stage, s, spec, rng)
        assert not collides(pose, spec, s.obstacles)
    # compare against the same rollout with inherit mode under the same seed:
    # the heading offset must lie inside the stage-5 range
    seed = 99
    inherit = CurriculumStage(5, stage.rollout_steps, "inherit", (0.0, 0.0),
                              stage.max_episode_len)
    base = sample_init(inherit, s, spec, np.random.default_rng(seed))
    resampled = sample_init(stage, s, spec, np.random.default_rng(seed))
    diff = abs(resampled.theta - base.theta)
    diff = min(diff, 2 * math.pi - diff)
    assert diff <= hw + 1e-9
    assert (resampled.x, resampled.y) == (base.x, base.y)


def test_sample_init_deterministic(spec):
    s = synth_scenario("dead_end")
    stage = default_stages()[3]
    a = sample_init(stage, s, spec, np.random.default_rng(5))
    b = sample_init(stage, s, spec, np.random.default_rng(5))
    assert a == b


def test_mean_distance_nondecreasing_over_stages(spec):
    s = Scenario("open", Pose2D(0, 0, 0), Pose2D(0, 0, 0), np.empty((0, 2)))
    rng = np.random.default_rng(0)
    means = []
    for stage in default_stages()[:7]:
        d = [
            math.hypot(p.x, p.y)
            for p in (sample_init(stage, s, spec, rng) for _ in range(300))
        ]
        means.append(float(np.mean(d)))
    assert all(b >= a - 1e-9 for a, b in zip(means, means[1:])), means
