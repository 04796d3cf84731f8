import math

import numpy as np
import pytest

from parkplan.env import (
    ParkingEnv,
    RewardConfig,
    build_observation,
    check_goal,
    load_replay,
    replay_episode,
    save_replay,
)
from parkplan.errors import InputError, ProtocolError, ResetRejectedError
from parkplan.geometry import Pose2D, VehicleSpec, ego_to_world, transform_to_world
from parkplan.kinematics import VehicleState
from parkplan.scenarios import Scenario, synth_scenario


def open_scenario(target=Pose2D(0, 0, 0), obstacles=None):
    obs = np.empty((0, 2)) if obstacles is None else np.asarray(obstacles, dtype=float)
    return Scenario("open", Pose2D(-5, 0, 0), target, obs)


def make_env(**kw):
    return ParkingEnv(**kw)


# -- goal check ---------------------------------------------------------------


def test_goal_at_exact_pose(spec):
    cfg = RewardConfig()
    assert check_goal(VehicleState(1, 2, 0.3, 0), Pose2D(1, 2, 0.3), spec, cfg)


def test_goal_longitudinal_offset(spec):
    cfg = RewardConfig()
    # aligned poses: center offset equals the axle offset
    assert check_goal(VehicleState(0.19, 0, 0, 0), Pose2D(0, 0, 0), spec, cfg)
    assert not check_goal(VehicleState(0.21, 0, 0, 0), Pose2D(0, 0, 0), spec, cfg)


def test_goal_heading_tolerance(spec):
    cfg = RewardConfig()
    ok = VehicleState(0, 0, math.radians(2.9), 0)
    bad = VehicleState(0, 0, math.radians(3.5), 0)
    # heading rotation moves the center slightly; compare at the same center
    assert not check_goal(bad, Pose2D(0, 0, 0), spec, cfg)
    assert check_goal(ok, Pose2D(0, 0, 0), spec, cfg) == (
        math.hypot(*(spec.geometric_center(ok.pose()) - spec.geometric_center(Pose2D(0, 0, 0)))) <= cfg.goal_pos_tol
    )


# -- observation --------------------------------------------------------------


def test_observation_no_obstacles(spec):
    obs = build_observation(VehicleState(0, 0, 0, 0), Pose2D(3, 0, 0), np.empty((0, 2)))
    assert not obs.mask.any()
    assert np.all(obs.tokens == 0)


def test_observation_goal_at_self(spec):
    obs = build_observation(VehicleState(2, 1, 0.4, 0), Pose2D(2, 1, 0.4), np.empty((0, 2)))
    np.testing.assert_allclose(obs.goal, [0, 0, 0, 1], atol=1e-12)


def test_observation_goal_five_meters_ahead(spec):
    obs = build_observation(
        VehicleState(-5, 0, 0, 0), Pose2D(0, 0, 0), np.empty((0, 2)), horizon=15.0
    )
    np.testing.assert_allclose(obs.goal, [5.0 / 15.0, 0, 0, 1], atol=1e-12)


def test_observation_range_boundary_kept(spec):
    obs = build_observation(
        VehicleState(0, 0, 0, 0), Pose2D(1, 0, 0),
        np.array([[15.0, 0.0]]), horizon=15.0, k=4,
    )
    assert obs.mask[0] and not obs.mask[1:].any()
    np.testing.assert_allclose(obs.tokens[0], [1.0, 0.0], atol=1e-12)


def test_observation_beyond_range_dropped(spec):
    obs = build_observation(
        VehicleState(0, 0, 0, 0), Pose2D(1, 0, 0),
        np.array([[15.0001, 0.0]]), horizon=15.0, k=4,
    )
    assert not obs.mask.any()


def test_observation_nearest_k_matches_bruteforce(rng):
    k = 16
    for _ in range(50):
        state = VehicleState(
            rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-math.pi, math.pi), 0
        )
        pts = rng.uniform(-12, 12, size=(2 * k, 2))
        obs = build_observation(state, Pose2D(0, 0, 0), pts, horizon=15.0, k=k)
        # brute force: sort by distance to the ego, stable on index
        rel = pts - [state.x, state.y]
        c, s = math.cos(state.theta), math.sin(state.theta)
        local = np.stack([c * rel[:, 0] + s * rel[:, 1],
                          -s * rel[:, 0] + c * rel[:, 1]], axis=1)
        d = np.hypot(local[:, 0], local[:, 1])
        keep = [i for i in np.argsort(d, kind="stable") if d[i] <= 15.0][:k]
        expected = local[keep] / 15.0
        got = obs.tokens[obs.mask]
        np.testing.assert_allclose(got, expected, atol=1e-12)


def test_observation_bounded(rng):
    for _ in range(100):
        state = VehicleState(
            rng.uniform(-40, 40), rng.uniform(-40, 40),
            rng.uniform(-math.pi, math.pi), rng.uniform(-0.5, 0.5),
        )
        pts = rng.uniform(-60, 60, size=(64, 2))
        obs = build_observation(state, Pose2D(*rng.uniform(-50, 50, 2), 0.0), pts)
        assert abs(obs.ego_steer) <= 1.0 or abs(obs.ego_steer) <= 0.5 / math.radians(32)
        assert np.all(np.abs(obs.goal) <= 1.0 + 1e-12)
        assert np.all(np.abs(obs.tokens) <= 1.0 + 1e-12)


def test_observation_ego_frame_invariance(rng):
    spec = VehicleSpec()
    for _ in range(50):
        state = VehicleState(1.0, -2.0, 0.7, 0.1)
        goal = Pose2D(4.0, 1.0, 1.2)
        pts = rng.uniform(-10, 10, size=(32, 2))
        frame = Pose2D(*rng.uniform(-20, 20, 2), rng.uniform(-math.pi, math.pi))
        moved_state = VehicleState.from_pose(
            ego_to_world(frame, state.pose()), state.delta
        )
        a = build_observation(state, goal, pts, gear=1)
        b = build_observation(
            moved_state, ego_to_world(frame, goal), transform_to_world(pts, frame),
            gear=1,
        )
        np.testing.assert_allclose(a.goal, b.goal, atol=1e-9)
        np.testing.assert_allclose(a.tokens, b.tokens, atol=1e-9)
        np.testing.assert_array_equal(a.mask, b.mask)


# -- stepping and rewards ------------------------------------------------------


def test_reset_rejects_colliding_pose():
    env = make_env()
    s = open_scenario(obstacles=[[0.0, 0.0]])
    with pytest.raises(ResetRejectedError):
        env.reset(s, Pose2D(0, 0, 0), 100)


def test_plain_forward_step_reward():
    env = make_env()
    env.reset(open_scenario(target=Pose2D(20, 0, 0)), Pose2D(-5, 0, 0), 100)
    out = env.step_primitive(1)
    assert out.reward == -0.01
    assert not out.done


def test_goal_step_reward():
    env = make_env()
    env.reset(open_scenario(target=Pose2D(0, 0, 0)), Pose2D(-0.05, 0, 0), 100)
    out = env.step_primitive(1)
    assert out.info["goal_reached"]
    assert out.done
    assert math.isclose(out.reward, 2.99)


def test_collision_step_reward():
    env = make_env()
    s = open_scenario(target=Pose2D(30, 0, 0), obstacles=[[4.0, 0.0]])
    env.reset(s, Pose2D(0, 0, 0), 100)
    out = env.step_primitive(1)
    assert out.info["collided"] and out.done
    assert math.isclose(out.reward, -3.01)


def test_presteer_step_reward():
    env = make_env()
    env.reset(open_scenario(target=Pose2D(20, 0, 0)), Pose2D(-5, 0, 0), 100)
    out = env.step_primitive(6)
    assert out.info["idle"]
    assert math.isclose(out.reward, -0.21)


def test_gear_change_step_reward():
    env = make_env()
    env.reset(open_scenario(target=Pose2D(20, 0, 0)), Pose2D(-5, 0, 0), 100)
    env.step_primitive(1)
    out = env.step_primitive(4)
    assert out.info["direction_change"]
    assert math.isclose(out.reward, -0.02)


def test_idle_does_not_reset_gear_memory():
    env = make_env()
    env.reset(open_scenario(target=Pose2D(20, 0, 0)), Pose2D(-5, 0, 0), 100)
    env.step_primitive(1)  # forward: gear +1
    env.step_primitive(6)  # pre-steer: idle, keeps gear
    out = env.step_primitive(4)  # reverse: change vs last nonzero sign
    assert out.info["direction_change"]


def test_out_of_bounds_far_from_target():
    env = make_env(max_target_range=30.0)
    env.reset(open_scenario(target=Pose2D(0, 0, 0)), Pose2D(-29.9, 0, math.pi), 10_000)
    out = None
    for _ in range(100):
        out = env.step_primitive(1)  # drive away from the target
        if out.done:
            break
    assert out.info["out_of_bounds"]
    assert math.isclose(out.reward, -3.01)


def test_truncation_at_step_limit():
    env = make_env()
    env.reset(open_scenario(target=Pose2D(20, 0, 0)), Pose2D(-5, 0, 0), 3)
    env.step_primitive(1)
    env.step_primitive(1)
    out = env.step_primitive(1)
    assert out.done and out.info["truncated"]
    assert out.reward == -0.01  # no terminal bonus or penalty
    assert not (out.info["goal_reached"] or out.info["collided"] or out.info["out_of_bounds"])


def test_step_after_done_raises():
    env = make_env()
    env.reset(open_scenario(target=Pose2D(0, 0, 0)), Pose2D(-0.05, 0, 0), 100)
    env.step_primitive(1)
    with pytest.raises(ProtocolError):
        env.step_primitive(1)


def test_terminal_cause_exclusive(rng):
    env = make_env()
    s = synth_scenario("perpendicular_bay")
    for _ in range(30):
        env.reset(s, s.initial_pose, 60)
        done = False
        while not done:
            out = env.step_primitive(int(rng.integers(8)))
            done = out.done
        causes = [
            out.info["goal_reached"], out.info["collided"],
            out.info["out_of_bounds"], out.info["truncated"],
        ]
        assert sum(causes) == 1


def test_reward_decomposition_matches_flags(rng):
    env = make_env()
    s = synth_scenario("perpendicular_bay")
    env.reset(s, s.initial_pose, 200)
    done = False
    while not done:
        out = env.step_primitive(int(rng.integers(8)))
        assert out.reward == env.reward_from_flags(out.info)
        done = out.done


# -- chunk wrapper -------------------------------------------------------------


def test_chunk_uneventful_sum():
    env = make_env()
    env.reset(open_scenario(target=Pose2D(20, 0, 0)), Pose2D(-5, 0, 0), 100)
    out = env.chunk_step([1, 1, 1, 1])
    assert math.isclose(out.reward, -0.04)
    assert not out.done
    assert out.info["primitives_executed"] == 4


def test_chunk_breaks_on_collision():
    env = make_env()
    s = open_scenario(target=Pose2D(30, 0, 0), obstacles=[[4.05, 0.0]])
    env.reset(s, Pose2D(0, 0, 0), 100)
    out = env.chunk_step([1, 1, 1, 1])
    assert out.done and out.info["collided"]
    assert out.info["primitives_executed"] == 2
    assert math.isclose(out.reward, -0.01 + -3.01)


def test_chunk_of_one_equals_primitive():
    for idx in range(8):
        e1, e2 = make_env(), make_env()
        s = open_scenario(target=Pose2D(20, 0, 0))
        e1.reset(s, Pose2D(-5, 0, 0), 100)
        e2.reset(s, Pose2D(-5, 0, 0), 100)
        a = e1.chunk_step([idx])
        b = e2.step_primitive(idx)
        assert a.reward == b.reward and a.done == b.done
        assert e1.state == e2.state


def test_chunk_additivity_random(rng):
    s = synth_scenario("perpendicular_bay")
    for _ in range(200):
        h = int(rng.choice([1, 2, 4, 8]))
        chunk = [int(a) for a in rng.integers(0, 8, size=h)]
        e1, e2 = make_env(), make_env()
        e1.reset(s, s.initial_pose, 50)
        e2.reset(s, s.initial_pose, 50)
        out = e1.chunk_step(chunk)
        total = 0.0
        done = False
        executed = 0
        for idx in chunk:
            r = e2.step_primitive(idx)
            total += r.reward
            executed += 1
            if r.done:
                done = True
                break
        assert out.reward == total
        assert out.done == done
        assert out.info["primitives_executed"] == executed
        assert e1.state == e2.state


def test_empty_chunk_rejected():
    env = make_env()
    env.reset(open_scenario(target=Pose2D(20, 0, 0)), Pose2D(-5, 0, 0), 100)
    with pytest.raises(InputError):
        env.chunk_step([])


# -- replay ---------------------------------------------------------------------


def test_replay_roundtrip(tmp_path, rng):
    s = synth_scenario("corridor")
    env = make_env()
    env.reset(s, s.initial_pose, 120)
    rewards = []
    while True:
        out = env.step_primitive(int(rng.integers(8)))
        rewards.append(out.reward)
        if out.done:
            break
    log = env.replay_log(seed=1234)
    save_replay(log, tmp_path / "replay.json")
    log2 = load_replay(tmp_path / "replay.json")
    env2 = make_env()
    outcomes = replay_episode(env2, s, log2)
    assert [o.reward for o in outcomes] == rewards
    assert env2.state == env.state
