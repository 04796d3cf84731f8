import math

import numpy as np
import pytest

from parkplan.errors import ConfigurationError
from parkplan.geometry import (
    Pose2D,
    VehicleSpec,
    collides,
    ego_to_world,
    footprint_polygon,
    polygon_area,
    to_world,
    world_to_ego,
    wrap_angle,
)
from oracles import point_in_polygon_raycast


def test_wrap_angle_range():
    for theta in np.linspace(-11.0, 11.0, 1001):
        w = wrap_angle(theta)
        assert -math.pi < w <= math.pi
        assert math.isclose(math.sin(w), math.sin(theta), abs_tol=1e-12)
        assert math.isclose(math.cos(w), math.cos(theta), abs_tol=1e-12)
    assert wrap_angle(math.pi) == math.pi
    assert wrap_angle(-math.pi) == math.pi


def test_footprint_matches_reference_matrix(spec):
    fp = footprint_polygon(spec).as_array()
    assert fp.shape == (8, 2)
    np.testing.assert_allclose(fp[0], [-0.725, -1.0])
    np.testing.assert_allclose(fp[2], [3.925, -0.8])
    np.testing.assert_allclose(fp[3], [3.925, 0.8])
    np.testing.assert_allclose(fp[7], [-1.025, -0.8])


def test_footprint_is_ccw_convex_and_contains_origin(spec):
    fp = footprint_polygon(spec).as_array()
    # every edge turn has the same (positive) orientation
    for i in range(8):
        a, b, c = fp[i], fp[(i + 1) % 8], fp[(i + 2) % 8]
        cross = (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0])
        assert cross > 0
    assert collides(Pose2D(0, 0, 0), spec, [(0.0, 0.0)])


def test_footprint_convex_for_random_valid_specs(rng):
    for _ in range(200):
        length = rng.uniform(3.0, 6.0)
        rear = rng.uniform(0.5, length / 2)
        width = rng.uniform(1.4, 2.4)
        spec = VehicleSpec(
            wheelbase=rng.uniform(2.0, 3.5),
            width=width,
            length=length,
            rear_overhang=rear,
            front_overhang=length - rear,
            crop_l=rng.uniform(0.05, min(0.6, (length - rear) * 0.9)),
            crop_w=rng.uniform(0.05, width / 2 * 0.9),
        )
        fp = footprint_polygon(spec).as_array()
        assert fp.shape == (8, 2)
        for i in range(8):
            a, b, c = fp[i], fp[(i + 1) % 8], fp[(i + 2) % 8]
            cross = (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0])
            assert cross > 0


def test_footprint_area_below_plain_rectangle(spec):
    fp = footprint_polygon(spec).as_array()
    area = polygon_area(fp)
    assert 0 < area < spec.length * spec.width
    # shoelace of the chamfered rectangle: L*W minus four corner triangles
    expected = spec.length * spec.width - 2.0 * spec.crop_l * spec.crop_w
    assert math.isclose(area, expected, rel_tol=1e-12)


def test_footprint_degenerates_to_rectangle_with_tiny_crops():
    eps = 1e-9
    spec = VehicleSpec(crop_l=eps, crop_w=eps)
    area = polygon_area(footprint_polygon(spec).as_array())
    assert math.isclose(area, spec.length * spec.width, rel_tol=1e-6)


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(rear_overhang=1.0),  # L_B + L_F != L
        dict(crop_l=0.0),
        dict(crop_l=4.0),  # > front overhang
        dict(crop_w=1.0),  # = W/2
        dict(max_steer=0.0),
        dict(width=-2.0, crop_w=0.2),
    ],
)
def test_invalid_spec_rejected(kwargs):
    with pytest.raises(ConfigurationError):
        VehicleSpec(**kwargs)


def test_to_world_identity_and_half_turn(spec):
    fp = footprint_polygon(spec)
    np.testing.assert_allclose(to_world(fp, Pose2D(0, 0, 0)), fp.as_array())
    flipped = to_world(fp, Pose2D(0, 0, math.pi))
    np.testing.assert_allclose(flipped, -fp.as_array(), atol=1e-12)


def test_to_world_hand_example(spec):
    fp = footprint_polygon(spec)
    world = to_world(fp, Pose2D(1.0, 2.0, math.pi / 2))
    np.testing.assert_allclose(world[2], [1.8, 5.925], atol=1e-12)


def test_world_to_ego_of_self_is_origin():
    ego = Pose2D(3.0, -2.0, 0.7)
    rel = world_to_ego(ego, ego)
    assert abs(rel.x) < 1e-12 and abs(rel.y) < 1e-12 and abs(rel.theta) < 1e-12


def test_world_to_ego_hand_rotation():
    ego = Pose2D(0.0, 0.0, math.pi / 2)
    p = world_to_ego(ego, np.array([0.0, 5.0]))
    np.testing.assert_allclose(p, [5.0, 0.0], atol=1e-12)


def test_transform_round_trip(rng):
    for _ in range(1000):
        ego = Pose2D(*rng.uniform(-10, 10, size=2), rng.uniform(-math.pi, math.pi))
        pt = rng.uniform(-20, 20, size=2)
        back = ego_to_world(ego, world_to_ego(ego, pt))
        np.testing.assert_allclose(back, pt, atol=1e-12)
    pose = Pose2D(1.0, 2.0, 2.5)
    back = ego_to_world(ego, world_to_ego(ego, pose))
    assert abs(back.x - pose.x) < 1e-12
    assert abs(back.y - pose.y) < 1e-12
    assert abs(wrap_angle(back.theta - pose.theta)) < 1e-12


def test_collides_examples(spec):
    assert collides(Pose2D(0, 0, 0), spec, [(0.0, 0.0)])
    assert not collides(Pose2D(0, 0, 0), spec, [(10.0, 10.0)])
    # inside the plain rectangle but outside the chamfered corner
    assert not collides(Pose2D(0, 0, 0), spec, [(3.9, 0.97)])
    assert collides(Pose2D(0, 0, 0), spec, [(3.9, 0.81)])
    assert not collides(Pose2D(0, 0, 0), spec, [])


def test_collides_boundary_counts(spec):
    assert collides(Pose2D(0, 0, 0), spec, [(3.925, 0.0)])
    assert collides(Pose2D(0, 0, 0), spec, [(0.0, 1.0)])


def test_collides_agrees_with_raycast_oracle(spec, rng):
    fp = footprint_polygon(spec).as_array()
    for _ in range(2000):
        pose = Pose2D(
            rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-math.pi, math.pi)
        )
        pt = rng.uniform(-8, 8, size=2)
        world_poly = to_world(footprint_polygon(spec), pose)
        expected = point_in_polygon_raycast(pt[0], pt[1], world_poly)
        assert collides(pose, spec, [pt]) == expected


def test_collides_rigid_transform_invariance(spec, rng):
    for _ in range(300):
        pose = Pose2D(
            rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-math.pi, math.pi)
        )
        pts = rng.uniform(-6, 6, size=(20, 2))
        frame = Pose2D(
            rng.uniform(-9, 9), rng.uniform(-9, 9), rng.uniform(-math.pi, math.pi)
        )
        moved_pose = ego_to_world(frame, pose)
        moved_pts = ego_to_world(frame, pts)
        assert collides(pose, spec, pts) == collides(moved_pose, spec, moved_pts)
