"""Vehicle footprint construction, SE(2) transforms, and collision checks.

The vehicle frame has the rear-axle center at the origin, +x forward and
+y to the left. The footprint is a chamfered rectangle: the four corners of
the L x W body box are cropped by a longitudinal offset ``crop_l`` and a
lateral offset ``crop_w``, giving a convex eight-vertex polygon.

Obstacles are sparse contour points; a pose collides when any point lies
inside or on the boundary of the world-frame footprint.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from . import kernels
from .errors import ConfigurationError

TWO_PI = 2.0 * math.pi

# slack for the signed-area half-plane tests; desk-scale coordinates make
# this effectively exact while still counting boundary points as hits
COLLISION_TOL = 1e-9


def wrap_angle(theta):
    """Normalize an angle (scalar or array) to (-pi, pi].

    In-range values pass through bit-exactly.
    """
    if isinstance(theta, (float, int)):
        if -math.pi < theta <= math.pi:
            return float(theta)
        return math.pi - (math.pi - theta) % TWO_PI
    theta = np.asarray(theta)
    wrapped = np.pi - (np.pi - theta) % TWO_PI
    return np.where((theta > -np.pi) & (theta <= np.pi), theta, wrapped)


@dataclass(frozen=True)
class Pose2D:
    """Planar pose: rear-axle position in meters, heading in radians."""

    x: float
    y: float
    theta: float

    def __post_init__(self):
        object.__setattr__(self, "theta", float(wrap_angle(self.theta)))

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.theta])


@dataclass(frozen=True)
class VehicleSpec:
    """Physical vehicle parameters (meters / radians)."""

    wheelbase: float = 3.0
    width: float = 2.0
    length: float = 4.95
    rear_overhang: float = 1.025
    front_overhang: float = 3.925
    max_steer: float = math.radians(32.0)
    crop_l: float = 0.3
    crop_w: float = 0.2

    def __post_init__(self):
        if min(self.wheelbase, self.width, self.length) <= 0:
            raise ConfigurationError("vehicle dimensions must be positive")
        if abs(self.rear_overhang + self.front_overhang - self.length) > 1e-9:
            raise ConfigurationError(
                "rear_overhang + front_overhang must equal length "
                f"({self.rear_overhang} + {self.front_overhang} != {self.length})"
            )
        if not 0 < self.crop_l < self.front_overhang:
            raise ConfigurationError("crop_l must lie in (0, front_overhang)")
        if not 0 < self.crop_w < self.width / 2:
            raise ConfigurationError("crop_w must lie in (0, width/2)")
        if self.max_steer <= 0:
            raise ConfigurationError("max_steer must be positive")

    @property
    def center_offset(self) -> float:
        """Distance from the rear axle to the body's geometric center."""
        return (self.front_overhang - self.rear_overhang) / 2.0

    @property
    def min_turn_radius(self) -> float:
        return self.wheelbase / math.tan(self.max_steer)

    def geometric_center(self, pose: Pose2D) -> np.ndarray:
        d = self.center_offset
        return np.array(
            [pose.x + d * math.cos(pose.theta), pose.y + d * math.sin(pose.theta)]
        )


@dataclass(frozen=True)
class Footprint:
    """Eight-vertex convex body polygon in the vehicle frame (CCW)."""

    vertices: tuple[tuple[float, float], ...]

    def as_array(self) -> np.ndarray:
        return np.array(self.vertices)


@lru_cache(maxsize=None)
def footprint_polygon(spec: VehicleSpec) -> Footprint:
    """Chamfered body polygon for ``spec``, counter-clockwise from the
    rear-right cropped corner."""
    lb, lf = spec.rear_overhang, spec.front_overhang
    hw, cl, cw = spec.width / 2.0, spec.crop_l, spec.crop_w
    return Footprint(
        (
            (-lb + cl, -hw),
            (lf - cl, -hw),
            (lf, -hw + cw),
            (lf, hw - cw),
            (lf - cl, hw),
            (-lb + cl, hw),
            (-lb, hw - cw),
            (-lb, -hw + cw),
        )
    )


@lru_cache(maxsize=None)
def _footprint_array(spec: VehicleSpec) -> np.ndarray:
    arr = footprint_polygon(spec).as_array()
    arr.setflags(write=False)
    return arr


def _rotation(theta: float) -> tuple[float, float]:
    return math.cos(theta), math.sin(theta)


def transform_to_world(points, pose: Pose2D) -> np.ndarray:
    """Rigid transform of (N, 2) points (or a single point) out of the frame
    anchored at ``pose``."""
    pts = np.asarray(points, dtype=float)
    c, s = _rotation(pose.theta)
    x = pts[..., 0]
    y = pts[..., 1]
    return np.stack([pose.x + c * x - s * y, pose.y + s * x + c * y], axis=-1)


def transform_to_ego(points, pose: Pose2D) -> np.ndarray:
    """Inverse of :func:`transform_to_world`."""
    pts = np.asarray(points, dtype=float)
    c, s = _rotation(pose.theta)
    dx = pts[..., 0] - pose.x
    dy = pts[..., 1] - pose.y
    return np.stack([c * dx + s * dy, -s * dx + c * dy], axis=-1)


def to_world(footprint: Footprint, pose: Pose2D) -> np.ndarray:
    """World-frame footprint vertices at ``pose`` (orientation preserved)."""
    return transform_to_world(footprint.as_array(), pose)


def world_to_ego(ego: Pose2D, p):
    """Express a world-frame pose or point in the frame anchored at ``ego``."""
    if isinstance(p, Pose2D):
        xy = transform_to_ego((p.x, p.y), ego)
        return Pose2D(float(xy[0]), float(xy[1]), wrap_angle(p.theta - ego.theta))
    return transform_to_ego(p, ego)


def ego_to_world(ego: Pose2D, p):
    """Inverse of :func:`world_to_ego`."""
    if isinstance(p, Pose2D):
        xy = transform_to_world((p.x, p.y), ego)
        return Pose2D(float(xy[0]), float(xy[1]), wrap_angle(p.theta + ego.theta))
    return transform_to_world(p, ego)


def as_obstacle_array(obstacles) -> np.ndarray:
    """Coerce an obstacle point sequence to a C-contiguous (N, 2) float array."""
    if isinstance(obstacles, np.ndarray) and obstacles.dtype == np.float64:
        arr = obstacles
    else:
        arr = np.asarray(obstacles, dtype=np.float64)
    if arr.size == 0:
        return np.empty((0, 2))
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError(f"obstacles must be (N, 2), got shape {arr.shape}")
    return np.ascontiguousarray(arr)


def collides(
    pose: Pose2D,
    spec: VehicleSpec,
    obstacles,
    tol: float = COLLISION_TOL,
) -> bool:
    """True iff any obstacle point lies inside or on the footprint boundary."""
    obs = as_obstacle_array(obstacles)
    if obs.shape[0] == 0:
        return False
    verts = _footprint_array(spec)
    idx = kernels.first_colliding_pose(
        np.array([pose.x]), np.array([pose.y]), np.array([pose.theta]), verts, obs, tol
    )
    return int(idx) >= 0


def poses_collide(
    xs: np.ndarray,
    ys: np.ndarray,
    thetas: np.ndarray,
    spec: VehicleSpec,
    obstacles,
    tol: float = COLLISION_TOL,
) -> int:
    """Index of the first colliding pose in a sweep, or -1 if all are free."""
    obs = as_obstacle_array(obstacles)
    if obs.shape[0] == 0:
        return -1
    verts = _footprint_array(spec)
    return int(
        kernels.first_colliding_pose(
            np.ascontiguousarray(xs, dtype=np.float64),
            np.ascontiguousarray(ys, dtype=np.float64),
            np.ascontiguousarray(thetas, dtype=np.float64),
            verts,
            obs,
            tol,
        )
    )


def polygon_area(vertices: Sequence[Sequence[float]] | np.ndarray) -> float:
    """Shoelace area of a simple polygon (positive for CCW order)."""
    v = np.asarray(vertices, dtype=float)
    x, y = v[:, 0], v[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))
