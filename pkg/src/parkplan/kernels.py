"""Hot numeric kernels: point-in-polygon tests, pose sweeps, arc integration.

Each kernel exists twice: a loop-style implementation compiled with numba's
``@njit`` and a vectorized pure-numpy fallback. The active path is chosen at
import time; set ``PARKPLAN_NUMBA=0`` in the environment to force the numpy
fallback (used by the benchmark in ``benchmarks/bench_kernels.py`` and as an
escape hatch on platforms where numba is unavailable).

All kernels take float64 C-contiguous arrays. Polygons are convex and
counter-clockwise; a point on the boundary counts as inside (tolerance
``tol`` on the edge cross products).
"""

from __future__ import annotations

import math
import os

import numpy as np

__all__ = [
    "NUMBA_ENABLED",
    "point_in_convex_polygon",
    "first_colliding_pose",
    "integrate_arc",
    "IMPLEMENTATIONS",
]


def _point_in_convex_polygon_py(points, verts, tol):
    n = points.shape[0]
    m = verts.shape[0]
    out = np.empty(n, dtype=np.bool_)
    for i in range(n):
        px = points[i, 0]
        py = points[i, 1]
        inside = True
        for j in range(m):
            ax = verts[j, 0]
            ay = verts[j, 1]
            bx = verts[(j + 1) % m, 0]
            by = verts[(j + 1) % m, 1]
            cross = (bx - ax) * (py - ay) - (by - ay) * (px - ax)
            if cross < -tol:
                inside = False
                break
        out[i] = inside
    return out


def _point_in_convex_polygon_np(points, verts, tol):
    a = verts
    b = np.roll(verts, -1, axis=0)
    # cross((b - a), (p - a)) >= -tol for every edge of a CCW polygon
    cross = (b[:, 0] - a[:, 0]) * (points[:, None, 1] - a[:, 1]) - (
        b[:, 1] - a[:, 1]
    ) * (points[:, None, 0] - a[:, 0])
    return np.all(cross >= -tol, axis=1)


def _first_colliding_pose_py(xs, ys, thetas, verts, obstacles, tol):
    n_pose = xs.shape[0]
    n_obs = obstacles.shape[0]
    m = verts.shape[0]
    # bounding circle of the footprint, squared, with tolerance slack
    r2 = 0.0
    for j in range(m):
        d2 = verts[j, 0] * verts[j, 0] + verts[j, 1] * verts[j, 1]
        if d2 > r2:
            r2 = d2
    r2 = r2 + 2.0 * math.sqrt(r2) * tol + tol * tol
    for i in range(n_pose):
        c = math.cos(thetas[i])
        s = math.sin(thetas[i])
        for k in range(n_obs):
            dx = obstacles[k, 0] - xs[i]
            dy = obstacles[k, 1] - ys[i]
            if dx * dx + dy * dy > r2:
                continue
            # obstacle point in the vehicle frame
            lx = c * dx + s * dy
            ly = -s * dx + c * dy
            inside = True
            for j in range(m):
                ax = verts[j, 0]
                ay = verts[j, 1]
                bx = verts[(j + 1) % m, 0]
                by = verts[(j + 1) % m, 1]
                cross = (bx - ax) * (ly - ay) - (by - ay) * (lx - ax)
                if cross < -tol:
                    inside = False
                    break
            if inside:
                return i
    return -1


def _first_colliding_pose_np(xs, ys, thetas, verts, obstacles, tol):
    if obstacles.shape[0] == 0:
        return -1
    r = math.sqrt(float(np.max(verts[:, 0] ** 2 + verts[:, 1] ** 2))) + tol
    for i in range(xs.shape[0]):
        dx = obstacles[:, 0] - xs[i]
        dy = obstacles[:, 1] - ys[i]
        near = dx * dx + dy * dy <= r * r
        if not near.any():
            continue
        c = math.cos(thetas[i])
        s = math.sin(thetas[i])
        local = np.empty((int(near.sum()), 2))
        local[:, 0] = c * dx[near] + s * dy[near]
        local[:, 1] = -s * dx[near] + c * dy[near]
        if _point_in_convex_polygon_np(local, verts, tol).any():
            return i
    return -1


def _integrate_arc_py(x, y, theta, steer, direction, arc_len, n_sub, wheelbase):
    xs = np.empty(n_sub)
    ys = np.empty(n_sub)
    ths = np.empty(n_sub)
    d = direction * arc_len / n_sub
    dth = d / wheelbase * math.tan(steer)
    for i in range(n_sub):
        x = x + d * math.cos(theta)
        y = y + d * math.sin(theta)
        theta = theta + dth
        theta = math.pi - (math.pi - theta) % (2.0 * math.pi)
        xs[i] = x
        ys[i] = y
        ths[i] = theta
    return xs, ys, ths


def _integrate_arc_np(x, y, theta, steer, direction, arc_len, n_sub, wheelbase):
    d = direction * arc_len / n_sub
    dth = d / wheelbase * math.tan(steer)
    # headings used for the i-th substep displacement (pre-update heading)
    ths_pre = theta + dth * np.arange(n_sub)
    xs = x + d * np.cumsum(np.cos(ths_pre))
    ys = y + d * np.cumsum(np.sin(ths_pre))
    ths = np.pi - (np.pi - (ths_pre + dth)) % (2.0 * np.pi)
    return xs, ys, ths


def _env_flag_enabled() -> bool:
    raw = os.environ.get("PARKPLAN_NUMBA", "1").strip().lower()
    return raw not in ("0", "false", "off", "no")


NUMBA_ENABLED = _env_flag_enabled()
if NUMBA_ENABLED:
    try:
        from numba import njit
    except ImportError:  # pragma: no cover
        NUMBA_ENABLED = False

if NUMBA_ENABLED:
    _point_in_convex_polygon_nb = njit(cache=True)(_point_in_convex_polygon_py)
    _first_colliding_pose_nb = njit(cache=True)(_first_colliding_pose_py)
    _integrate_arc_nb = njit(cache=True)(_integrate_arc_py)
    point_in_convex_polygon = _point_in_convex_polygon_nb
    first_colliding_pose = _first_colliding_pose_nb
    integrate_arc = _integrate_arc_nb
else:
    point_in_convex_polygon = _point_in_convex_polygon_np
    first_colliding_pose = _first_colliding_pose_np
    integrate_arc = _integrate_arc_np

# both paths, keyed for the benchmark and for cross-checking tests
IMPLEMENTATIONS = {
    "point_in_convex_polygon": {"numpy": _point_in_convex_polygon_np},
    "first_colliding_pose": {"numpy": _first_colliding_pose_np},
    "integrate_arc": {"numpy": _integrate_arc_np},
}
if NUMBA_ENABLED:
    IMPLEMENTATIONS["point_in_convex_polygon"]["numba"] = _point_in_convex_polygon_nb
    IMPLEMENTATIONS["first_colliding_pose"]["numba"] = _first_colliding_pose_nb
    IMPLEMENTATIONS["integrate_arc"]["numba"] = _integrate_arc_nb


def warmup() -> None:
    """Trigger JIT compilation so timed sections do not pay for it."""
    pts = np.zeros((1, 2))
    poly = np.array([[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]])
    point_in_convex_polygon(pts, poly, 1e-9)
    first_colliding_pose(
        np.zeros(1), np.zeros(1), np.zeros(1), poly, np.array([[5.0, 5.0]]), 1e-9
    )
    integrate_arc(0.0, 0.0, 0.0, 0.1, 1.0, 1.0, 10, 3.0)
