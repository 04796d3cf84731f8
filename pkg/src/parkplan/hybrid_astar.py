"""Hybrid A* baseline planner.

Best-first search over continuous poses indexed by (x cell, y cell, heading
bin, motion direction). Successors are constant-steering arcs of one motion
resolution, integrated in sub-steps small enough that thin contour
obstacles cannot slip between collision checks. Every expansion attempts a
Reeds-Shepp connection to the goal; the first collision-free connection
ends the search.

Arc cost:

    motion_resolution * (1 or backward_cost)
    + switch_back_cost  * [direction changed]
    + steer_angle_cost  * |steer|
    + steer_change_cost * |steer - parent steer|

The same schedule prices the Reeds-Shepp suffix, one segment per arc with
|steer| = max_steer on curves.
"""

from __future__ import annotations

import heapq
import math
import time
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import kernels
from .errors import InputError
from .geometry import Pose2D, VehicleSpec, collides, poses_collide, wrap_angle
from .reeds_shepp import RSPath, rs_shortest, sample_rs_detailed
from .scenarios import Scenario, filter_obstacles


@dataclass(frozen=True)
class PlannerConfig:
    xy_resolution: float = 0.5  # meters
    theta_resolution: float = math.radians(5.0)
    motion_resolution: float = 1.0  # arc length per expansion, meters
    n_steer: int = 20
    switch_back_cost: float = 2.0
    backward_cost: float = 1.3
    steer_angle_cost: float = 0.2
    steer_change_cost: float = 0.1
    heuristic_weight: float = 1.0
    obstacle_radius: float = 25.0  # keep points within this range of the start
    time_budget: float = 10.0  # seconds per query
    substep: float = 0.1  # collision sampling resolution along arcs
    grid_margin: float = 5.0  # heuristic grid inflation beyond the scene bbox


@dataclass(frozen=True)
class Arc:
    """Annotation for one planned motion: a search arc or an RS segment."""

    steer: float  # radians (signed)
    direction: int  # +1 forward, -1 backward
    length: float  # meters (nonnegative)
    kind: str = "arc"  # arc | rs


@dataclass
class PlannedPath:
    poses: list[Pose2D]
    directions: list[int]  # motion sign that produced each pose; 0 for the start
    cost: float
    planning_time: float
    arcs: list[Arc] = field(default_factory=list)
    nodes_expanded: int = 0

    @property
    def length(self) -> float:
        return sum(a.length for a in self.arcs)


@dataclass
class PlanFailure:
    reason: str  # timeout | exhausted
    nodes_expanded: int
    planning_time: float

    def __str__(self):
        return (
            f"planning failed ({self.reason}) after {self.nodes_expanded} "
            f"expansions in {self.planning_time:.2f}s"
        )


def arc_cost(cfg: PlannerConfig, length, steer, direction, prev_steer, prev_direction):
    cost = length * (1.0 if direction > 0 else cfg.backward_cost)
    if prev_direction != 0 and direction != prev_direction:
        cost += cfg.switch_back_cost
    cost += cfg.steer_angle_cost * abs(steer)
    cost += cfg.steer_change_cost * abs(steer - prev_steer)
    return cost


# ---------------------------------------------------------------------------
# 2D holonomic heuristic
# ---------------------------------------------------------------------------


class HolonomicCostMap:
    """8-connected shortest-path distance to the goal cell, obstacles
    dilated by half the vehicle width. Unreachable cells are infinite."""

    def __init__(self, origin, shape, resolution, cost):
        self.origin = origin
        self.shape = shape
        self.resolution = resolution
        self.cost = cost  # (nx, ny) float array, +inf where unreachable

    def cell(self, x: float, y: float) -> tuple[int, int]:
        return (
            int(math.floor((x - self.origin[0]) / self.resolution)),
            int(math.floor((y - self.origin[1]) / self.resolution)),
        )

    def value(self, x: float, y: float) -> float:
        i, j = self.cell(x, y)
        if 0 <= i < self.shape[0] and 0 <= j < self.shape[1]:
            return float(self.cost[i, j])
        return math.inf


def holonomic_heuristic(
    obstacles,
    goal: Pose2D,
    cfg: PlannerConfig,
    spec: VehicleSpec,
    extra_points=(),
) -> HolonomicCostMap:
    """Distance-to-goal map over a grid covering the obstacles, the goal,
    and any ``extra_points`` (typically the start pose)."""
    obstacles = np.asarray(obstacles, dtype=float).reshape(-1, 2)
    anchors = [np.array([[goal.x, goal.y]])]
    if obstacles.shape[0]:
        anchors.append(obstacles)
    for p in extra_points:
        anchors.append(np.array([[p[0], p[1]]]))
    pts = np.concatenate(anchors, axis=0)
    res = cfg.xy_resolution
    lo = pts.min(axis=0) - cfg.grid_margin
    hi = pts.max(axis=0) + cfg.grid_margin
    nx = int(math.ceil((hi[0] - lo[0]) / res)) + 1
    ny = int(math.ceil((hi[1] - lo[1]) / res)) + 1

    blocked = np.zeros((nx, ny), dtype=bool)
    if obstacles.shape[0]:
        radius = spec.width / 2.0
        r_cells = int(math.ceil(radius / res)) + 1
        offs = np.arange(-r_cells, r_cells + 1)
        oi, oj = np.meshgrid(offs, offs, indexing="ij")
        oi, oj = oi.ravel(), oj.ravel()
        ci = np.floor((obstacles[:, 0] - lo[0]) / res).astype(int)
        cj = np.floor((obstacles[:, 1] - lo[1]) / res).astype(int)
        cand_i = ci[:, None] + oi[None, :]
        cand_j = cj[:, None] + oj[None, :]
        centers_x = lo[0] + (cand_i + 0.5) * res
        centers_y = lo[1] + (cand_j + 0.5) * res
        within = (centers_x - obstacles[:, 0:1]) ** 2 + (
            centers_y - obstacles[:, 1:2]
        ) ** 2 <= radius * radius
        inside = (
            (cand_i >= 0) & (cand_i < nx) & (cand_j >= 0) & (cand_j < ny) & within
        )
        blocked[cand_i[inside], cand_j[inside]] = True

    gmap = HolonomicCostMap((float(lo[0]), float(lo[1])), (nx, ny), res, None)
    gi, gj = gmap.cell(goal.x, goal.y)
    if blocked[gi, gj]:
        raise InputError("goal cell is blocked by dilated obstacles")

    cost = np.full((nx, ny), math.inf)
    cost[gi, gj] = 0.0
    diag = math.sqrt(2.0) * res
    moves = [
        (1, 0, res), (-1, 0, res), (0, 1, res), (0, -1, res),
        (1, 1, diag), (1, -1, diag), (-1, 1, diag), (-1, -1, diag),
    ]
    heap = [(0.0, gi, gj)]
    while heap:
        c, i, j = heapq.heappop(heap)
        if c > cost[i, j]:
            continue
        for di, dj, w in moves:
            ni, nj = i + di, j + dj
            if 0 <= ni < nx and 0 <= nj < ny and not blocked[ni, nj]:
                nc = c + w
                if nc < cost[ni, nj]:
                    cost[ni, nj] = nc
                    heapq.heappush(heap, (nc, ni, nj))
    gmap.cost = cost
    return gmap


# ---------------------------------------------------------------------------
# search
# ---------------------------------------------------------------------------


@dataclass
class _Node:
    x: float
    y: float
    theta: float
    direction: int  # motion sign of the arc that reached this node (0 at start)
    steer: float
    g: float
    parent_key: tuple | None
    # fine-sampled poses of the arc that reached this node (excluding parent pose)
    arc_xs: np.ndarray | None = None
    arc_ys: np.ndarray | None = None
    arc_ths: np.ndarray | None = None
    arc_len: float = 0.0


def _key(cfg: PlannerConfig, x, y, theta, direction):
    return (
        int(math.floor(x / cfg.xy_resolution)),
        int(math.floor(y / cfg.xy_resolution)),
        int(math.floor(wrap_angle(theta) / cfg.theta_resolution)),
        direction,
    )


def analytic_expansion(
    pose: Pose2D,
    goal: Pose2D,
    spec: VehicleSpec,
    cfg: PlannerConfig,
    obstacles: np.ndarray,
):
    """Attempt a Reeds-Shepp connection from ``pose`` to ``goal``.

    Returns (rs_path, sampled (pose, direction) list) when every sample is
    collision-free, else None.
    """
    rs = rs_shortest(pose, goal, spec.min_turn_radius)
    detail = sample_rs_detailed(rs, pose, cfg.substep)
    if obstacles.shape[0]:
        xs = np.array([p.x for p, _ in detail])
        ys = np.array([p.y for p, _ in detail])
        ths = np.array([p.theta for p, _ in detail])
        if poses_collide(xs, ys, ths, spec, obstacles) >= 0:
            return None
    return rs, detail


def _rs_suffix_arcs(rs: RSPath, spec: VehicleSpec) -> list[Arc]:
    arcs = []
    for seg in rs.segments:
        steer = 0.0
        if seg.kind == "L":
            steer = spec.max_steer
        elif seg.kind == "R":
            steer = -spec.max_steer
        arcs.append(Arc(steer, seg.direction, seg.length * rs.radius, kind="rs"))
    return arcs


def plan(scenario: Scenario, spec: VehicleSpec, cfg: PlannerConfig):
    """Search for a collision-free path from the scenario's initial pose to
    its target pose. Returns a :class:`PlannedPath` or a :class:`PlanFailure`.
    """
    t0 = time.perf_counter()
    start = scenario.initial_pose
    goal = scenario.target_pose
    obstacles = filter_obstacles(
        scenario.obstacles, (start.x, start.y), cfg.obstacle_radius
    )
    if collides(start, spec, obstacles):
        raise InputError("start pose collides with obstacles")
    if collides(goal, spec, obstacles):
        raise InputError("goal pose collides with obstacles")

    try:
        hmap = holonomic_heuristic(
            obstacles, goal, cfg, spec, extra_points=[(start.x, start.y)]
        )
    except InputError:
        # goal cell blocked by dilation (very tight bay): fall back to the
        # Reeds-Shepp heuristic alone
        hmap = None

    min_radius = spec.min_turn_radius
    h_cache: dict[tuple, float] = {}

    def heuristic(x, y, theta, key3):
        # cached per discrete cell: poses in one cell share the estimate
        h = h_cache.get(key3)
        if h is None:
            h = rs_shortest(Pose2D(x, y, theta), goal, min_radius).total_length
            if hmap is not None:
                h2d = hmap.value(x, y)
                # an infinite 2D value only means the axle sits inside the
                # dilated band next to a wall; fall back, never prune
                if not math.isinf(h2d):
                    h = max(h, h2d)
            h_cache[key3] = h
        return h

    steer_values = [float(s) for s in np.linspace(-spec.max_steer, spec.max_steer, cfg.n_steer)]
    n_sub = max(1, int(math.ceil(cfg.motion_resolution / cfg.substep)))
    verts = _verts(spec)

    start_key = _key(cfg, start.x, start.y, start.theta, 0)
    goal_key_xyth = _key(cfg, goal.x, goal.y, goal.theta, 0)[:3]
    nodes: dict[tuple, _Node] = {
        start_key: _Node(start.x, start.y, start.theta, 0, 0.0, 0.0, None)
    }
    counter = 0
    open_heap = [
        (
            cfg.heuristic_weight
            * heuristic(start.x, start.y, start.theta, start_key[:3]),
            0,
            start_key,
        )
    ]
    closed: set = set()
    expanded = 0

    while open_heap:
        if time.perf_counter() - t0 > cfg.time_budget:
            return PlanFailure("timeout", expanded, time.perf_counter() - t0)
        _, _, key = heapq.heappop(open_heap)
        if key in closed:
            continue
        closed.add(key)
        node = nodes[key]
        expanded += 1

        # analytic shortcut to the goal
        shot = analytic_expansion(
            Pose2D(node.x, node.y, node.theta), goal, spec, cfg, obstacles
        )
        if shot is not None:
            rs, detail = shot
            return _reconstruct(
                cfg, spec, nodes, key, rs, detail, expanded, t0
            )
        if key[:3] == goal_key_xyth:
            return _reconstruct(cfg, spec, nodes, key, None, None, expanded, t0)

        for direction in (1, -1):
            for steer in steer_values:
                xs, ys, ths = kernels.integrate_arc(
                    node.x,
                    node.y,
                    node.theta,
                    steer,
                    float(direction),
                    cfg.motion_resolution,
                    n_sub,
                    spec.wheelbase,
                )
                if obstacles.shape[0] and (
                    kernels.first_colliding_pose(xs, ys, ths, verts, obstacles, 1e-9)
                    >= 0
                ):
                    continue
                nkey = _key(cfg, xs[-1], ys[-1], ths[-1], direction)
                if nkey in closed:
                    continue
                g = node.g + arc_cost(
                    cfg,
                    cfg.motion_resolution,
                    steer,
                    direction,
                    node.steer,
                    node.direction,
                )
                existing = nodes.get(nkey)
                if existing is not None and existing.g <= g:
                    continue
                nodes[nkey] = _Node(
                    float(xs[-1]),
                    float(ys[-1]),
                    float(ths[-1]),
                    direction,
                    steer,
                    g,
                    key,
                    xs,
                    ys,
                    ths,
                    cfg.motion_resolution,
                )
                counter += 1
                f = g + cfg.heuristic_weight * heuristic(
                    float(xs[-1]), float(ys[-1]), float(ths[-1]), nkey[:3]
                )
                heapq.heappush(open_heap, (f, counter, nkey))

    return PlanFailure("exhausted", expanded, time.perf_counter() - t0)


@lru_cache(maxsize=None)
def _verts(spec: VehicleSpec) -> np.ndarray:
    from .geometry import footprint_polygon

    arr = footprint_polygon(spec).as_array()
    arr.setflags(write=False)
    return arr


def _reconstruct(cfg, spec, nodes, key, rs, rs_detail, expanded, t0):
    chain = []
    k = key
    while k is not None:
        chain.append(nodes[k])
        k = nodes[k].parent_key
    chain.reverse()

    poses = [Pose2D(chain[0].x, chain[0].y, chain[0].theta)]
    directions = [0]
    arcs: list[Arc] = []
    cost = chain[-1].g
    for node in chain[1:]:
        for x, y, th in zip(node.arc_xs, node.arc_ys, node.arc_ths):
            poses.append(Pose2D(float(x), float(y), float(th)))
            directions.append(node.direction)
        arcs.append(Arc(node.steer, node.direction, node.arc_len))

    if rs is not None and rs.segments:
        prev_steer = chain[-1].steer
        prev_dir = chain[-1].direction
        for arc in _rs_suffix_arcs(rs, spec):
            cost += arc_cost(
                cfg, arc.length, arc.steer, arc.direction, prev_steer, prev_dir
            )
            arcs.append(arc)
            prev_steer, prev_dir = arc.steer, arc.direction
        for pose, direction in rs_detail[1:]:
            poses.append(pose)
            directions.append(direction)

    return PlannedPath(
        poses=poses,
        directions=directions,
        cost=cost,
        planning_time=time.perf_counter() - t0,
        arcs=arcs,
        nodes_expanded=expanded,
    )
