"""Benchmark scenarios: data model, JSON persistence, synthetic layouts,
and the reverse-rollout initial-pose sampler.

A scenario is one parking case: a logged initial pose, a target pose, and
obstacle contour points (the sparse form a perception stack would hand to
the planner). The synthetic generators produce the three layout archetypes
used by the bundled pack: a perpendicular bay off an open apron, a bay cut
into a walled corridor, and a bay near the closed end of a dead-end lane.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from . import kinematics
from .errors import (
    InfeasibleGeometryError,
    SamplingExhaustedError,
    ScenarioFormatError,
)
from .geometry import (
    Pose2D,
    VehicleSpec,
    as_obstacle_array,
    collides,
    ego_to_world,
    transform_to_world,
    wrap_angle,
)

N_MAX_OBSTACLES = 100_000
CONTOUR_SPACING = 0.1  # max gap between sampled wall points, meters


@dataclass
class Scenario:
    id: str
    initial_pose: Pose2D
    target_pose: Pose2D
    obstacles: np.ndarray  # (N, 2) world-frame contour points

    def __post_init__(self):
        self.obstacles = as_obstacle_array(self.obstacles)

    def validate(self, spec: VehicleSpec | None = None) -> "Scenario":
        spec = spec or VehicleSpec()
        if self.obstacles.shape[0] > N_MAX_OBSTACLES:
            raise ScenarioFormatError(
                f"scenario '{self.id}': {self.obstacles.shape[0]} obstacle points "
                f"exceed the limit of {N_MAX_OBSTACLES}"
            )
        values = [
            self.initial_pose.x,
            self.initial_pose.y,
            self.initial_pose.theta,
            self.target_pose.x,
            self.target_pose.y,
            self.target_pose.theta,
        ]
        if not (np.all(np.isfinite(values)) and np.all(np.isfinite(self.obstacles))):
            raise ScenarioFormatError(f"scenario '{self.id}': non-finite coordinates")
        if collides(self.target_pose, spec, self.obstacles):
            raise ScenarioFormatError(
                f"scenario '{self.id}': target pose collides with obstacles"
            )
        return self

    def transformed(self, frame: Pose2D, new_id: str | None = None) -> "Scenario":
        """Rigidly move the whole scenario into the world frame ``frame``."""
        obs = (
            transform_to_world(self.obstacles, frame)
            if self.obstacles.shape[0]
            else self.obstacles
        )
        return Scenario(
            new_id or self.id,
            ego_to_world(frame, self.initial_pose),
            ego_to_world(frame, self.target_pose),
            obs,
        )


def _pose_to_list(p: Pose2D) -> list[float]:
    return [p.x, p.y, p.theta]


def save_scenario(scenario: Scenario, path) -> None:
    doc = {
        "id": scenario.id,
        "initial_pose": _pose_to_list(scenario.initial_pose),
        "target_pose": _pose_to_list(scenario.target_pose),
        "obstacles": scenario.obstacles.tolist(),
    }
    Path(path).write_text(json.dumps(doc))


def scenario_from_dict(doc: dict, source: str = "<dict>") -> Scenario:
    try:
        scenario = Scenario(
            id=str(doc["id"]),
            initial_pose=Pose2D(*(float(v) for v in doc["initial_pose"])),
            target_pose=Pose2D(*(float(v) for v in doc["target_pose"])),
            obstacles=np.asarray(doc.get("obstacles", []), dtype=float).reshape(-1, 2),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ScenarioFormatError(f"{source}: malformed scenario document: {exc}")
    return scenario.validate()


def load_scenario(path) -> Scenario:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"scenario file not found: {path}")
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ScenarioFormatError(f"{path}: not valid JSON: {exc}")
    return scenario_from_dict(doc, source=str(path))


def load_external_layout(path) -> Scenario:
    """Adapter stub for externally published layout files.

    Accepts JSON documents whose keys differ from the native schema
    (``start``/``ego_pose`` for the initial pose, ``goal`` for the target,
    ``contours`` for obstacles, flat or nested point lists) and maps them
    onto :class:`Scenario`. Extend the alias tables below when wiring a new
    source format.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"layout file not found: {path}")
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ScenarioFormatError(f"{path}: not valid JSON: {exc}")

    def pick(aliases):
        for key in aliases:
            if key in doc:
                return doc[key]
        raise ScenarioFormatError(
            f"{path}: none of {aliases} present in layout document"
        )

    init = pick(("initial_pose", "start", "start_pose", "ego_pose", "init"))
    target = pick(("target_pose", "goal", "goal_pose", "target"))
    obstacles = pick(("obstacles", "contours", "contour_points", "points"))
    obstacles = np.asarray(obstacles, dtype=float).reshape(-1, 2)
    return scenario_from_dict(
        {
            "id": doc.get("id", path.stem),
            "initial_pose": init,
            "target_pose": target,
            "obstacles": obstacles,
        },
        source=str(path),
    )


# ---------------------------------------------------------------------------
# synthetic layouts
# ---------------------------------------------------------------------------


def _segment_points(x0, y0, x1, y1, spacing=CONTOUR_SPACING):
    length = math.hypot(x1 - x0, y1 - y0)
    n = max(1, int(math.ceil(length / spacing)))
    ts = np.linspace(0.0, 1.0, n + 1)
    return np.stack([x0 + ts * (x1 - x0), y0 + ts * (y1 - y0)], axis=1)


def _walls(*segments):
    return np.concatenate([_segment_points(*seg) for seg in segments], axis=0)


def _bay_target(spec: VehicleSpec, bay_depth: float) -> Pose2D:
    # rear-in: nose toward the opening (+y), body centered along the bay
    return Pose2D(0.0, -bay_depth / 2.0 - spec.center_offset, math.pi / 2.0)


def synth_perpendicular_bay(
    spec: VehicleSpec | None = None,
    bay_width: float = 2.6,
    bay_depth: float = 5.5,
    corridor_width: float = 6.0,
    apron_halfwidth: float = 9.0,
    start: tuple[float, float, float] | None = None,
    id: str = "perpendicular_bay",
) -> Scenario:
    """Perpendicular bay opening onto a corridor with a facing wall."""
    spec = spec or VehicleSpec()
    _check_bay(spec, bay_width, bay_depth)
    hw = bay_width / 2.0
    obstacles = _walls(
        (-hw, 0.0, -hw, -bay_depth),  # bay left wall
        (hw, 0.0, hw, -bay_depth),  # bay right wall
        (-hw, -bay_depth, hw, -bay_depth),  # bay back wall
        (-apron_halfwidth, 0.0, -hw, 0.0),  # corridor near edge, left of bay
        (hw, 0.0, apron_halfwidth, 0.0),  # corridor near edge, right of bay
        (-apron_halfwidth, corridor_width, apron_halfwidth, corridor_width),
    )
    init = start or (-6.0, corridor_width / 2.0, 0.0)
    return _finish(spec, id, init, _bay_target(spec, bay_depth), obstacles)


def synth_corridor(
    spec: VehicleSpec | None = None,
    corridor_width: float = 6.0,
    corridor_length: float = 26.0,
    bay_width: float = 2.7,
    bay_depth: float = 5.5,
    start: tuple[float, float, float] | None = None,
    id: str = "corridor",
) -> Scenario:
    """Bay cut into one side of a walled corridor (bay axis orthogonal to
    the corridor axis)."""
    spec = spec or VehicleSpec()
    _check_bay(spec, bay_width, bay_depth)
    hw = bay_width / 2.0
    half_len = corridor_length / 2.0
    obstacles = _walls(
        (-hw, 0.0, -hw, -bay_depth),
        (hw, 0.0, hw, -bay_depth),
        (-hw, -bay_depth, hw, -bay_depth),
        (-half_len, 0.0, -hw, 0.0),
        (hw, 0.0, half_len, 0.0),
        (-half_len, corridor_width, half_len, corridor_width),
    )
    init = start or (-half_len + 3.0, corridor_width / 2.0, 0.0)
    return _finish(spec, id, init, _bay_target(spec, bay_depth), obstacles)


def synth_dead_end(
    spec: VehicleSpec | None = None,
    corridor_width: float = 6.0,
    corridor_length: float = 16.0,
    bay_width: float = 2.8,
    bay_depth: float = 5.5,
    end_clearance: float = 3.5,
    start: tuple[float, float, float] | None = None,
    id: str = "dead_end",
) -> Scenario:
    """Bay near the closed end of a dead-end lane; the end wall caps the
    forward maneuvering room."""
    spec = spec or VehicleSpec()
    _check_bay(spec, bay_width, bay_depth)
    hw = bay_width / 2.0
    end_x = hw + end_clearance
    open_x = end_x - corridor_length
    obstacles = _walls(
        (-hw, 0.0, -hw, -bay_depth),
        (hw, 0.0, hw, -bay_depth),
        (-hw, -bay_depth, hw, -bay_depth),
        (open_x, 0.0, -hw, 0.0),
        (hw, 0.0, end_x, 0.0),
        (end_x, 0.0, end_x, corridor_width),  # closed end
        (open_x, corridor_width, end_x, corridor_width),
    )
    init = start or (open_x + 3.0, corridor_width / 2.0, 0.0)
    return _finish(spec, id, init, _bay_target(spec, bay_depth), obstacles)


_SYNTH_KINDS = {
    "perpendicular_bay": synth_perpendicular_bay,
    "corridor": synth_corridor,
    "dead_end": synth_dead_end,
}


def synth_scenario(kind: str, spec: VehicleSpec | None = None, **params) -> Scenario:
    """Build one of the synthetic archetypes by name."""
    try:
        builder = _SYNTH_KINDS[kind]
    except KeyError:
        raise ScenarioFormatError(
            f"unknown scenario kind '{kind}' (expected one of {sorted(_SYNTH_KINDS)})"
        )
    return builder(spec=spec, **params)


def _check_bay(spec: VehicleSpec, bay_width: float, bay_depth: float) -> None:
    if bay_width <= 0 or bay_depth <= 0:
        raise InfeasibleGeometryError("bay dimensions must be positive")
    if bay_width < spec.width:
        raise InfeasibleGeometryError(
            f"bay width {bay_width} m is narrower than the vehicle ({spec.width} m)"
        )


def _finish(spec, id, init, target, obstacles) -> Scenario:
    scenario = Scenario(id, Pose2D(*init), target, obstacles)
    if collides(scenario.target_pose, spec, scenario.obstacles):
        raise InfeasibleGeometryError(
            f"scenario '{id}': vehicle does not fit in the bay"
        )
    if collides(scenario.initial_pose, spec, scenario.obstacles):
        raise InfeasibleGeometryError(f"scenario '{id}': initial pose collides")
    return scenario


# ---------------------------------------------------------------------------
# rollout-from-target initial-pose sampling
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RolloutParams:
    """How far, and with which heading treatment, to drive out of the bay."""

    steps: int
    heading_mode: str = "inherit"  # inherit | resample
    heading_range: tuple[float, float] = (0.0, 0.0)  # offsets around the rollout heading
    seed: int | None = None

    def __post_init__(self):
        if self.steps < 0:
            raise ValueError("steps must be nonnegative")
        if self.heading_mode not in ("inherit", "resample"):
            raise ValueError(f"unknown heading_mode '{self.heading_mode}'")
        lo, hi = self.heading_range
        if not (-math.pi < lo <= hi <= math.pi):
            raise ValueError("heading_range must be a sub-interval of (-pi, pi]")


_FORWARD_STEER = {  # forward primitives by steering change sign
    -1: kinematics.ACTIONS[0],
    0: kinematics.ACTIONS[1],
    +1: kinematics.ACTIONS[2],
}

HEADING_ATTEMPTS = 100


def rollout_initial_pose(
    scenario: Scenario,
    spec: VehicleSpec,
    rollout: RolloutParams,
    rng: np.random.Generator | None = None,
) -> Pose2D:
    """Drive forward out of the target pose for ``rollout.steps`` primitives
    with randomized steering, rejecting colliding steps, and return the
    final (guaranteed collision-free) pose.

    The returned pose is reachable by construction: it was produced by the
    same primitive mechanics the agent uses, run in reverse order.
    """
    if rng is None:
        rng = np.random.default_rng(rollout.seed)
    if collides(scenario.target_pose, spec, scenario.obstacles):
        raise SamplingExhaustedError(
            f"scenario '{scenario.id}': target pose is not collision-free"
        )
    state = kinematics.VehicleState.from_pose(scenario.target_pose)
    for _ in range(rollout.steps):
        steer_target = rng.uniform(-spec.max_steer, spec.max_steer)
        diff = steer_target - state.delta
        preferred = 0 if abs(diff) < kinematics.STEER_INCREMENT else int(np.sign(diff))
        choices = [preferred] + [c for c in (-1, 0, 1) if c != preferred]
        moved = False
        for choice in choices:
            cand = kinematics.step(state, _FORWARD_STEER[choice], spec)
            if not collides(cand.pose(), spec, scenario.obstacles):
                state = cand
                moved = True
                break
        if not moved:
            break  # boxed in; stop the rollout early at a free pose

    pose = state.pose()
    if rollout.heading_mode == "inherit":
        return pose
    lo, hi = rollout.heading_range
    for _ in range(HEADING_ATTEMPTS):
        theta = wrap_angle(pose.theta + rng.uniform(lo, hi))
        cand = Pose2D(pose.x, pose.y, float(theta))
        if not collides(cand, spec, scenario.obstacles):
            return cand
    raise SamplingExhaustedError(
        f"scenario '{scenario.id}': no collision-free heading in "
        f"[{lo:.3f}, {hi:.3f}] after {HEADING_ATTEMPTS} attempts"
    )


def filter_obstacles(points, center, radius: float) -> np.ndarray:
    """Keep the points within ``radius`` (inclusive) of ``center``,
    preserving order."""
    if radius <= 0:
        raise ValueError("radius must be positive")
    pts = as_obstacle_array(points)
    if pts.shape[0] == 0:
        return pts
    if isinstance(center, Pose2D):
        cx, cy = center.x, center.y
    else:
        cx, cy = float(center[0]), float(center[1])
    d2 = (pts[:, 0] - cx) ** 2 + (pts[:, 1] - cy) ** 2
    return pts[d2 <= radius * radius]


# ---------------------------------------------------------------------------
# bundled pack
# ---------------------------------------------------------------------------


def bundled_scenarios() -> list[Scenario]:
    """The synthetic scenario pack shipped with the package."""
    root = resources.files("parkplan").joinpath("data/scenarios")
    out = []
    for entry in sorted(root.iterdir(), key=lambda e: e.name):
        if entry.name.endswith(".json"):
            out.append(scenario_from_dict(json.loads(entry.read_text()), entry.name))
    return out
