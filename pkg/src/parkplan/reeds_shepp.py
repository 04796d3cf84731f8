"""Shortest bounded-curvature paths for a car that drives forward and
backward (Reeds-Shepp family).

Words are built from the classical equation set over the five segment
patterns CSC, CCC, CCCC, CCSC, CCSCC, expanded through the timeflip /
reflect / backwards symmetries, which together cover the full optimal
family. Lengths are computed in normalized units (turning radius 1);
``RSPath.total_length`` scales back to meters.

Each candidate word is validated by composing its segment transforms
before it can win, so a formula returning a non-reaching word is discarded
rather than propagated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator

from .geometry import Pose2D, wrap_angle

# slack for "nonnegative segment" checks, mirroring the usual implementations
_ZERO = 1e-10
# normalized-units endpoint tolerance for accepting a candidate word
_REACH_TOL = 1e-8

HALF_PI = math.pi / 2.0


@dataclass(frozen=True)
class RSSegment:
    kind: str  # "L" | "S" | "R"
    direction: int  # +1 forward, -1 backward
    length: float  # nonnegative, normalized units (radians for arcs)


@dataclass(frozen=True)
class RSPath:
    segments: tuple[RSSegment, ...]
    radius: float

    @property
    def total_length(self) -> float:
        """Path length in meters."""
        return sum(s.length for s in self.segments) * self.radius

    @property
    def normalized_length(self) -> float:
        return sum(s.length for s in self.segments)


def _mod2pi(x: float) -> float:
    v = math.fmod(x, 2.0 * math.pi)
    if v < -math.pi:
        v += 2.0 * math.pi
    elif v > math.pi:
        v -= 2.0 * math.pi
    return v


def _polar(x: float, y: float) -> tuple[float, float]:
    return math.hypot(x, y), math.atan2(y, x)


# --- the base equations -----------------------------------------------------
# Each returns (t, u, v) segment parameters or None. Signs of the parameters
# encode gear; the word builders below attach segment kinds.


def _lp_sp_lp(x, y, phi):
    u, t = _polar(x - math.sin(phi), y - 1.0 + math.cos(phi))
    if t >= -_ZERO:
        v = _mod2pi(phi - t)
        if v >= -_ZERO:
            return t, u, v
    return None


def _lp_sp_rp(x, y, phi):
    u1, t1 = _polar(x + math.sin(phi), y - 1.0 - math.cos(phi))
    u1sq = u1 * u1
    if u1sq >= 4.0:
        u = math.sqrt(u1sq - 4.0)
        t = _mod2pi(t1 + math.atan2(2.0, u))
        v = _mod2pi(t - phi)
        if t >= -_ZERO and v >= -_ZERO:
            return t, u, v
    return None


def _lp_rm_l(x, y, phi):
    xi = x - math.sin(phi)
    eta = y - 1.0 + math.cos(phi)
    u1, theta = _polar(xi, eta)
    if u1 <= 4.0:
        u = -2.0 * math.asin(0.25 * u1)
        t = _mod2pi(theta + 0.5 * u + math.pi)
        v = _mod2pi(phi - t + u)
        if t >= -_ZERO and u <= _ZERO:
            return t, u, v
    return None


def _tau_omega(u, v, xi, eta, phi):
    delta = _mod2pi(u - v)
    a = math.sin(u) - math.sin(delta)
    b = math.cos(u) - math.cos(delta) - 1.0
    t1 = math.atan2(eta * a - xi * b, xi * a + eta * b)
    t2 = 2.0 * (math.cos(delta) - math.cos(v) - math.cos(u)) + 3.0
    tau = _mod2pi(t1 + math.pi) if t2 < 0.0 else _mod2pi(t1)
    omega = _mod2pi(tau - u + v - phi)
    return tau, omega


def _lp_rup_lum_rm(x, y, phi):
    xi = x + math.sin(phi)
    eta = y - 1.0 - math.cos(phi)
    rho = 0.25 * (2.0 + math.hypot(xi, eta))
    if rho <= 1.0:
        u = math.acos(rho)
        t, v = _tau_omega(u, -u, xi, eta, phi)
        if t >= -_ZERO and v <= _ZERO:
            return t, u, v
    return None


def _lp_rum_lum_rp(x, y, phi):
    xi = x + math.sin(phi)
    eta = y - 1.0 - math.cos(phi)
    rho = (20.0 - xi * xi - eta * eta) / 16.0
    if 0.0 <= rho <= 1.0:
        u = -math.acos(rho)
        if u >= -HALF_PI:
            t, v = _tau_omega(u, u, xi, eta, phi)
            if t >= -_ZERO and v >= -_ZERO:
                return t, u, v
    return None


def _lp_rm_sm_lm(x, y, phi):
    xi = x - math.sin(phi)
    eta = y - 1.0 + math.cos(phi)
    rho, theta = _polar(xi, eta)
    if rho >= 2.0:
        r = math.sqrt(rho * rho - 4.0)
        u = 2.0 - r
        t = _mod2pi(theta + math.atan2(r, -2.0))
        v = _mod2pi(phi - HALF_PI - t)
        if t >= -_ZERO and u <= _ZERO and v <= _ZERO:
            return t, u, v
    return None


def _lp_rm_sm_rm(x, y, phi):
    xi = x + math.sin(phi)
    eta = y - 1.0 - math.cos(phi)
    rho, theta = _polar(-eta, xi)
    if rho >= 2.0:
        t = theta
        u = 2.0 - rho
        v = _mod2pi(t + HALF_PI - phi)
        if t >= -_ZERO and u <= _ZERO and v <= _ZERO:
            return t, u, v
    return None


def _lp_rm_s_lm_rp(x, y, phi):
    xi = x + math.sin(phi)
    eta = y - 1.0 - math.cos(phi)
    rho, _ = _polar(xi, eta)
    if rho >= 2.0:
        u = 4.0 - math.sqrt(rho * rho - 4.0)
        if u <= _ZERO:
            t = _mod2pi(
                math.atan2((4.0 - u) * xi - 2.0 * eta, -2.0 * xi + (u - 4.0) * eta)
            )
            v = _mod2pi(t - phi)
            if t >= -_ZERO and v >= -_ZERO:
                return t, u, v
    return None


_REFLECT = {"L": "R", "R": "L", "S": "S"}


def _word(kinds: str, lengths, timeflip=False, reflect=False):
    """Attach kinds to signed lengths, applying the symmetry transforms."""
    out = []
    for kind, ln in zip(kinds, lengths):
        if timeflip:
            ln = -ln
        if reflect:
            kind = _REFLECT[kind]
        out.append((kind, ln))
    return out


def _candidate_words(x: float, y: float, phi: float) -> Iterator[list]:
    """All words of the family for the normalized goal (x, y, phi)."""
    variants = (
        (x, y, phi, False, False),
        (-x, y, -phi, True, False),  # timeflip
        (x, -y, -phi, False, True),  # reflect
        (-x, -y, phi, True, True),
    )
    xb = x * math.cos(phi) + y * math.sin(phi)
    yb = x * math.sin(phi) - y * math.cos(phi)
    back_variants = (
        (xb, yb, phi, False, False),
        (-xb, yb, -phi, True, False),
        (xb, -yb, -phi, False, True),
        (-xb, -yb, phi, True, True),
    )

    # CSC
    for vx, vy, vphi, tf, rf in variants:
        sol = _lp_sp_lp(vx, vy, vphi)
        if sol:
            yield _word("LSL", sol, tf, rf)
        sol = _lp_sp_rp(vx, vy, vphi)
        if sol:
            yield _word("LSR", sol, tf, rf)
    # CCC (plus backwards: reversed segment order)
    for vx, vy, vphi, tf, rf in variants:
        sol = _lp_rm_l(vx, vy, vphi)
        if sol:
            yield _word("LRL", sol, tf, rf)
    for vx, vy, vphi, tf, rf in back_variants:
        sol = _lp_rm_l(vx, vy, vphi)
        if sol:
            t, u, v = sol
            yield _word("LRL", (v, u, t), tf, rf)
    # CCCC
    for vx, vy, vphi, tf, rf in variants:
        sol = _lp_rup_lum_rm(vx, vy, vphi)
        if sol:
            t, u, v = sol
            yield _word("LRLR", (t, u, -u, v), tf, rf)
        sol = _lp_rum_lum_rp(vx, vy, vphi)
        if sol:
            t, u, v = sol
            yield _word("LRLR", (t, u, u, v), tf, rf)
    # CCSC (middle arc fixed at pi/2)
    for vx, vy, vphi, tf, rf in variants:
        sol = _lp_rm_sm_lm(vx, vy, vphi)
        if sol:
            t, u, v = sol
            yield _word("LRSL", (t, -HALF_PI, u, v), tf, rf)
        sol = _lp_rm_sm_rm(vx, vy, vphi)
        if sol:
            t, u, v = sol
            yield _word("LRSR", (t, -HALF_PI, u, v), tf, rf)
    for vx, vy, vphi, tf, rf in back_variants:
        sol = _lp_rm_sm_lm(vx, vy, vphi)
        if sol:
            t, u, v = sol
            yield _word("LSRL", (v, u, -HALF_PI, t), tf, rf)
        sol = _lp_rm_sm_rm(vx, vy, vphi)
        if sol:
            t, u, v = sol
            yield _word("RSRL", (v, u, -HALF_PI, t), tf, rf)
    # CCSCC
    for vx, vy, vphi, tf, rf in variants:
        sol = _lp_rm_s_lm_rp(vx, vy, vphi)
        if sol:
            t, u, v = sol
            yield _word("LRSLR", (t, -HALF_PI, u, -HALF_PI, v), tf, rf)


def _advance(x: float, y: float, theta: float, kind: str, s: float):
    """Apply one unit-radius segment with signed arc parameter ``s``."""
    if kind == "S":
        return x + s * math.cos(theta), y + s * math.sin(theta), theta
    if kind == "L":
        return (
            x + math.sin(theta + s) - math.sin(theta),
            y - math.cos(theta + s) + math.cos(theta),
            theta + s,
        )
    return (
        x - math.sin(theta - s) + math.sin(theta),
        y + math.cos(theta - s) - math.cos(theta),
        theta - s,
    )


def _word_reaches(word, x, y, phi) -> bool:
    cx, cy, cth = 0.0, 0.0, 0.0
    for kind, s in word:
        cx, cy, cth = _advance(cx, cy, cth, kind, s)
    return (
        abs(cx - x) <= _REACH_TOL
        and abs(cy - y) <= _REACH_TOL
        and abs(_mod2pi(cth - phi)) <= _REACH_TOL
    )


def rs_shortest(start: Pose2D, goal: Pose2D, radius: float) -> RSPath:
    """Minimum-length Reeds-Shepp path from ``start`` to ``goal``.

    Ties break by a fixed enumeration order, so results are deterministic.
    """
    if radius <= 0:
        raise ValueError("radius must be positive")
    c, s = math.cos(start.theta), math.sin(start.theta)
    dx = goal.x - start.x
    dy = goal.y - start.y
    x = (c * dx + s * dy) / radius
    y = (-s * dx + c * dy) / radius
    phi = float(wrap_angle(goal.theta - start.theta))

    best_word = None
    best_len = math.inf
    for word in _candidate_words(x, y, phi):
        length = sum(abs(ln) for _, ln in word)
        if length < best_len and _word_reaches(word, x, y, phi):
            best_word = word
            best_len = length
    if best_word is None:
        # degenerate goal-at-start case: every formula returns zero params
        best_word = []

    segments = tuple(
        RSSegment(kind, 1 if ln >= 0 else -1, abs(ln))
        for kind, ln in best_word
        if abs(ln) > _ZERO
    )
    return RSPath(segments, radius)


def rs_length(start: Pose2D, goal: Pose2D, radius: float) -> float:
    """Length in meters of the shortest Reeds-Shepp path."""
    return rs_shortest(start, goal, radius).total_length


def sample_rs_detailed(
    path: RSPath, start: Pose2D, step: float
) -> list[tuple[Pose2D, int]]:
    """Poses along ``path`` at arc-length spacing <= ``step`` meters,
    paired with the motion direction that produced each pose (0 for the
    start pose). Segment endpoints are always included; consecutive poses
    follow exact constant-curvature motion.
    """
    if step <= 0:
        raise ValueError("step must be positive")
    radius = path.radius
    out = [(start, 0)]
    x, y, theta = start.x, start.y, start.theta
    for seg in path.segments:
        meters = seg.length * radius
        n = max(1, int(math.ceil(meters / step - 1e-12)))
        for i in range(1, n + 1):
            s = seg.direction * seg.length * (i / n)
            if seg.kind == "S":
                px = x + s * radius * math.cos(theta)
                py = y + s * radius * math.sin(theta)
                pth = theta
            elif seg.kind == "L":
                px = x + radius * (math.sin(theta + s) - math.sin(theta))
                py = y + radius * (-math.cos(theta + s) + math.cos(theta))
                pth = theta + s
            else:
                px = x + radius * (-math.sin(theta - s) + math.sin(theta))
                py = y + radius * (math.cos(theta - s) - math.cos(theta))
                pth = theta - s
            out.append((Pose2D(px, py, pth), seg.direction))
        x, y, theta = px, py, pth
    return out


def sample_rs(path: RSPath, start: Pose2D, radius: float, step: float) -> list[Pose2D]:
    """Poses along ``path`` (see :func:`sample_rs_detailed`).

    ``radius`` must match the radius the path was computed with.
    """
    if abs(radius - path.radius) > 1e-12:
        raise ValueError("radius does not match the path's turning radius")
    return [p for p, _ in sample_rs_detailed(path, start, step)]
