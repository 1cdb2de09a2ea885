"""Planar rigid-body geometry: SE(2) poses, oriented boxes, exact overlap tests.

Everything in this module is a pure function over immutable value types, so
callers may parallelize freely. Angles are radians, distances meters. All
collision reasoning is planar; any z coordinate carried by callers passes
through untouched.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

TWO_PI = 2.0 * math.pi


def wrap_angle(a: float) -> float:
    """Normalize an angle to (-pi, pi]."""
    w = (a + math.pi) % TWO_PI - math.pi
    # the modulus lands exactly on -pi for inputs congruent to pi
    return math.pi if w <= -math.pi else w


@dataclass(frozen=True)
class Pose2:
    """SE(2) pose: position plus heading, yaw kept in (-pi, pi]."""

    x: float
    y: float
    yaw: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "yaw", wrap_angle(float(self.yaw)))
        object.__setattr__(self, "x", float(self.x))
        object.__setattr__(self, "y", float(self.y))


@dataclass(frozen=True)
class OrientedBox:
    """Rectangle with arbitrary heading: length along the heading, width across."""

    center: Pose2
    length: float
    width: float

    def __post_init__(self):
        if not (self.length > 0 and self.width > 0):
            raise ValueError(
                f"box dimensions must be positive, got length={self.length} width={self.width}"
            )


@dataclass(frozen=True)
class HeadingPolicy:
    """How to recover heading from consecutive positions.

    Displacements below `min_displacement` carry the previous heading forward
    instead of differencing near-identical positions; `initial_heading` seeds
    the carry chain when no prior heading exists.
    """

    min_displacement: float = 1e-3
    initial_heading: float = 0.0

    def __post_init__(self):
        if self.min_displacement < 0:
            raise ValueError("min_displacement must be >= 0")


def transform_to_frame(points: Sequence[Pose2], reference: Pose2) -> list[Pose2]:
    """Express each pose in the frame whose origin and orientation are `reference`."""
    c = math.cos(reference.yaw)
    s = math.sin(reference.yaw)
    out = []
    for p in points:
        dx = p.x - reference.x
        dy = p.y - reference.y
        out.append(Pose2(c * dx + s * dy, -s * dx + c * dy, wrap_angle(p.yaw - reference.yaw)))
    return out


def rotate_vector(vx: float, vy: float, angle: float) -> tuple[float, float]:
    """Rotate a free vector by `angle` (no translation; used for velocities)."""
    c = math.cos(angle)
    s = math.sin(angle)
    return (c * vx - s * vy, s * vx + c * vy)


def heading_from_positions(prev: Pose2, curr: Pose2, policy: HeadingPolicy, carried: float) -> float:
    """Heading of the step prev->curr, or `carried` when the step is too short.

    This is the position-differencing approximation used by the exact collision
    metric for planned trajectories, which come without headings.
    """
    dx = curr.x - prev.x
    dy = curr.y - prev.y
    if math.hypot(dx, dy) >= policy.min_displacement:
        return math.atan2(dy, dx)
    return carried


def obb_corners(box: OrientedBox) -> list[tuple[float, float]]:
    """The four corners, counter-clockwise starting front-left in the box frame."""
    c = math.cos(box.center.yaw)
    s = math.sin(box.center.yaw)
    hl = 0.5 * box.length
    hw = 0.5 * box.width
    local = ((hl, hw), (-hl, hw), (-hl, -hw), (hl, -hw))
    return [
        (box.center.x + c * lx - s * ly, box.center.y + s * lx + c * ly)
        for lx, ly in local
    ]


def _projected_interval(corners, ax, ay):
    vals = [px * ax + py * ay for px, py in corners]
    return min(vals), max(vals)


def obb_overlap(a: OrientedBox, b: OrientedBox) -> bool:
    """Closed-rectangle intersection test via the separating-axis theorem.

    Touching edges count as overlap (conservative for a safety metric). Only
    the four edge normals of the two rectangles need checking.
    """
    ca = obb_corners(a)
    cb = obb_corners(b)
    for yaw in (a.center.yaw, b.center.yaw):
        c = math.cos(yaw)
        s = math.sin(yaw)
        for ax, ay in ((c, s), (-s, c)):
            amin, amax = _projected_interval(ca, ax, ay)
            bmin, bmax = _projected_interval(cb, ax, ay)
            if amax < bmin or bmax < amin:
                return False
    return True
