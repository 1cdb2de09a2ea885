"""Ego-agent relationship labels: lateral (left/right/no) and longitudinal (front/back/no).

Labels are generated against the ego future by probing it with constant
speed-up and speed-down variants: an agent that stays laterally close gains a
left/right constraint; an agent the sped-up ego would reach gains a front
constraint; one the slowed ego would stay close to gains back. Distances are
measured in the instantaneous ego (or probe) frame at each step, lateral as
|y|, longitudinal as |x|, with later steps overwriting earlier matches.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import Pose2
from .scenario import Trajectory

LATERAL_LEFT = "left"
LATERAL_RIGHT = "right"
LONGITUDINAL_FRONT = "front"
LONGITUDINAL_BACK = "back"
NO_RELATION = "no"


@dataclass(frozen=True)
class RelationshipThresholds:
    lateral: float = 2.0
    longitudinal: float = 5.0
    probe_accel: float = 2.0

    def __post_init__(self):
        if not (self.lateral > 0 and self.longitudinal > 0 and self.probe_accel > 0):
            raise ValueError("thresholds and probe acceleration must be positive")


@dataclass(frozen=True)
class RelationshipLabel:
    lateral: str = NO_RELATION
    longitudinal: str = NO_RELATION


def _arc_lengths(positions: np.ndarray) -> np.ndarray:
    seg = np.linalg.norm(np.diff(positions, axis=0), axis=1)
    return np.concatenate([[0.0], np.cumsum(seg)])


def _point_at_arc(positions: np.ndarray, cum: np.ndarray, s: float) -> tuple[float, float, float]:
    """Position and tangent heading at arc length s, extrapolating past the end."""
    total = cum[-1]
    if s >= total:
        # walk back to the last segment with real extent
        for i in range(len(positions) - 1, 0, -1):
            dx = positions[i, 0] - positions[i - 1, 0]
            dy = positions[i, 1] - positions[i - 1, 1]
            if dx != 0.0 or dy != 0.0:
                heading = math.atan2(dy, dx)
                seg = math.hypot(dx, dy)
                over = s - total
                return (
                    positions[-1, 0] + over * dx / seg,
                    positions[-1, 1] + over * dy / seg,
                    heading,
                )
        return positions[-1, 0], positions[-1, 1], 0.0
    i = int(np.searchsorted(cum, s, side="right")) - 1
    i = max(0, min(i, len(positions) - 2))
    while cum[i + 1] == cum[i]:  # skip zero-length segments
        i += 1
    frac = (s - cum[i]) / (cum[i + 1] - cum[i])
    dx = positions[i + 1, 0] - positions[i, 0]
    dy = positions[i + 1, 1] - positions[i, 1]
    return positions[i, 0] + frac * dx, positions[i, 1] + frac * dy, math.atan2(dy, dx)


def probe_trajectory(ego_future: Trajectory, mode: str, accel: float) -> Trajectory:
    """Re-time the ego path under constant acceleration from its initial speed.

    The geometric path is kept; step positions are found by arc-length
    interpolation at s(t) = v0*t +- accel*t^2/2, with speed clamped at zero for
    the speed-down probe and extrapolation along the final heading when the
    sped-up ego overruns the path. A zero-length path is returned unchanged.
    """
    if mode not in ("speedup", "speeddown"):
        raise ValueError(f"mode must be 'speedup' or 'speeddown', got {mode!r}")
    if len(ego_future) < 2:
        raise ValueError("ego future needs at least 2 poses")
    positions = ego_future.positions()
    cum = _arc_lengths(positions)
    if cum[-1] == 0.0:
        return ego_future
    dt = ego_future.dt
    v0 = math.hypot(positions[1, 0] - positions[0, 0], positions[1, 1] - positions[0, 1]) / dt

    poses = []
    for k in range(len(ego_future)):
        t = k * dt
        if mode == "speedup":
            s = v0 * t + 0.5 * accel * t * t
        else:
            t_stop = v0 / accel if accel > 0 else math.inf
            if t < t_stop:
                s = v0 * t - 0.5 * accel * t * t
            else:
                s = v0 * v0 / (2.0 * accel)
        x, y, heading = _point_at_arc(positions, cum, s)
        poses.append(Pose2(x, y, heading))
    return Trajectory(tuple(poses), dt)


def _offset_in_frame(point: np.ndarray, frame: Pose2) -> tuple[float, float]:
    c = math.cos(frame.yaw)
    s = math.sin(frame.yaw)
    dx = point[0] - frame.x
    dy = point[1] - frame.y
    return c * dx + s * dy, -s * dx + c * dy


def label_relationships(
    agent_futures: list[Trajectory],
    ego_future: Trajectory,
    thresholds: RelationshipThresholds = RelationshipThresholds(),
) -> list[RelationshipLabel]:
    """One (lateral, longitudinal) label per agent against the ego future.

    Implements the generation loop literally: per step, lateral left/right by
    the sign of the agent's y offset in the ego frame, front against the
    speed-up probe, then back against the speed-down probe; the last match in
    loop order wins, default (no, no).
    """
    horizon = len(ego_future)
    for i, traj in enumerate(agent_futures):
        if len(traj) != horizon:
            raise ValueError(f"agent {i} horizon {len(traj)} != ego horizon {horizon}")
        if traj.dt != ego_future.dt:
            raise ValueError(f"agent {i} dt {traj.dt} != ego dt {ego_future.dt}")
    speedup = probe_trajectory(ego_future, "speedup", thresholds.probe_accel)
    speeddown = probe_trajectory(ego_future, "speeddown", thresholds.probe_accel)

    labels = []
    for traj in agent_futures:
        positions = traj.positions()
        lateral = NO_RELATION
        longitudinal = NO_RELATION
        for t in range(horizon):
            _, lat_off = _offset_in_frame(positions[t], ego_future.poses[t])
            if abs(lat_off) < thresholds.lateral:
                lateral = LATERAL_LEFT if lat_off > 0 else LATERAL_RIGHT
            lon_up, _ = _offset_in_frame(positions[t], speedup.poses[t])
            if abs(lon_up) < thresholds.longitudinal:
                longitudinal = LONGITUDINAL_FRONT
            lon_down, _ = _offset_in_frame(positions[t], speeddown.poses[t])
            if abs(lon_down) < thresholds.longitudinal:
                longitudinal = LONGITUDINAL_BACK
        labels.append(RelationshipLabel(lateral, longitudinal))
    return labels
