"""Planning and prediction evaluation metrics.

Two collision checkers share one contract: the exact sparse checker tests
oriented-box overlap directly, with the ego heading either derived from
consecutive planned positions or frozen at its initial value; the legacy
occupancy checker rasterizes boxes onto a grid (a cell counts as covered when
the closed cell rectangle intersects the closed box) with the ego heading
always frozen, so it inherits both flaws the exact metric removes: grid
dilation and the straight-driving heading assumption.

Collision flags per horizon are cumulative: a horizon h is flagged when any
step up to h collides, so flags are monotone across horizons by construction.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import HeadingPolicy, OrientedBox, Pose2, heading_from_positions, obb_corners, obb_overlap
from .scenario import Agent, Trajectory

HEADING_DERIVED = "derived"
HEADING_FROZEN = "frozen"


@dataclass(frozen=True)
class CollisionConfig:
    ego_length: float = 4.08
    ego_width: float = 1.73
    grid_resolution: float = 0.5
    heading_mode: str = HEADING_DERIVED
    horizon_marks: tuple[float, ...] = (1.0, 2.0, 3.0)
    range_x: float = 51.2
    range_y: float = 51.2
    min_displacement: float = 1e-3

    def __post_init__(self):
        if self.grid_resolution <= 0:
            raise ValueError("grid_resolution must be positive")
        if self.heading_mode not in (HEADING_DERIVED, HEADING_FROZEN):
            raise ValueError(f"unknown heading mode {self.heading_mode!r}")
        if list(self.horizon_marks) != sorted(self.horizon_marks):
            raise ValueError("horizon_marks must be sorted ascending")
        object.__setattr__(self, "horizon_marks", tuple(self.horizon_marks))


@dataclass(frozen=True)
class CollisionReport:
    horizons: tuple[float, ...]
    flags: tuple[bool, ...]  # cumulative: collision at any step within the horizon
    step_collisions: tuple[bool, ...]  # per plan step 1..H
    first_collision_step: int | None

    def flag_at(self, horizon: float) -> bool:
        return self.flags[self.horizons.index(horizon)]


@dataclass(frozen=True)
class MotionErrorReport:
    min_ade: float
    min_fde: float
    miss: bool
    miss_threshold: float


def _mark_step(h: float, dt: float) -> int:
    step = h / dt
    rounded = round(step)
    if abs(step - rounded) > 1e-9:
        raise ValueError(f"horizon mark {h}s is not a whole number of {dt}s steps")
    return int(rounded)


def ego_boxes(plan: Trajectory, config: CollisionConfig) -> list[OrientedBox]:
    """Ego boxes at plan steps 1..H with the configured heading recovery."""
    policy = HeadingPolicy(config.min_displacement, plan.poses[0].yaw)
    carried = plan.poses[0].yaw
    boxes = []
    for t in range(1, len(plan)):
        if config.heading_mode == HEADING_DERIVED:
            carried = heading_from_positions(plan.poses[t - 1], plan.poses[t], policy, carried)
            heading = carried
        else:
            heading = plan.poses[0].yaw
        p = plan.poses[t]
        boxes.append(OrientedBox(Pose2(p.x, p.y, heading), config.ego_length, config.ego_width))
    return boxes


def _check_agent_cover(plan: Trajectory, agents: list[Agent]) -> None:
    for agent in agents:
        if len(agent.trajectory) < len(plan):
            raise ValueError(
                f"agent {agent.id} trajectory ({len(agent.trajectory)} poses) does not cover "
                f"the plan horizon ({len(plan)} poses)"
            )


def _agent_box(agent: Agent, t: int) -> OrientedBox:
    return OrientedBox(agent.trajectory.poses[t], agent.length, agent.width)


def _report(step_hits: list[bool], plan: Trajectory, config: CollisionConfig) -> CollisionReport:
    first = next((t + 1 for t, hit in enumerate(step_hits) if hit), None)
    flags = []
    for h in config.horizon_marks:
        step = _mark_step(h, plan.dt)
        if step > len(step_hits):
            raise ValueError(f"horizon mark {h}s needs {step} steps, plan has {len(step_hits)}")
        flags.append(any(step_hits[:step]))
    return CollisionReport(
        horizons=config.horizon_marks,
        flags=tuple(flags),
        step_collisions=tuple(step_hits),
        first_collision_step=first,
    )


def sparse_collision(plan: Trajectory, agents: list[Agent], config: CollisionConfig) -> CollisionReport:
    """Exact oriented-box collision check of a planned trajectory against agents."""
    _check_agent_cover(plan, agents)
    boxes = ego_boxes(plan, config)
    step_hits = []
    for t, ego in enumerate(boxes, start=1):
        step_hits.append(any(obb_overlap(ego, _agent_box(a, t)) for a in agents))
    return _report(step_hits, plan, config)


# --- occupancy-grid baseline -------------------------------------------------


def rasterize_box(box: OrientedBox, config: CollisionConfig) -> tuple[np.ndarray, int]:
    """Indices of grid cells whose closed rectangle intersects the closed box.

    The grid spans [-range_x, range_x] x [-range_y, range_y] at
    grid_resolution; returns (flat cell indices, candidate cells examined).
    """
    res = config.grid_resolution
    x0, y0 = -config.range_x, -config.range_y
    nx = math.ceil(2.0 * config.range_x / res)
    ny = math.ceil(2.0 * config.range_y / res)
    xs, ys = zip(*obb_corners(box))
    # one extra cell of window on each side; the exact test below decides
    i0 = max(0, math.floor((min(xs) - x0) / res) - 1)
    i1 = min(nx - 1, math.floor((max(xs) - x0) / res) + 1)
    j0 = max(0, math.floor((min(ys) - y0) / res) - 1)
    j1 = min(ny - 1, math.floor((max(ys) - y0) / res) + 1)
    if i0 > i1 or j0 > j1:
        return np.empty(0, dtype=np.int64), 0
    ii = np.arange(i0, i1 + 1)
    jj = np.arange(j0, j1 + 1)
    cx = x0 + (ii + 0.5) * res
    cy = y0 + (jj + 0.5) * res
    CX, CY = np.meshgrid(cx, cy, indexing="ij")
    dx = CX - box.center.x
    dy = CY - box.center.y
    c = math.cos(box.center.yaw)
    s = math.sin(box.center.yaw)
    a = 0.5 * box.length
    b = 0.5 * box.width
    h = 0.5 * res
    ok = (
        (np.abs(dx) <= h + a * abs(c) + b * abs(s))
        & (np.abs(dy) <= h + a * abs(s) + b * abs(c))
        & (np.abs(c * dx + s * dy) <= a + h * (abs(c) + abs(s)))
        & (np.abs(-s * dx + c * dy) <= b + h * (abs(s) + abs(c)))
    )
    II, JJ = np.meshgrid(ii, jj, indexing="ij")
    return (II[ok] * ny + JJ[ok]).ravel(), int(CX.size)


def occupancy_collision(
    plan: Trajectory, agents: list[Agent], config: CollisionConfig
) -> CollisionReport:
    """Legacy grid-based collision check: frozen ego heading, rasterized boxes.

    Per step, agent boxes are rasterized into occupied cells and the ego
    footprint cells are checked for occupancy. The ego heading stays at its
    initial value regardless of config.heading_mode, reproducing the
    straight-driving assumption of the baseline this metric replaces.
    """
    _check_agent_cover(plan, agents)
    frozen = CollisionConfig(
        ego_length=config.ego_length,
        ego_width=config.ego_width,
        grid_resolution=config.grid_resolution,
        heading_mode=HEADING_FROZEN,
        horizon_marks=config.horizon_marks,
        range_x=config.range_x,
        range_y=config.range_y,
        min_displacement=config.min_displacement,
    )
    boxes = ego_boxes(plan, frozen)
    step_hits = []
    for t, ego in enumerate(boxes, start=1):
        ego_cells, _ = rasterize_box(ego, config)
        hit = False
        if ego_cells.size:
            occupied = [rasterize_box(_agent_box(a, t), config)[0] for a in agents]
            if occupied:
                occ = np.unique(np.concatenate(occupied))
                hit = bool(np.isin(ego_cells, occ, assume_unique=False).any())
        step_hits.append(hit)
    return _report(step_hits, plan, config)


# --- displacement metrics ----------------------------------------------------


@dataclass(frozen=True)
class PlanningL2Report:
    horizons: tuple[float, ...]
    values: tuple[float, ...]
    avg: float


def planning_l2(
    plan: Trajectory, gt: Trajectory, horizon_marks=(1.0, 2.0, 3.0)
) -> PlanningL2Report:
    """Euclidean displacement between plan and ground truth at each horizon mark."""
    if plan.dt != gt.dt:
        raise ValueError(f"dt mismatch: plan {plan.dt} vs gt {gt.dt}")
    values = []
    for h in horizon_marks:
        step = _mark_step(h, plan.dt)
        if step >= len(plan) or step >= len(gt):
            raise ValueError(f"horizon mark {h}s needs step {step}, beyond trajectory")
        p = plan.poses[step]
        g = gt.poses[step]
        values.append(math.hypot(p.x - g.x, p.y - g.y))
    return PlanningL2Report(tuple(horizon_marks), tuple(values), float(np.mean(values)))


def motion_errors(predictions, ground_truth, miss_threshold: float = 2.0) -> MotionErrorReport:
    """minADE / minFDE over prediction modes plus the final-displacement miss flag."""
    preds = np.asarray(predictions, dtype=float)
    gt = np.asarray(ground_truth, dtype=float)
    if preds.ndim != 3 or preds.shape[1:] != gt.shape:
        raise ValueError(f"horizon mismatch: predictions {preds.shape} vs gt {gt.shape}")
    dist = np.linalg.norm(preds - gt[None], axis=2)  # (K, L)
    min_ade = float(dist.mean(axis=1).min())
    min_fde = float(dist[:, -1].min())
    return MotionErrorReport(min_ade, min_fde, bool(min_fde > miss_threshold), miss_threshold)
