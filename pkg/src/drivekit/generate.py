"""Deterministic synthetic scenario generation.

Five scenario kinds cover the evaluation surface: `near_miss` (parallel agent
at a controlled edge-to-edge gap), `turn` (90-degree ego arc with an agent
tucked inside the corner so frozen and derived ego headings disagree),
`crossing` (perpendicular agent with a time offset), `straight` (lead plus
parallel traffic), and `random` (seeded clutter around the ego path). Agents
move at constant velocity. Equal spec means byte-identical serialized output.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bezier import BezierPiece, MapElement
from .geometry import Pose2
from .scenario import (
    DEFAULT_EGO_LENGTH,
    DEFAULT_EGO_WIDTH,
    Agent,
    Scenario,
    ScenarioConfig,
    Trajectory,
)

KINDS = ("near_miss", "turn", "crossing", "straight", "random")

# default occupancy grid the near-miss corpus is pinned against
EVAL_RANGE = 51.2
EVAL_RESOLUTION = 0.5
# keep the whole gap interval inside one grid row: the ego's near edge sits
# this far inside the row, so gaps up to EVAL_RESOLUTION - 2*margin never
# cross a row boundary and the legacy rasterizer always bridges them
GAP_ROW_MARGIN = 0.025


@dataclass(frozen=True)
class GenSpec:
    kind: str
    seed: int = 0
    gap: float = 0.3
    ego_speed: float = 5.0
    agent_speed: float | None = None
    agent_count: int = 3
    turn_radius: float = 8.0
    turn_agent_angle: float = 55.0  # degrees along the arc where the agent sits
    turn_agent_inset: float = 2.0  # meters inside the arc from the ego path
    cross_step: int = 4
    time_offset: float = 1.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown scenario kind {self.kind!r}")


def _straight_trajectory(start: Pose2, speed: float, steps: int, dt: float) -> Trajectory:
    c, s = math.cos(start.yaw), math.sin(start.yaw)
    poses = tuple(
        Pose2(start.x + c * speed * dt * k, start.y + s * speed * dt * k, start.yaw)
        for k in range(steps + 1)
    )
    return Trajectory(poses, dt)


def _vehicle(agent_id: int, traj: Trajectory, length=DEFAULT_EGO_LENGTH, width=DEFAULT_EGO_WIDTH, cls="vehicle") -> Agent:
    return Agent(id=agent_id, cls=cls, length=length, width=width, trajectory=traj)


def _line_element(cls: str, p0, p1) -> MapElement:
    return MapElement(cls, (BezierPiece(np.array([p0, p1], dtype=float)),))


def _straight_map(x_start, x_end, center_y) -> list[MapElement]:
    return [
        _line_element("lane", (x_start, center_y), (x_end, center_y)),
        _line_element("divider", (x_start, center_y + 1.75), (x_end, center_y + 1.75)),
        _line_element("divider", (x_start, center_y - 1.75), (x_end, center_y - 1.75)),
    ]


def _arc_quadratic_pieces(cx, cy, radius, theta0, theta1, n_pieces) -> list[BezierPiece]:
    """Quadratic Bezier approximation of a circular arc, one piece per sub-arc."""
    pieces = []
    for i in range(n_pieces):
        a = theta0 + (theta1 - theta0) * i / n_pieces
        b = theta0 + (theta1 - theta0) * (i + 1) / n_pieces
        mid = 0.5 * (a + b)
        p0 = (cx + radius * math.cos(a), cy + radius * math.sin(a))
        p2 = (cx + radius * math.cos(b), cy + radius * math.sin(b))
        # control point at the intersection of the endpoint tangents
        r_mid = radius / math.cos(0.5 * (b - a))
        p1 = (cx + r_mid * math.cos(mid), cy + r_mid * math.sin(mid))
        pieces.append(BezierPiece(np.array([p0, p1, p2])))
    return pieces


def _near_miss(spec: GenSpec, config: ScenarioConfig) -> Scenario:
    steps = config.predict_horizon
    dt = config.dt
    # grid row boundary just above y = 0 for the default evaluation grid
    row_edge = -EVAL_RANGE + math.floor((0.3 + EVAL_RANGE) / EVAL_RESOLUTION) * EVAL_RESOLUTION
    ego_top = row_edge + GAP_ROW_MARGIN
    ego_y = ego_top - 0.5 * DEFAULT_EGO_WIDTH
    agent_width = DEFAULT_EGO_WIDTH
    agent_y = ego_top + spec.gap + 0.5 * agent_width
    x_start = -15.0
    speed = spec.ego_speed
    agent_speed = speed if spec.agent_speed is None else spec.agent_speed
    ego = _vehicle(0, _straight_trajectory(Pose2(x_start, ego_y, 0.0), speed, steps, dt))
    agent = _vehicle(1, _straight_trajectory(Pose2(x_start, agent_y, 0.0), agent_speed, steps, dt))
    x_end = x_start + speed * dt * steps + 10.0
    return Scenario(
        ego=ego,
        agents=(agent,),
        map_elements=tuple(_straight_map(x_start - 10.0, x_end, ego_y)),
        horizon_steps=config.plan_horizon,
        dt=dt,
    )


def _turn(spec: GenSpec, config: ScenarioConfig) -> Scenario:
    steps = config.predict_horizon
    dt = config.dt
    radius = spec.turn_radius
    turn_steps = config.plan_horizon
    # left turn: arc center sits at (0, radius); ego starts at origin heading +x
    poses = []
    for k in range(steps + 1):
        if k <= turn_steps:
            theta = 0.5 * math.pi * k / turn_steps
            poses.append(Pose2(radius * math.sin(theta), radius * (1 - math.cos(theta)), theta))
        else:
            extra = (k - turn_steps) * (0.5 * math.pi * radius / turn_steps)
            poses.append(Pose2(radius, radius + extra, 0.5 * math.pi))
    ego = _vehicle(0, Trajectory(tuple(poses), dt))
    ang = math.radians(spec.turn_agent_angle)
    r_agent = radius - spec.turn_agent_inset
    agent_pose = Pose2(r_agent * math.sin(ang), radius - r_agent * math.cos(ang), ang)
    agent = Agent(
        id=1,
        cls="other",
        length=1.0,
        width=1.0,
        trajectory=Trajectory(tuple(agent_pose for _ in range(steps + 1)), dt),
    )
    lane = MapElement("lane", tuple(_arc_quadratic_pieces(0.0, radius, radius, -0.5 * math.pi, 0.0, 3)))
    return Scenario(
        ego=ego,
        agents=(agent,),
        map_elements=(lane,),
        horizon_steps=config.plan_horizon,
        dt=dt,
    )


def _crossing(spec: GenSpec, config: ScenarioConfig) -> Scenario:
    steps = config.predict_horizon
    dt = config.dt
    speed = spec.ego_speed
    agent_speed = speed if spec.agent_speed is None else spec.agent_speed
    x_start = -10.0
    ego = _vehicle(0, _straight_trajectory(Pose2(x_start, 0.0, 0.0), speed, steps, dt))
    cross_x = x_start + speed * dt * spec.cross_step
    # agent reaches the crossing point time_offset seconds after the ego does
    t_agent = spec.cross_step * dt + spec.time_offset
    agent_start_y = -agent_speed * t_agent
    agent = _vehicle(
        1, _straight_trajectory(Pose2(cross_x, agent_start_y, 0.5 * math.pi), agent_speed, steps, dt)
    )
    elements = _straight_map(x_start - 5.0, x_start + speed * dt * steps + 5.0, 0.0)
    elements.append(_line_element("cross", (cross_x, -3.0), (cross_x, 3.0)))
    return Scenario(
        ego=ego,
        agents=(agent,),
        map_elements=tuple(elements),
        horizon_steps=config.plan_horizon,
        dt=dt,
    )


def _straight(spec: GenSpec, config: ScenarioConfig) -> Scenario:
    steps = config.predict_horizon
    dt = config.dt
    rng = np.random.default_rng(spec.seed)
    speed = spec.ego_speed
    ego = _vehicle(0, _straight_trajectory(Pose2(-10.0, 0.0, 0.0), speed, steps, dt))
    agents = []
    for i in range(spec.agent_count):
        lane_y = [0.0, 3.5, -3.5][i % 3]
        ahead = 12.0 + 8.0 * (i // 3) + rng.uniform(0.0, 2.0)
        a_speed = speed if lane_y == 0.0 else speed + rng.uniform(-1.0, 1.0)
        agents.append(
            _vehicle(i + 1, _straight_trajectory(Pose2(-10.0 + ahead, lane_y, 0.0), a_speed, steps, dt))
        )
    return Scenario(
        ego=ego,
        agents=tuple(agents),
        map_elements=tuple(_straight_map(-20.0, 30.0, 0.0)),
        horizon_steps=config.plan_horizon,
        dt=dt,
    )


def _random(spec: GenSpec, config: ScenarioConfig) -> Scenario:
    steps = config.predict_horizon
    dt = config.dt
    rng = np.random.default_rng(spec.seed)
    speed = rng.uniform(3.0, 8.0)
    ego = _vehicle(0, _straight_trajectory(Pose2(rng.uniform(-15.0, -5.0), 0.0, 0.0), speed, steps, dt))
    agents = []
    for i in range(spec.agent_count):
        cls = ("vehicle", "cyclist", "pedestrian")[int(rng.integers(3))]
        length, width = {
            "vehicle": (4.08, 1.73),
            "cyclist": (1.8, 0.6),
            "pedestrian": (0.6, 0.6),
        }[cls]
        start = Pose2(rng.uniform(-15.0, 25.0), rng.uniform(-6.0, 6.0), rng.uniform(-math.pi, math.pi))
        a_speed = rng.uniform(0.0, 8.0)
        agents.append(
            Agent(
                id=i + 1,
                cls=cls,
                length=length,
                width=width,
                trajectory=_straight_trajectory(start, a_speed, steps, dt),
            )
        )
    return Scenario(
        ego=ego,
        agents=tuple(agents),
        map_elements=tuple(_straight_map(-25.0, 35.0, 0.0)),
        horizon_steps=config.plan_horizon,
        dt=dt,
    )


_BUILDERS = {
    "near_miss": _near_miss,
    "turn": _turn,
    "crossing": _crossing,
    "straight": _straight,
    "random": _random,
}


def generate(spec: GenSpec, config: ScenarioConfig | None = None) -> Scenario:
    """Build a validated scenario from a generation spec; seed determines output."""
    config = config or ScenarioConfig()
    scenario = _BUILDERS[spec.kind](spec, config)
    limit_x = config.range_x
    limit_y = config.range_y
    for agent in (scenario.ego, *scenario.agents):
        for p in agent.trajectory.poses:
            if abs(p.x) > limit_x or abs(p.y) > limit_y:
                raise ValueError(
                    f"agent {agent.id} leaves the evaluation range at ({p.x:.1f}, {p.y:.1f})"
                )
    return scenario


def detection_log_from_scenario(scenario: Scenario, steps: int | None = None) -> list[dict]:
    """Per-frame detection log (ego frame) for memory-bank replay.

    Frame k holds one detection per agent, expressed in the ego pose at k,
    with confidence decaying in the agent's distance; ego_motion is the ego
    pose delta from the previous frame.
    """
    from .scenario import to_ego_frame

    n = steps if steps is not None else len(scenario.ego.trajectory)
    frames = []
    prev_ego = None
    for k in range(n):
        view = to_ego_frame(scenario, k)
        dets = []
        for agent in view.agents:
            p = agent.trajectory.poses[k]
            dist = math.hypot(p.x, p.y)
            conf = max(0.05, min(1.0, 1.0 - dist / 60.0))
            dets.append(
                {
                    "box": {"x": p.x, "y": p.y, "yaw": p.yaw, "length": agent.length, "width": agent.width},
                    "confidence": round(conf, 4),
                    "class": agent.cls,
                    "velocity": [0.0, 0.0],
                    "matched_id": None,
                }
            )
        ego_pose = scenario.ego.trajectory.poses[k]
        if prev_ego is None:
            motion = [0.0, 0.0, 0.0]
        else:
            c, s = math.cos(prev_ego.yaw), math.sin(prev_ego.yaw)
            dx, dy = ego_pose.x - prev_ego.x, ego_pose.y - prev_ego.y
            motion = [c * dx + s * dy, -s * dx + c * dy, ego_pose.yaw - prev_ego.yaw]
        frames.append({"ego_motion": motion, "detections": dets})
        prev_ego = ego_pose
    return frames
