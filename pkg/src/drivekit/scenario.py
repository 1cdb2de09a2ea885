"""Scenario container and its JSON interchange format.

A scenario is a timestamped world: an ego agent, other agents with oriented
boxes, and piecewise-Bezier map elements, all sharing one time step. Poses are
stored in a single global frame; ego-centric views are produced on demand so
the raw data stays immutable.

JSON schema (UTF-8)::

    {"dt": 0.5, "plan_horizon": 6,
     "ego": {"id": 0, "class": "vehicle", "length": 4.08, "width": 1.73,
             "trajectory": [[x, y, yaw], ...]},
     "agents": [ ...same shape as ego... ],
     "map_elements": [{"class": "divider",
                       "pieces": [{"degree": 1, "control_points": [[x, y], ...]}]}]}

Units are meters/radians/seconds. Per-pose yaw may be null (or the entry may
be just [x, y]); missing yaws are derived by position differencing at load.
A pose entry may carry a fourth element z, which is stored and used nowhere.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .bezier import BezierPiece, MapElement
from .geometry import HeadingPolicy, Pose2, heading_from_positions, transform_to_frame, wrap_angle

AGENT_CLASSES = ("vehicle", "pedestrian", "cyclist", "other")

DEFAULT_EGO_LENGTH = 4.08
DEFAULT_EGO_WIDTH = 1.73


class ValidationError(ValueError):
    """A scenario document violates an invariant; message names the field path."""


@dataclass(frozen=True)
class ScenarioConfig:
    """Evaluation extent and horizons. Ranges are half-extents around the origin."""

    range_x: float = 51.2
    range_y: float = 51.2
    dt: float = 0.5
    plan_horizon: int = 6
    predict_horizon: int = 12

    def __post_init__(self):
        if self.plan_horizon > self.predict_horizon:
            raise ValueError("plan_horizon must be <= predict_horizon")


@dataclass(frozen=True)
class Trajectory:
    """Ordered poses at a fixed time step; optional z per pose, carried unused."""

    poses: tuple[Pose2, ...]
    dt: float
    z: tuple[float, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "poses", tuple(self.poses))
        if len(self.poses) < 1:
            raise ValueError("trajectory needs at least one pose")
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.z is not None:
            z = tuple(float(v) for v in self.z)
            if len(z) != len(self.poses):
                raise ValueError("z list must match pose count")
            object.__setattr__(self, "z", z)

    def __len__(self) -> int:
        return len(self.poses)

    def positions(self) -> np.ndarray:
        return np.array([(p.x, p.y) for p in self.poses])


@dataclass(frozen=True)
class Agent:
    id: int
    cls: str
    length: float
    width: float
    trajectory: Trajectory

    def __post_init__(self):
        if self.cls not in AGENT_CLASSES:
            raise ValueError(f"unknown agent class {self.cls!r}")
        if not (self.length > 0 and self.width > 0):
            raise ValueError("agent dimensions must be positive")


@dataclass(frozen=True)
class Scenario:
    ego: Agent
    agents: tuple[Agent, ...] = field(default_factory=tuple)
    map_elements: tuple[MapElement, ...] = field(default_factory=tuple)
    horizon_steps: int = 6
    dt: float = 0.5

    def __post_init__(self):
        object.__setattr__(self, "agents", tuple(self.agents))
        object.__setattr__(self, "map_elements", tuple(self.map_elements))
        seen = {self.ego.id}
        for i, agent in enumerate(self.agents):
            if agent.id in seen:
                raise ValidationError(f"agents[{i}].id: duplicate id {agent.id}")
            seen.add(agent.id)
        for name, traj in [("ego", self.ego.trajectory)] + [
            (f"agents[{i}]", a.trajectory) for i, a in enumerate(self.agents)
        ]:
            if traj.dt != self.dt:
                raise ValidationError(f"{name}.trajectory.dt: {traj.dt} != scenario dt {self.dt}")
        if len(self.ego.trajectory) < self.horizon_steps + 1:
            raise ValidationError(
                f"ego.trajectory: length {len(self.ego.trajectory)} < horizon_steps+1 "
                f"({self.horizon_steps + 1})"
            )


def _parse_trajectory(entries, dt, path, policy: HeadingPolicy) -> Trajectory:
    if not isinstance(entries, list) or not entries:
        raise ValidationError(f"{path}: trajectory must be a non-empty list")
    raw = []
    zs = []
    has_z = False
    for i, e in enumerate(entries):
        if not isinstance(e, list) or len(e) not in (2, 3, 4):
            raise ValidationError(f"{path}[{i}]: pose must be [x, y], [x, y, yaw] or [x, y, yaw, z]")
        x, y = float(e[0]), float(e[1])
        yaw = e[2] if len(e) >= 3 else None
        raw.append((x, y, None if yaw is None else float(yaw)))
        if len(e) == 4:
            has_z = True
            zs.append(float(e[3]))
        else:
            zs.append(0.0)
    poses: list[Pose2] = []
    for i, (x, y, yaw) in enumerate(raw):
        if yaw is None:
            if i == 0:
                nxt = raw[1] if len(raw) > 1 else None
                if nxt is not None and math.hypot(nxt[0] - x, nxt[1] - y) >= policy.min_displacement:
                    yaw = math.atan2(nxt[1] - y, nxt[0] - x)
                else:
                    yaw = policy.initial_heading
            else:
                yaw = heading_from_positions(poses[i - 1], Pose2(x, y), policy, poses[i - 1].yaw)
        poses.append(Pose2(x, y, yaw))
    return Trajectory(tuple(poses), dt, tuple(zs) if has_z else None)


def _parse_agent(doc, dt, path, policy) -> Agent:
    for key in ("id", "class", "length", "width", "trajectory"):
        if key not in doc:
            raise ValidationError(f"{path}.{key}: missing")
    if "dt" in doc and float(doc["dt"]) != dt:
        raise ValidationError(f"{path}.dt: {doc['dt']} != scenario dt {dt}")
    try:
        return Agent(
            id=int(doc["id"]),
            cls=doc["class"],
            length=float(doc["length"]),
            width=float(doc["width"]),
            trajectory=_parse_trajectory(doc["trajectory"], dt, f"{path}.trajectory", policy),
        )
    except ValidationError:
        raise
    except ValueError as err:
        raise ValidationError(f"{path}: {err}") from err


def _parse_map_element(doc, path) -> MapElement:
    for key in ("class", "pieces"):
        if key not in doc:
            raise ValidationError(f"{path}.{key}: missing")
    pieces = []
    for i, p in enumerate(doc["pieces"]):
        cps = p.get("control_points")
        try:
            piece = BezierPiece(cps)
        except ValueError as err:
            raise ValidationError(f"{path}.pieces[{i}]: {err}") from err
        if "degree" in p and int(p["degree"]) != piece.degree:
            raise ValidationError(
                f"{path}.pieces[{i}].degree: {p['degree']} != control point count - 1"
            )
        pieces.append(piece)
    try:
        return MapElement(doc["class"], tuple(pieces))
    except ValueError as err:
        raise ValidationError(f"{path}: {err}") from err


def load_scenario(data: bytes | str, heading_policy: HeadingPolicy | None = None) -> Scenario:
    """Parse and fully validate a scenario document."""
    policy = heading_policy or HeadingPolicy()
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as err:
        raise ValidationError(f"malformed JSON: {err}") from err
    if not isinstance(doc, dict):
        raise ValidationError("top level: expected an object")
    for key in ("dt", "ego"):
        if key not in doc:
            raise ValidationError(f"{key}: missing")
    dt = float(doc["dt"])
    if not dt > 0:
        raise ValidationError(f"dt: must be positive, got {dt}")
    ego = _parse_agent(doc["ego"], dt, "ego", policy)
    agents = tuple(
        _parse_agent(a, dt, f"agents[{i}]", policy) for i, a in enumerate(doc.get("agents", []))
    )
    elements = tuple(
        _parse_map_element(m, f"map_elements[{i}]")
        for i, m in enumerate(doc.get("map_elements", []))
    )
    horizon = int(doc.get("plan_horizon", 6))
    return Scenario(ego=ego, agents=agents, map_elements=elements, horizon_steps=horizon, dt=dt)


def _trajectory_doc(traj: Trajectory):
    if traj.z is not None:
        return [[p.x, p.y, p.yaw, z] for p, z in zip(traj.poses, traj.z)]
    return [[p.x, p.y, p.yaw] for p in traj.poses]


def _agent_doc(agent: Agent):
    return {
        "id": agent.id,
        "class": agent.cls,
        "length": agent.length,
        "width": agent.width,
        "trajectory": _trajectory_doc(agent.trajectory),
    }


def save_scenario(scenario: Scenario) -> bytes:
    """Serialize to canonical JSON; load(save(s)) round-trips exactly."""
    doc = {
        "dt": scenario.dt,
        "plan_horizon": scenario.horizon_steps,
        "ego": _agent_doc(scenario.ego),
        "agents": [_agent_doc(a) for a in scenario.agents],
        "map_elements": [
            {
                "class": m.cls,
                "pieces": [
                    {"degree": p.degree, "control_points": p.control_points.tolist()}
                    for p in m.pieces
                ],
            }
            for m in scenario.map_elements
        ],
    }
    return json.dumps(doc, separators=(",", ":")).encode("utf-8")


def _transform_trajectory(traj: Trajectory, reference: Pose2) -> Trajectory:
    return Trajectory(tuple(transform_to_frame(traj.poses, reference)), traj.dt, traj.z)


def to_ego_frame(scenario: Scenario, step: int) -> Scenario:
    """Re-express every pose in the ego pose at `step`; that pose becomes the origin."""
    if not 0 <= step < len(scenario.ego.trajectory):
        raise IndexError(f"step {step} outside ego trajectory of length {len(scenario.ego.trajectory)}")
    ref = scenario.ego.trajectory.poses[step]
    ego = replace(scenario.ego, trajectory=_transform_trajectory(scenario.ego.trajectory, ref))
    agents = tuple(
        replace(a, trajectory=_transform_trajectory(a.trajectory, ref)) for a in scenario.agents
    )
    c = math.cos(ref.yaw)
    s = math.sin(ref.yaw)
    elements = []
    for m in scenario.map_elements:
        pieces = []
        for p in m.pieces:
            dx = p.control_points[:, 0] - ref.x
            dy = p.control_points[:, 1] - ref.y
            pieces.append(BezierPiece(np.stack([c * dx + s * dy, -s * dx + c * dy], axis=1)))
        elements.append(MapElement(m.cls, tuple(pieces)))
    return Scenario(
        ego=ego,
        agents=agents,
        map_elements=tuple(elements),
        horizon_steps=scenario.horizon_steps,
        dt=scenario.dt,
    )
