"""Two-level multi-task memory: a scene-level frame FIFO plus per-id instance histories.

The scene level keeps the top-K detections of each of the last M frames with
no cross-frame identity. The instance level keys histories by a persistent id
assigned on promotion; ids are never reused, records per id are bounded by the
same M, and an id is expired after `expiry_misses` consecutive unseen frames.
Association of detections to ids is an input here, not computed.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field, replace

import numpy as np

from .geometry import OrientedBox, Pose2, rotate_vector, transform_to_frame

#: scene-level top-K for map elements per class (memory query budget)
DEFAULT_MAP_TOPK = {"divider": 14, "cross": 12, "road_segment": 6, "lane": 10}


@dataclass(frozen=True)
class MemoryConfig:
    max_history: int = 5
    scene_topk: int = 256
    map_topk: dict = field(default_factory=lambda: dict(DEFAULT_MAP_TOPK))
    promote_threshold: float = 0.5
    expiry_misses: int = 8
    drop_prob: float = 0.5
    fp_prob: float = 0.2
    fp_noise_sigma: float = 0.5
    fp_noise_clip: float = 2.0

    def __post_init__(self):
        if self.max_history < 1 or self.scene_topk < 1 or self.expiry_misses < 1:
            raise ValueError("counts must be positive")
        for name in ("promote_threshold", "drop_prob", "fp_prob"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {v}")


@dataclass(frozen=True)
class DetectionRecord:
    box: OrientedBox
    confidence: float
    cls: str = "vehicle"
    velocity: tuple[float, float] = (0.0, 0.0)
    feature: tuple[float, ...] | None = None

    def __post_init__(self):
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"confidence must be in [0, 1], got {self.confidence}")


@dataclass
class InstanceTrack:
    records: deque  # of DetectionRecord, maxlen = max_history
    miss_count: int = 0
    negative: bool = False


def _transform_record(rec: DetectionRecord, delta: Pose2) -> DetectionRecord:
    center = transform_to_frame([rec.box.center], delta)[0]
    vx, vy = rotate_vector(rec.velocity[0], rec.velocity[1], -delta.yaw)
    return replace(rec, box=OrientedBox(center, rec.box.length, rec.box.width), velocity=(vx, vy))


def _shift_record(rec: DetectionRecord, dx: float, dy: float) -> DetectionRecord:
    c = rec.box.center
    return replace(rec, box=OrientedBox(Pose2(c.x + dx, c.y + dy, c.yaw), rec.box.length, rec.box.width))


class MemoryBank:
    """Single-writer mutable store; reads are safe between mutations."""

    def __init__(self, config: MemoryConfig | None = None):
        self.config = config or MemoryConfig()
        self.scene_frames: deque = deque(maxlen=self.config.max_history)
        self.instances: dict[int, InstanceTrack] = {}
        self._next_id = 0

    def _fresh_id(self) -> int:
        i = self._next_id
        self._next_id += 1
        return i

    def summarize_frame(self, detections) -> list[int]:
        """Push one frame of (DetectionRecord, matched_id or None) pairs.

        The top scene_topk records by confidence become a new scene frame
        (oldest evicted once max_history frames exist). Matched detections
        extend their instance and reset its miss counter; unmatched
        detections at or above promote_threshold get fresh ids. Live
        instances absent from the frame gain a miss. Returns new ids.
        """
        cfg = self.config
        order = sorted(range(len(detections)), key=lambda i: (-detections[i][0].confidence, i))
        frame = tuple(detections[i][0] for i in order[: cfg.scene_topk])
        self.scene_frames.append(frame)

        seen: set[int] = set()
        new_ids: list[int] = []
        for rec, matched in detections:
            if matched is not None:
                if matched not in self.instances:
                    raise ValueError(f"matched_id {matched} is not a live instance")
                track = self.instances[matched]
                track.records.append(rec)
                track.miss_count = 0
                seen.add(matched)
            elif rec.confidence >= cfg.promote_threshold:
                new_id = self._fresh_id()
                track = InstanceTrack(records=deque([rec], maxlen=cfg.max_history))
                self.instances[new_id] = track
                new_ids.append(new_id)
                seen.add(new_id)
        for iid, track in self.instances.items():
            if iid not in seen:
                track.miss_count += 1
        return new_ids

    def expire(self) -> list[int]:
        """Drop instances whose miss count reached expiry_misses; return their ids."""
        dead = [i for i, t in self.instances.items() if t.miss_count >= self.config.expiry_misses]
        for i in dead:
            del self.instances[i]
        return dead

    def propagate(self, ego_motion: Pose2) -> None:
        """Re-express all stored boxes and velocities in the new ego frame.

        `ego_motion` is the new ego pose expressed in the previous ego frame.
        """
        self.scene_frames = deque(
            (tuple(_transform_record(r, ego_motion) for r in frame) for frame in self.scene_frames),
            maxlen=self.config.max_history,
        )
        for track in self.instances.values():
            track.records = deque(
                (_transform_record(r, ego_motion) for r in track.records),
                maxlen=self.config.max_history,
            )

    def augment_tracks(self, seed: int) -> None:
        """Training-time track augmentation: random drops, then jittered negatives.

        Each instance is independently dropped with drop_prob; each survivor
        then spawns, with fp_prob, an approximate-negative duplicate under a
        fresh id: every record shifted by one shared Gaussian offset
        (sigma fp_noise_sigma, radius clipped at fp_noise_clip).
        """
        cfg = self.config
        rng = np.random.default_rng(seed)
        for iid in list(self.instances):
            if rng.random() < cfg.drop_prob:
                del self.instances[iid]
        for iid in list(self.instances):
            if rng.random() < cfg.fp_prob:
                dx, dy = rng.normal(0.0, cfg.fp_noise_sigma, size=2)
                r = math.hypot(dx, dy)
                if r > cfg.fp_noise_clip:
                    dx, dy = dx * cfg.fp_noise_clip / r, dy * cfg.fp_noise_clip / r
                src = self.instances[iid]
                dup = InstanceTrack(
                    records=deque(
                        (_shift_record(rec, dx, dy) for rec in src.records),
                        maxlen=cfg.max_history,
                    ),
                    miss_count=src.miss_count,
                    negative=True,
                )
                self.instances[self._fresh_id()] = dup

    def scene_window(self) -> list[tuple[DetectionRecord, ...]]:
        """Stored scene frames, newest first. Read-only view."""
        return list(reversed(self.scene_frames))

    def snapshot(self) -> dict:
        """JSON-ready view of the whole bank (scene frames oldest first)."""

        def rec_doc(r: DetectionRecord) -> dict:
            return {
                "box": {
                    "x": r.box.center.x,
                    "y": r.box.center.y,
                    "yaw": r.box.center.yaw,
                    "length": r.box.length,
                    "width": r.box.width,
                },
                "confidence": r.confidence,
                "class": r.cls,
                "velocity": list(r.velocity),
                "feature": None if r.feature is None else list(r.feature),
            }

        return {
            "next_id": self._next_id,
            "scene_frames": [[rec_doc(r) for r in frame] for frame in self.scene_frames],
            "instances": [
                {
                    "id": iid,
                    "miss_count": t.miss_count,
                    "negative": t.negative,
                    "records": [rec_doc(r) for r in t.records],
                }
                for iid, t in self.instances.items()
            ],
        }


class MapMemory:
    """Scene-level memory for map elements: per-class top-K, frame FIFO, no ids."""

    def __init__(self, config: MemoryConfig | None = None):
        self.config = config or MemoryConfig()
        self.frames: deque = deque(maxlen=self.config.max_history)

    def push_frame(self, elements) -> None:
        """Store (MapElement, confidence) pairs, keeping top-K per class."""
        topk = self.config.map_topk
        kept = []
        by_class: dict[str, int] = {}
        order = sorted(range(len(elements)), key=lambda i: (-elements[i][1], i))
        for i in order:
            elem, conf = elements[i]
            limit = topk.get(elem.cls) if isinstance(topk, dict) else topk
            count = by_class.get(elem.cls, 0)
            if limit is None or count < limit:
                kept.append((elem, conf))
                by_class[elem.cls] = count + 1
        self.frames.append(tuple(kept))

    def window(self) -> list[tuple]:
        return list(reversed(self.frames))
