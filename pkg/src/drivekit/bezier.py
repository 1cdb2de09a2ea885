"""Piecewise Bezier map elements and uniform curve sampling.

Map elements are chained Bezier pieces with a per-class budget of
<max pieces, max degree>. Sampling is uniform in the curve parameter t.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

MAP_CLASSES = ("divider", "cross", "road_segment", "lane")

# per-class <max pieces, max degree>
DEFAULT_CLASS_CONFIG: dict[str, tuple[int, int]] = {
    "divider": (3, 2),
    "cross": (1, 1),
    "road_segment": (7, 3),
    "lane": (7, 3),
}

JOINT_TOL = 1e-9


def class_config(cls: str, overrides: dict[str, tuple[int, int]] | None = None) -> tuple[int, int]:
    """<max pieces, max degree> budget for a map-element class."""
    table = dict(DEFAULT_CLASS_CONFIG)
    if overrides:
        table.update(overrides)
    if cls not in table:
        raise ValueError(f"unknown map element class {cls!r}")
    return table[cls]


def bernstein(i: int, n: int, t: float) -> float:
    """Bernstein basis weight C(n,i) * t**i * (1-t)**(n-i)."""
    if not 0 <= i <= n:
        raise ValueError(f"index i={i} outside 0..{n}")
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"parameter t={t} outside [0, 1]")
    return math.comb(n, i) * t**i * (1.0 - t) ** (n - i)


@dataclass(frozen=True)
class BezierPiece:
    """One Bezier piece of degree n with n+1 control points, shape (n+1, 2)."""

    control_points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.control_points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 2:
            raise ValueError("control_points must have shape (n+1, 2) with n >= 1")
        object.__setattr__(self, "control_points", pts)

    @property
    def degree(self) -> int:
        return self.control_points.shape[0] - 1


def eval_piece(piece: BezierPiece, t: float) -> np.ndarray:
    """Point on the piece at parameter t: sum_i b_{i,n}(t) c_i."""
    n = piece.degree
    w = np.array([bernstein(i, n, t) for i in range(n + 1)])
    return w @ piece.control_points


@dataclass(frozen=True)
class MapElement:
    cls: str
    pieces: tuple[BezierPiece, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "pieces", tuple(self.pieces))
        max_pieces, max_degree = class_config(self.cls)
        if not self.pieces:
            raise ValueError(f"map element of class {self.cls!r} has no pieces")
        if len(self.pieces) > max_pieces:
            raise ValueError(
                f"{self.cls!r} allows at most {max_pieces} pieces, got {len(self.pieces)}"
            )
        for k, piece in enumerate(self.pieces):
            if piece.degree > max_degree:
                raise ValueError(
                    f"{self.cls!r} allows degree <= {max_degree}, piece {k} has {piece.degree}"
                )
        for k in range(len(self.pieces) - 1):
            tail = self.pieces[k].control_points[-1]
            head = self.pieces[k + 1].control_points[0]
            if np.max(np.abs(tail - head)) > JOINT_TOL:
                raise ValueError(f"pieces {k} and {k + 1} are not C0-continuous")


def sample_element(elem: MapElement, samples_per_piece: int = 20) -> np.ndarray:
    """Uniform-in-t polyline over all pieces, shared joints emitted once.

    Each piece contributes points at t = j/(S-1); the joint a piece shares with
    its predecessor is dropped, so the output has pieces*S - (pieces-1) rows.
    """
    if samples_per_piece < 2:
        raise ValueError("samples_per_piece must be >= 2")
    ts = np.linspace(0.0, 1.0, samples_per_piece)
    rows = []
    for k, piece in enumerate(elem.pieces):
        pts = np.array([eval_piece(piece, t) for t in ts])
        rows.append(pts[1:] if k > 0 else pts)
    return np.concatenate(rows, axis=0)
