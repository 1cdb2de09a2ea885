"""Deterministic inputs for the motion predictor.

Covers the temporal-alignment displacement sets built from remembered
predictions, the sampled curve points that localize map elements, and the
K-Means trajectory anchors that seed multi-modal prediction. Trajectory steps
are 1-based inside the displacement formulas (v_1..v_L), with a separate
current position v_0 for the current-frame set.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bezier import MapElement, sample_element


def memory_displacements(history: list[np.ndarray], k: int) -> np.ndarray:
    """Displacement set for memory slot k: {v_j - v_k | j >= k} over F_{T-k}.

    `history` lists the remembered predicted trajectories newest first
    (F_{T-1}, ..., F_{T-M}), each an (L, d) array in the current ego frame.
    Output is ((L - k + 1), d), ordered by j.
    """
    if not 1 <= k <= len(history):
        raise ValueError(f"slot k={k} outside 1..{len(history)}")
    traj = np.asarray(history[k - 1], dtype=float)
    if traj.ndim != 2:
        raise ValueError("trajectories must be (L, d) arrays")
    horizon = traj.shape[0]
    if k > horizon:
        raise ValueError(f"slot k={k} exceeds trajectory horizon {horizon}")
    anchor = traj[k - 1]
    return traj[k - 1 :] - anchor


def current_displacements(current: np.ndarray, v0, k: int, memory_length: int) -> np.ndarray:
    """Displacement set for the current frame at slot k: {v_j - v_0 | j <= M - k}.

    `current` is the (L, d) predicted trajectory F_T, `v0` the agent's current
    position, M = `memory_length`. With 1-based steps the set is empty at
    k = M (j would have to be both >= 1 and <= 0).
    """
    if not 1 <= k <= memory_length:
        raise ValueError(f"slot k={k} outside 1..{memory_length}")
    traj = np.asarray(current, dtype=float)
    if traj.ndim != 2:
        raise ValueError("trajectories must be (L, d) arrays")
    v0 = np.asarray(v0, dtype=float)
    upper = min(memory_length - k, traj.shape[0])
    return traj[:upper] - v0


def curve_pe_points(elem: MapElement, samples_per_piece: int = 20) -> np.ndarray:
    """Sampled map-element points as used for curve positional encoding."""
    return sample_element(elem, samples_per_piece)


@dataclass(frozen=True)
class AnchorSet:
    """K representative trajectories plus the clustering diagnostics."""

    anchors: np.ndarray  # (K, L, d)
    inertia: float
    n_iter: int
    inertia_history: tuple[float, ...]


def _kmeans_pp_init(flat: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = flat.shape[0]
    centers = np.empty((k, flat.shape[1]))
    centers[0] = flat[rng.integers(n)]
    d2 = np.sum((flat - centers[0]) ** 2, axis=1)
    for i in range(1, k):
        total = d2.sum()
        if total == 0.0:
            centers[i:] = flat[rng.integers(n, size=k - i)]
            break
        centers[i] = flat[rng.choice(n, p=d2 / total)]
        d2 = np.minimum(d2, np.sum((flat - centers[i]) ** 2, axis=1))
    return centers


def cluster_anchors(
    trajectories, k: int = 6, max_iters: int = 100, seed: int = 0
) -> AnchorSet:
    """Lloyd's K-Means over flattened trajectories with seeded k-means++ init.

    All trajectories must share length L; anchors come back reshaped to
    (K, L, d). Deterministic given the seed. Inertia is checked to be
    non-increasing on every iteration.
    """
    trajs = np.asarray(trajectories, dtype=float)
    if trajs.ndim != 3:
        raise ValueError("expected trajectories of shape (N, L, d)")
    n, length, dim = trajs.shape
    if n < k:
        raise ValueError(f"need at least k={k} trajectories, got {n}")
    if k < 1:
        raise ValueError("k must be >= 1")
    flat = trajs.reshape(n, length * dim)
    rng = np.random.default_rng(seed)
    centers = _kmeans_pp_init(flat, k, rng)

    history: list[float] = []
    assign = None
    for it in range(max_iters):
        d2 = ((flat[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        new_assign = np.argmin(d2, axis=1)
        inertia = float(d2[np.arange(n), new_assign].sum())
        if history and inertia > history[-1] + 1e-9 * max(1.0, history[-1]):
            raise AssertionError(
                f"k-means inertia increased: {history[-1]} -> {inertia} at iteration {it}"
            )
        history.append(inertia)
        for c in range(k):
            members = flat[new_assign == c]
            if len(members):
                centers[c] = members.mean(axis=0)
        if assign is not None and np.array_equal(assign, new_assign):
            break
        assign = new_assign

    return AnchorSet(
        anchors=centers.reshape(k, length, dim),
        inertia=history[-1],
        n_iter=len(history),
        inertia_history=tuple(history),
    )
