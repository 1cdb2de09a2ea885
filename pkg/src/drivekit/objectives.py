"""Scalar planning objectives: relationship focal loss, kinematic MSE, mode selection."""
from __future__ import annotations

import numpy as np

#: lateral label order used for probability arrays
LATERAL_CLASSES = ("left", "right", "no")
#: longitudinal label order
LONGITUDINAL_CLASSES = ("front", "back", "no")


def validate_relationship_probs(probs: np.ndarray, tol: float = 1e-6) -> np.ndarray:
    """Check an [agents, directions, classes] probability array.

    Every value must lie in (0, 1] and each (agent, direction) class vector
    must sum to 1 within `tol`.
    """
    arr = np.asarray(probs, dtype=float)
    if arr.ndim != 3:
        raise ValueError(f"expected [agents, directions, classes], got shape {arr.shape}")
    if np.any(arr <= 0) or np.any(arr > 1):
        raise ValueError("probabilities must lie in (0, 1]")
    sums = arr.sum(axis=2)
    if np.any(np.abs(sums - 1.0) > tol):
        raise ValueError("class probabilities must sum to 1 per (agent, direction)")
    return arr


def true_class_probabilities(probs: np.ndarray, true_classes: np.ndarray) -> np.ndarray:
    """Gather the probability of the true class per (agent, direction).

    `probs` is [A, D, C]; `true_classes` is [A, D] integer class indices.
    Returns an [A, D] array ready for `ear_focal_loss`.
    """
    arr = np.asarray(probs, dtype=float)
    idx = np.asarray(true_classes, dtype=int)
    if arr.ndim != 3 or idx.shape != arr.shape[:2]:
        raise ValueError("shape mismatch between probabilities and true-class indices")
    a, d = np.indices(idx.shape)
    return arr[a, d, idx]


def ear_focal_loss(true_probs, alpha=1.0, gamma: float = 0.0) -> float:
    """Focal loss over ego-agent relationship predictions.

    `true_probs` holds the predicted probability of the *true* class per
    (agent, direction), shape [A, D] (or any broadcastable array). `alpha`
    is a per-agent weight (scalar or length-A array); `gamma` the focusing
    exponent. One term per agent-direction:

        loss = - sum alpha_i * (1 - p)**gamma * log(p)
    """
    p = np.asarray(true_probs, dtype=float)
    if np.any(p <= 0):
        raise ValueError("probabilities must be strictly positive")
    if np.any(p > 1):
        raise ValueError("probabilities must be <= 1")
    a = np.asarray(alpha, dtype=float)
    if np.any(a < 0) or gamma < 0:
        raise ValueError("alpha and gamma must be non-negative")
    if a.ndim == 1 and p.ndim == 2:
        a = a[:, None]
    terms = a * (1.0 - p) ** gamma * np.log(p)
    return float(-np.sum(terms))


def kinematic_loss(decoded, actual) -> float:
    """Mean squared error between decoded and actual ego status vectors."""
    d = np.asarray(decoded, dtype=float).ravel()
    a = np.asarray(actual, dtype=float).ravel()
    if d.shape != a.shape:
        raise ValueError(f"status length mismatch: {d.shape} vs {a.shape}")
    if d.size == 0:
        raise ValueError("status vectors must be non-empty")
    return float(np.mean((d - a) ** 2))


def closest_mode(predictions, ground_truth) -> tuple[int, np.ndarray]:
    """Winner-take-all mode selection: index of the prediction closest to GT.

    `predictions` is [K, L, 2], `ground_truth` [L, 2]. Closeness is mean
    Euclidean displacement over the L steps; ties break to the lowest index.
    Returns (winning index, per-mode mean displacement).
    """
    preds = np.asarray(predictions, dtype=float)
    gt = np.asarray(ground_truth, dtype=float)
    if preds.ndim != 3 or preds.shape[0] < 1:
        raise ValueError("predictions must be a non-empty [K, L, 2] array")
    if preds.shape[1:] != gt.shape:
        raise ValueError(f"horizon mismatch: predictions {preds.shape[1:]} vs gt {gt.shape}")
    ade = np.linalg.norm(preds - gt[None], axis=2).mean(axis=1)
    return int(np.argmin(ade)), ade
