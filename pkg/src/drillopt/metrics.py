"""Front-quality metrics for two-objective minimization.

All functions take canonical min-min objective points (rows of (f1, f2)).
The portfolio's natural (EMV, risk) pairs are canonicalized by negating EMV
before they reach this module.
"""

from __future__ import annotations

import warnings

import numpy as np


class MetricsError(ValueError):
    """Invalid metric input."""


def _points(x, name: str = "points") -> np.ndarray:
    p = np.asarray(x, dtype=float)
    if p.ndim != 2 or p.shape[1] != 2:
        raise MetricsError(f"{name} must be an (N, 2) array, got {p.shape}")
    if not np.isfinite(p).all():
        raise MetricsError(f"{name} must be finite")
    return p


def pareto_filter(points: np.ndarray) -> np.ndarray:
    """Boolean mask of the non-dominated rows (minimization, both axes).

    Duplicates of a non-dominated point are all kept: equal points do not
    dominate each other.
    """
    p = _points(points)
    n = p.shape[0]
    if n == 0:
        return np.zeros(0, dtype=bool)
    le = (p[:, None, :] <= p[None, :, :]).all(axis=2)
    lt = (p[:, None, :] < p[None, :, :]).any(axis=2)
    dominated = (le & lt).any(axis=0)
    return ~dominated


def hypervolume(points: np.ndarray, ref: tuple[float, float]) -> float:
    """Exact dominated area between a front and a reference point.

    Points that fail to weakly dominate the reference contribute nothing
    (flagged with a warning).  Computed by a single descending sweep over
    the non-dominated subset, so duplicates and dominated points are
    harmless.  An empty front has zero hypervolume.
    """
    p = _points(points)
    r1, r2 = float(ref[0]), float(ref[1])
    if p.shape[0] == 0:
        return 0.0
    inside = (p[:, 0] <= r1) & (p[:, 1] <= r2)
    if not inside.all():
        warnings.warn(
            f"{int((~inside).sum())} point(s) beyond the reference point "
            "contribute zero hypervolume",
            stacklevel=2,
        )
        p = p[inside]
        if p.shape[0] == 0:
            return 0.0
    p = np.unique(p[pareto_filter(p)], axis=0)  # sorted by f1, then f2
    area = 0.0
    prev_f2 = r2
    for f1, f2 in p:
        area += (r1 - f1) * (prev_f2 - f2)
        prev_f2 = f2
    return float(area)


def igd(front: np.ndarray, reference_front: np.ndarray) -> float:
    """Inverted generational distance: mean distance from each reference
    point to its nearest front point (Euclidean)."""
    f = _points(front, "front")
    ref = _points(reference_front, "reference front")
    if f.shape[0] == 0 or ref.shape[0] == 0:
        raise MetricsError("fronts must be non-empty")
    d = np.linalg.norm(ref[:, None, :] - f[None, :, :], axis=2)
    return float(d.min(axis=1).mean())


def spacing(front: np.ndarray) -> float:
    """Sample standard deviation of nearest-neighbor Manhattan gaps.

    Zero for a perfectly evenly spaced front; requires at least two points.
    """
    f = _points(front, "front")
    n = f.shape[0]
    if n < 2:
        raise MetricsError("spacing needs at least two points")
    d = np.abs(f[:, None, :] - f[None, :, :]).sum(axis=2)
    np.fill_diagonal(d, np.inf)
    nearest = d.min(axis=1)
    mean = nearest.mean()
    return float(np.sqrt(((nearest - mean) ** 2).sum() / (n - 1)))


def set_coverage(a: np.ndarray, b: np.ndarray) -> float | None:
    """Fraction of b's points strictly dominated by at least one point of a.

    Returns None (metric absent) when b is empty; SC(A, A) is 0 for a
    front containing no dominated points.
    """
    pa = _points(a, "a")
    pb = _points(b, "b")
    if pb.shape[0] == 0:
        return None
    if pa.shape[0] == 0:
        return 0.0
    le = (pa[:, None, :] <= pb[None, :, :]).all(axis=2)
    lt = (pa[:, None, :] < pb[None, :, :]).any(axis=2)
    covered = (le & lt).any(axis=0)
    return float(covered.mean())


def reference_point(
    fronts: list[np.ndarray] | tuple[np.ndarray, ...], inflate: float = 0.1
) -> tuple[float, float]:
    """Shared HV reference: componentwise worst over the fronts' union,
    pushed out by ``inflate`` times each objective's union range."""
    arrays = [_points(f) for f in fronts if np.asarray(f).size]
    if not arrays:
        raise MetricsError("need at least one non-empty front")
    union = np.vstack(arrays)
    worst = union.max(axis=0)
    span = worst - union.min(axis=0)
    ref = worst + inflate * span
    return float(ref[0]), float(ref[1])


def reference_set(
    fronts: list[np.ndarray] | tuple[np.ndarray, ...]
) -> np.ndarray:
    """Best-known front: non-dominated, deduplicated union of the fronts."""
    arrays = [_points(f) for f in fronts if np.asarray(f).size]
    if not arrays:
        raise MetricsError("need at least one non-empty front")
    union = np.unique(np.vstack(arrays), axis=0)
    return union[pareto_filter(union)]
