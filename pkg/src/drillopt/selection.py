"""Decision-support helpers for picking plans off a front.

Inputs are natural-objective rows (EMV to maximize, risk to minimize), as
stored in front files.  Internally each function canonicalizes to min-min
and min-max normalizes over the front, so picks are scale-free.  All ties
break toward the lower-risk plan.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import metrics


class SelectionError(ValueError):
    """Invalid selection input."""


@dataclass(frozen=True)
class RepresentativeChoice:
    """One recommended plan: its row index in the front, the objectives, the
    normalized coordinates the rule scored, and whether a degenerate front
    forced a fallback to the ideal-point rule."""

    method: str
    index: int
    emv: float
    risk: float
    normalized: tuple[float, float]
    fallback: bool = False


def _front(front: np.ndarray) -> np.ndarray:
    f = np.asarray(front, dtype=float)
    if f.ndim != 2 or f.shape[1] != 2 or f.shape[0] == 0:
        raise SelectionError(
            f"front must be a non-empty (N, 2) array, got {f.shape}"
        )
    if not np.isfinite(f).all():
        raise SelectionError("front must be finite")
    return f


def normalize_front(front: np.ndarray) -> np.ndarray:
    """Min-max normalized canonical coordinates: (0, 0) is the ideal corner
    (best EMV, least risk).  A degenerate axis collapses to zeros."""
    f = _front(front)
    canon = np.column_stack([-f[:, 0], f[:, 1]])
    lo = canon.min(axis=0)
    span = canon.max(axis=0) - lo
    span[span == 0.0] = 1.0
    return (canon - lo) / span


def _pick(
    front: np.ndarray,
    scores: np.ndarray,
    method: str,
    norm: np.ndarray,
    fallback: bool = False,
) -> RepresentativeChoice:
    """Lowest score wins; ties go to the lower risk, then the lower index."""
    f = _front(front)
    order = np.lexsort((np.arange(f.shape[0]), f[:, 1], scores))
    best = int(order[0])
    return RepresentativeChoice(
        method=method,
        index=best,
        emv=float(f[best, 0]),
        risk=float(f[best, 1]),
        normalized=(float(norm[best, 0]), float(norm[best, 1])),
        fallback=fallback,
    )


def ideal_point_select(front: np.ndarray) -> RepresentativeChoice:
    """Plan nearest (Euclidean) to the normalized ideal corner."""
    norm = normalize_front(front)
    return _pick(front, np.linalg.norm(norm, axis=1), "ideal", norm)


def knee_select(front: np.ndarray) -> RepresentativeChoice:
    """Plan farthest from the chord between the normalized extremes.

    Fronts with fewer than three points, or collinear fronts where every
    perpendicular distance vanishes, fall back to the ideal-point rule with
    the fallback flag set.
    """
    f = _front(front)
    norm = normalize_front(front)
    if f.shape[0] < 3:
        choice = ideal_point_select(front)
        return RepresentativeChoice(
            "knee", choice.index, choice.emv, choice.risk,
            choice.normalized, fallback=True,
        )
    lo = norm[np.lexsort((norm[:, 1], norm[:, 0]))[0]]
    hi = norm[np.lexsort((norm[:, 1], norm[:, 0]))[-1]]
    chord = hi - lo
    length = float(np.hypot(*chord))
    if length == 0.0:
        distances = np.zeros(f.shape[0])
    else:
        rel = norm - lo
        distances = np.abs(chord[0] * rel[:, 1] - chord[1] * rel[:, 0]) / length
    if distances.max() < 1e-12:
        choice = ideal_point_select(front)
        return RepresentativeChoice(
            "knee", choice.index, choice.emv, choice.risk,
            choice.normalized, fallback=True,
        )
    return _pick(front, -distances, "knee", norm)


def hv_contribution_select(
    front: np.ndarray, ref: tuple[float, float] | None = None
) -> RepresentativeChoice:
    """Plan whose removal costs the most hypervolume.

    ``ref`` is an optional natural-coordinate anchor (an EMV floor and a
    risk ceiling, both worse than every front point); by default the
    reference is derived from the front itself (componentwise worst, 10%
    inflated), which keeps the pick scale-free.
    """
    f = _front(front)
    norm = normalize_front(front)
    canon = np.column_stack([-f[:, 0], f[:, 1]])
    if f.shape[0] == 1:
        return _pick(front, np.zeros(1), "hv", norm)
    if ref is None:
        ref = metrics.reference_point([canon])
    else:
        ref = (-float(ref[0]), float(ref[1]))
    total = metrics.hypervolume(canon, ref)
    contributions = np.array(
        [
            total
            - metrics.hypervolume(np.delete(canon, i, axis=0), ref)
            for i in range(f.shape[0])
        ]
    )
    return _pick(front, -contributions, "hv", norm)


def stratify_by_risk(front: np.ndarray, n_tiers: int = 3) -> np.ndarray:
    """Equal-width tiers over normalized risk: tier 0 is the calmest band.

    The top of the scale closes the last tier, and an all-equal-risk front
    lands entirely in tier 0.
    """
    f = _front(front)
    if n_tiers < 1:
        raise SelectionError(f"n_tiers must be >= 1, got {n_tiers}")
    risk = f[:, 1]
    span = risk.max() - risk.min()
    if span == 0.0:
        return np.zeros(f.shape[0], dtype=int)
    norm = (risk - risk.min()) / span
    return np.minimum((norm * n_tiers).astype(int), n_tiers - 1)
