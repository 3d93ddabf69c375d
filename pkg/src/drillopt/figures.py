"""Static renderings of run outputs (saved to files, no display)."""

from __future__ import annotations

from pathlib import Path
from typing import Mapping, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_COLORS = ("tab:blue", "tab:orange", "tab:green", "tab:red", "tab:purple")


def plot_front(
    path: Path,
    fronts: Mapping[str, np.ndarray],
    representatives: Mapping[str, tuple[float, float]] | None = None,
) -> None:
    """Scatter one or more fronts in natural (EMV, risk) coordinates.

    ``representatives`` marks chosen compromise plans with labeled stars.
    """
    fig, ax = plt.subplots(figsize=(7, 5))
    for color, (label, pts) in zip(_COLORS, fronts.items()):
        pts = np.asarray(pts, dtype=float)
        order = np.argsort(pts[:, 0])
        ax.plot(
            pts[order, 0], pts[order, 1], "o--", ms=4, lw=0.8,
            color=color, label=label, alpha=0.8,
        )
    if representatives:
        for label, (emv, risk) in representatives.items():
            ax.plot(emv, risk, "k*", ms=14)
            ax.annotate(
                label, (emv, risk), textcoords="offset points",
                xytext=(6, 6), fontsize=9,
            )
    ax.set_xlabel("expected monetary value")
    ax.set_ylabel("deviation risk")
    ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_trace(path: Path, traces: Mapping[str, np.ndarray]) -> None:
    """Hypervolume of the best-so-far archive per generation."""
    fig, ax = plt.subplots(figsize=(7, 4))
    for color, (label, hv) in zip(_COLORS, traces.items()):
        ax.plot(np.arange(len(hv)), hv, color=color, label=label)
    ax.set_xlabel("generation")
    ax.set_ylabel("hypervolume")
    ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_tiers(
    path: Path, points: np.ndarray, tiers: Sequence[int]
) -> None:
    """Front colored by risk tier (equal-width bands, low to high)."""
    points = np.asarray(points, dtype=float)
    tiers = np.asarray(tiers, dtype=int)
    fig, ax = plt.subplots(figsize=(7, 5))
    for t in np.unique(tiers):
        mask = tiers == t
        ax.scatter(
            points[mask, 0], points[mask, 1], s=22,
            color=_COLORS[int(t) % len(_COLORS)], label=f"tier {t}",
        )
    ax.set_xlabel("expected monetary value")
    ax.set_ylabel("deviation risk")
    ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
