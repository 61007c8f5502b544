"""Figure rendering for region, slice, outer-bound and corollary output.

Figures are a convenience companion to the CSV files: the CSVs are the
contract (byte-deterministic), the PNGs are for eyeballing.  Rendering is
headless and writes no timestamps.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_RC = {
    "figure.figsize": (6.4, 4.8),
    "figure.dpi": 110,
    "savefig.dpi": 150,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "grid.linestyle": ":",
    "lines.linewidth": 1.4,
    "font.size": 10,
}

_SLICE_COLORS = ("tab:blue", "tab:orange", "tab:green", "tab:red",
                 "tab:purple", "tab:brown")


def _closed(poly: np.ndarray) -> np.ndarray:
    poly = np.atleast_2d(np.asarray(poly, dtype=float))
    if poly.shape[0] == 0:
        return poly
    return np.vstack([poly, poly[:1]])


def _finish(ax, xlabel: str, ylabel: str, title: str, path: str) -> None:
    ax.set_xlabel(f"{xlabel} [bits/use]")
    ax.set_ylabel(f"{ylabel} [bits/use]")
    ax.set_title(title)
    ax.set_xlim(left=0)
    ax.set_ylim(bottom=0)
    if ax.get_legend_handles_labels()[0]:
        ax.legend(loc="best", fontsize=8)
    ax.figure.savefig(path, bbox_inches="tight")
    plt.close(ax.figure)


def plot_region_view(
    path: str,
    xlabel: str,
    ylabel: str,
    title: str,
    hull: np.ndarray,
    cloud_xy: np.ndarray | None = None,
    outer: np.ndarray | None = None,
    merged: np.ndarray | None = None,
) -> None:
    with plt.rc_context(_RC):
        fig, ax = plt.subplots()
        if cloud_xy is not None and len(cloud_xy):
            ax.plot(cloud_xy[:, 0], cloud_xy[:, 1], ".", ms=2, alpha=0.25,
                    color="gray", label="sampled points")
        if len(hull):
            h = _closed(hull)
            ax.plot(h[:, 0], h[:, 1], "-", color="tab:blue",
                    label="achievable hull")
        if merged is not None and len(merged):
            m = _closed(merged)
            ax.plot(m[:, 0], m[:, 1], "--", color="tab:green",
                    label="with closed-form points")
        if outer is not None and len(outer):
            o = _closed(outer)
            ax.plot(o[:, 0], o[:, 1], "-.", color="tab:red", label="outer bound")
        _finish(ax, xlabel, ylabel, title, path)


def plot_slices(
    path: str,
    xlabel: str,
    ylabel: str,
    title: str,
    slices: list[tuple[str, np.ndarray]],
    outer_slices: list[tuple[str, np.ndarray]] | None = None,
) -> None:
    with plt.rc_context(_RC):
        fig, ax = plt.subplots()
        for i, (label, poly) in enumerate(slices):
            if not len(poly):
                continue
            p = _closed(poly)
            ax.plot(p[:, 0], p[:, 1], "-",
                    color=_SLICE_COLORS[i % len(_SLICE_COLORS)],
                    label=f"min {label}")
        for i, (label, poly) in enumerate(outer_slices or []):
            if not len(poly):
                continue
            p = _closed(poly)
            ax.plot(p[:, 0], p[:, 1], "-.",
                    color=_SLICE_COLORS[i % len(_SLICE_COLORS)], alpha=0.7,
                    label=f"outer, min {label}")
        _finish(ax, xlabel, ylabel, title, path)


def plot_corollary_points(
    path: str, title: str, families: dict[int, np.ndarray]
) -> None:
    """Two panels: the leading-rate view and the helped-pair view."""
    with plt.rc_context(_RC):
        fig, axes = plt.subplots(1, 2, figsize=(10, 4.2))
        for cid, pts in sorted(families.items()):
            if not len(pts):
                continue
            marker = "o" if len(pts) <= 4 else "."
            axes[0].plot(pts[:, 0], pts[:, 1] + pts[:, 2], marker, ms=4,
                         label=f"family {cid}")
            axes[1].plot(pts[:, 1], pts[:, 2], marker, ms=4,
                         label=f"family {cid}")
        axes[0].set_xlabel("R1 [bits/use]")
        axes[0].set_ylabel("R2 + R3 [bits/use]")
        axes[1].set_xlabel("R2 [bits/use]")
        axes[1].set_ylabel("R3 [bits/use]")
        for ax in axes:
            ax.set_xlim(left=0)
            ax.set_ylim(bottom=0)
            ax.legend(fontsize=7, loc="best")
        fig.suptitle(title)
        fig.savefig(path, bbox_inches="tight")
        plt.close(fig)
