"""Report figures rendered to files next to the CSV tables."""

from __future__ import annotations

import os
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from gesture_spotter.core import CLASS_NAMES, Annotation, DetectionEvent  # noqa: E402

STYLE = {
    "font.size": 9,
    "axes.labelsize": 9,
    "axes.titlesize": 10,
    "legend.fontsize": 7,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "svg.hashsalt": "gesture-spotter",
}
# tab10 slots, one per gesture class
GESTURE_COLORS = ("tab:blue", "tab:orange", "tab:green", "tab:red", "tab:purple")


def figure_size(scale: float = 1.0, ratio: float | None = None) -> tuple[float, float]:
    width = 7.0 * scale
    ratio = ratio or (np.sqrt(5.0) - 1.0) / 2.0
    return width, width * ratio


def _save(fig, path: str | os.PathLike) -> None:
    # fixed metadata keeps repeated renders byte-identical
    fig.savefig(path, dpi=120, bbox_inches="tight", metadata={"Software": None} if str(path).endswith(".png") else {"Date": None})
    plt.close(fig)


def plot_timeline(
    peaks: np.ndarray,
    events: Sequence[DetectionEvent],
    path: str | os.PathLike,
    th_s: float,
    th_e: float,
    annotations: Sequence[Annotation] = (),
    title: str = "",
) -> None:
    """Peak transition probability over time with thresholds, events and ground truth."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=figure_size(1.4, 0.3))
        t = np.arange(len(peaks))
        ax.plot(t, peaks, lw=0.7, color="0.25", label="peak transition prob.")
        ax.axhline(th_s, ls=":", color="0.5", lw=0.9, label=f"start {th_s:g}")
        ax.axhline(th_e, ls="--", color="0.7", lw=0.9, label=f"end {th_e:g}")
        for a in annotations:
            ax.axvspan(a.start_frame, a.end_frame, ymin=0.0, ymax=0.06, color=GESTURE_COLORS[int(a.class_id)], lw=0)
        for e in events:
            c = GESTURE_COLORS[int(e.class_id)]
            ax.axvspan(e.start_frame, e.end_frame, color=c, alpha=0.18, lw=0)
            ax.text((e.start_frame + e.end_frame) / 2, 1.02, CLASS_NAMES[int(e.class_id)][:2], ha="center", va="bottom", fontsize=6, color=c)
        ax.set_ylim(0.0, 1.1)
        ax.set_xlim(0, max(1, len(peaks) - 1))
        ax.set_xlabel("frame")
        ax.set_ylabel("probability")
        if title:
            ax.set_title(title)
        ax.legend(loc="lower right", ncol=3, frameon=False)
        _save(fig, path)


def plot_calibration(rows: Sequence, path: str | os.PathLike, best: tuple[float, float] | None = None) -> None:
    """Heatmap of mean accuracy over the (th_s, th_e) grid."""
    th_s = sorted({r.th_s for r in rows})
    th_e = sorted({r.th_e for r in rows})
    grid = np.full((len(th_e), len(th_s)), np.nan)
    for r in rows:
        i, j = th_e.index(r.th_e), th_s.index(r.th_s)
        grid[i, j] = r.mean_accuracy if np.isnan(grid[i, j]) else max(grid[i, j], r.mean_accuracy)
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=figure_size(0.8, 0.8))
        im = ax.imshow(grid, origin="lower", aspect="auto", cmap="viridis", vmin=min(0.0, np.nanmin(grid)), vmax=1.0)
        ax.set_xticks(range(len(th_s)), [f"{v:.2f}" for v in th_s], rotation=90)
        ax.set_yticks(range(len(th_e)), [f"{v:.2f}" for v in th_e])
        ax.set_xlabel("start threshold")
        ax.set_ylabel("end threshold")
        if best is not None:
            ax.plot(th_s.index(best[0]), th_e.index(best[1]), marker="*", color="white", ms=10)
        fig.colorbar(im, ax=ax, label="mean Levenshtein accuracy")
        _save(fig, path)


def plot_accuracy(stream_ids: Sequence[str], accuracies: Sequence[float], path: str | os.PathLike) -> None:
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=figure_size(0.8))
        x = np.arange(len(stream_ids))
        ax.bar(x, [100.0 * a for a in accuracies], color="tab:blue", width=0.6)
        ax.set_xticks(x, list(stream_ids), rotation=45, ha="right")
        ax.set_ylabel("Levenshtein accuracy (%)")
        ax.axhline(0.0, color="0.3", lw=0.6)
        _save(fig, path)
