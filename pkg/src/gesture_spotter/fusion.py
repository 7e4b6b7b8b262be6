"""Score-level (late) fusion of synchronized modality streams.

Online detection fuses frame by frame before the transition engine; the
classifier outputs themselves are never altered.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from gesture_spotter.core import Modality, ScoreFrame, StreamHeader
from gesture_spotter.streamio import ScoreStreamFile


@dataclass(frozen=True)
class FusionConfig:
    """Per-modality weights; an empty mapping means uniform over the inputs."""

    weights: Mapping[Modality, float] = field(default_factory=dict)
    normalize: bool = True

    def __post_init__(self) -> None:
        for m, w in self.weights.items():
            if not (w >= 0 and math.isfinite(w)):
                raise ValueError(f"weight for {m.value} must be non-negative, got {w}")
        if self.weights and not any(w > 0 for w in self.weights.values()):
            raise ValueError("at least one fusion weight must be positive")

    def effective_weights(self, present) -> dict[Modality, float]:
        present = list(present)
        if not self.weights:
            raw = {m: 1.0 for m in present}
        else:
            missing = [m.value for m in self.weights if m not in present]
            if missing:
                raise ValueError(f"missing modality streams: {', '.join(missing)}")
            raw = dict(self.weights)
        if not self.normalize:
            return raw
        total = math.fsum(raw.values())
        return {m: w / total for m, w in raw.items()}


def parse_weights(text: str) -> dict[Modality, float]:
    """Parse ``rgb=0.5,infrared=0.3`` style weight lists."""
    out: dict[Modality, float] = {}
    for part in text.split(","):
        if not part.strip():
            continue
        name, sep, value = part.partition("=")
        if not sep:
            raise ValueError(f"expected modality=weight, got {part!r}")
        out[Modality(name.strip())] = float(value)
    return out


def fuse_frames(frames: Mapping[Modality, ScoreFrame], cfg: FusionConfig | None = None) -> ScoreFrame:
    cfg = cfg or FusionConfig()
    if not frames:
        raise ValueError("no frames to fuse")
    indices = {f.frame_index for f in frames.values()}
    if len(indices) != 1:
        raise ValueError(f"frame_index mismatch across modalities: {sorted(indices)}")
    weights = cfg.effective_weights(frames)
    # fixed enumeration order keeps the result independent of mapping order
    order = sorted(weights, key=lambda m: list(Modality).index(m))
    n = len(next(iter(frames.values())).scores)
    fused = [0.0] * n
    for m in order:
        w = weights[m]
        for k, s in enumerate(frames[m].scores):
            fused[k] += w * s
    idx = indices.pop()
    return ScoreFrame(idx, tuple(min(1.0, max(0.0, v)) for v in fused))


def fuse_arrays(arrays: Mapping[Modality, np.ndarray], cfg: FusionConfig | None = None) -> np.ndarray:
    cfg = cfg or FusionConfig()
    weights = cfg.effective_weights(arrays)
    order = sorted(weights, key=lambda m: list(Modality).index(m))
    shapes = {arrays[m].shape for m in order}
    if len(shapes) != 1:
        raise ValueError(f"stream length mismatch: {sorted(shapes)}")
    out = np.zeros(shapes.pop())
    for m in order:
        out += weights[m] * arrays[m]
    return np.clip(out, 0.0, 1.0)


def fuse_streams(streams: Mapping[Modality, ScoreStreamFile], cfg: FusionConfig | None = None) -> ScoreStreamFile:
    if not streams:
        raise ValueError("no streams to fuse")
    items = list(streams.items())
    hands = {s.header.hand for _, s in items}
    if len(hands) != 1:
        raise ValueError("cannot fuse streams of different hands")
    lengths = {len(s) for _, s in items}
    if len(lengths) != 1:
        raise ValueError(f"stream length mismatch: {sorted(lengths)}")
    for m, s in items:
        if s.header.modality is not None and s.header.modality != m:
            raise ValueError(f"stream keyed as {m.value} has modality {s.header.modality.value}")
    first = items[0][1].header
    fused = fuse_arrays({m: s.scores_array() for m, s in items}, cfg)
    mods = tuple(sorted(streams, key=lambda m: list(Modality).index(m)))
    header = StreamHeader(first.hand, mods, first.frame_rate, first.class_names, len(fused))
    return ScoreStreamFile.from_scores(header, fused)
