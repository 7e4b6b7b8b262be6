"""Synthetic softmax score streams with known ground truth.

Stand-in for a trained per-hand classifier. Every frame has a target class:
the annotated gesture inside an interval, otherwise ``None`` or ``Other``
(drawn once per contiguous background segment). The clean vector is one-hot
on the target, linearly cross-faded over ``ramp_frames`` at interval edges,
optionally passed through a confusion matrix, then mixed with simplex noise:

    scores = (1 - noise) * clean + noise * e / sum(e),   e_k ~ Exp(1)

All randomness comes from numpy's PCG64 generator seeded through
``numpy.random.SeedSequence``, so a (seed, inputs) pair always reproduces
the same bytes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from gesture_spotter.core import NUM_CLASSES, Annotation, ClassId, Hand, Modality, StreamHeader, check_annotations
from gesture_spotter.streamio import ScoreStreamFile

_HAND_KEY = {Hand.LEFT: 0, Hand.RIGHT: 1}
_MODALITY_KEY = {Modality.RGB: 0, Modality.INFRARED: 1, Modality.DEPTH: 2}

# Tap is roughly half as long as the other gestures
DEFAULT_DURATIONS: dict[int, int] = {0: 32, 1: 32, 2: 32, 3: 32, 4: 16}


@dataclass(frozen=True)
class SynthConfig:
    seed: int = 0
    noise_level: float = 0.0
    ramp_frames: int = 4
    background_mix: float = 0.2
    confusion: np.ndarray | None = field(default=None, compare=False)
    mean_durations: Mapping[int, int] = field(default_factory=lambda: dict(DEFAULT_DURATIONS))
    duration_jitter: int = 3

    def __post_init__(self) -> None:
        if not 0.0 <= self.noise_level < 1.0:
            raise ValueError(f"noise_level must lie in [0, 1), got {self.noise_level}")
        if self.ramp_frames < 0:
            raise ValueError("ramp_frames must be non-negative")
        if not 0.0 <= self.background_mix <= 1.0:
            raise ValueError("background_mix must be a probability")
        if self.confusion is not None:
            c = np.asarray(self.confusion, dtype=float)
            if c.shape != (NUM_CLASSES, NUM_CLASSES):
                raise ValueError(f"confusion must be {NUM_CLASSES}x{NUM_CLASSES}")
            if (c < 0).any() or np.abs(c.sum(axis=1) - 1.0).max() > 1e-9:
                raise ValueError("confusion rows must be probability vectors summing to 1")
        for k, d in self.mean_durations.items():
            if d < 2:
                raise ValueError(f"mean duration for class {k} must be >= 2")
        if self.duration_jitter < 0:
            raise ValueError("duration_jitter must be non-negative")

    def snapshot(self) -> dict:
        return {
            "seed": self.seed,
            "noise_level": self.noise_level,
            "ramp_frames": self.ramp_frames,
            "background_mix": self.background_mix,
            "confusion": None if self.confusion is None else np.asarray(self.confusion).tolist(),
            "mean_durations": {str(k): v for k, v in sorted(self.mean_durations.items())},
            "duration_jitter": self.duration_jitter,
        }


def stream_rng(seed: int, hand: Hand, modality: Modality | None = None) -> np.random.Generator:
    """Generator for (seed, hand), or for (seed, hand, modality) noise."""
    key = [seed, _HAND_KEY[hand]] if modality is None else [seed, _HAND_KEY[hand], _MODALITY_KEY[modality]]
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(key)))


def _segments(annotations: Sequence[Annotation], total: int) -> list[tuple[int, int, Annotation | None]]:
    """Cover [0, total) with half-open gesture and background segments."""
    segs = []
    cursor = 0
    for a in annotations:
        if a.start_frame > cursor:
            segs.append((cursor, a.start_frame, None))
        segs.append((a.start_frame, a.end_frame + 1, a))
        cursor = a.end_frame + 1
    if cursor < total:
        segs.append((cursor, total, None))
    return segs


def clean_scores(annotations: Sequence[Annotation], total_frames: int, ramp_frames: int, background_mix: float, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Noise-free score matrix and the per-frame target class."""
    segs = _segments(annotations, total_frames)
    target = np.empty(total_frames, dtype=np.int64)
    for s, e, a in segs:
        if a is None:
            target[s:e] = ClassId.OTHER if rng.random() < background_mix else ClassId.NONE
        else:
            target[s:e] = int(a.class_id)
    base = np.zeros((total_frames, NUM_CLASSES))
    base[np.arange(total_frames), target] = 1.0
    if ramp_frames:
        for a in annotations:
            s, e = a.start_frame, a.end_frame
            r = min(ramp_frames, (e - s + 1) // 2)
            g = int(a.class_id)
            before = int(target[s - 1]) if s > 0 else int(ClassId.NONE)
            after = int(target[e + 1]) if e + 1 < total_frames else int(ClassId.NONE)
            for k in range(r):
                w = (k + 1) / (r + 1)
                base[s + k] = 0.0
                base[s + k, g] = w
                base[s + k, before] += 1.0 - w
                base[e - k] = 0.0
                base[e - k, g] = w
                base[e - k, after] += 1.0 - w
    return base, target


def dirichlet_like(rng: np.random.Generator, n: int) -> np.ndarray:
    e = rng.standard_exponential((n, NUM_CLASSES))
    return e / e.sum(axis=1, keepdims=True)


def _finish(scores: np.ndarray) -> np.ndarray:
    scores = np.clip(scores, 0.0, 1.0)
    return scores / scores.sum(axis=1, keepdims=True)


def generate_scores(annotations: Sequence[Annotation], hand: Hand, total_frames: int, cfg: SynthConfig, modality: Modality = Modality.RGB) -> np.ndarray:
    mine = sorted((a for a in annotations if a.hand == hand), key=lambda a: a.start_frame)
    check_annotations(mine)
    for a in mine:
        if a.start_frame < 0 or a.end_frame >= total_frames:
            raise ValueError(f"annotation {a} outside [0, {total_frames})")
    # background labels are shared by all modalities of a hand; noise is not
    base, _ = clean_scores(mine, total_frames, cfg.ramp_frames, cfg.background_mix, stream_rng(cfg.seed, hand))
    rng = stream_rng(cfg.seed, hand, modality)
    if cfg.confusion is not None:
        base = base @ np.asarray(cfg.confusion, dtype=float)
    if cfg.noise_level > 0:
        base = (1.0 - cfg.noise_level) * base + cfg.noise_level * dirichlet_like(rng, total_frames)
    if cfg.noise_level > 0 or cfg.confusion is not None:
        base = _finish(base)
    return base


def generate_stream(annotations: Sequence[Annotation], hand: Hand, total_frames: int, cfg: SynthConfig, modality: Modality = Modality.RGB) -> ScoreStreamFile:
    scores = generate_scores(annotations, hand, total_frames, cfg, modality)
    return ScoreStreamFile.from_scores(StreamHeader(hand, (modality,), total_frames=total_frames), scores)


def plan_annotations(
    rng: np.random.Generator,
    num_gestures: int,
    total_frames: int,
    hand: Hand,
    cfg: SynthConfig,
    min_gap: int = 64,
) -> list[Annotation]:
    """Place gestures with at least ``min_gap`` background frames around each."""
    classes = rng.integers(0, 5, size=num_gestures)
    durations = []
    for c in classes:
        mean = cfg.mean_durations[int(c)]
        j = cfg.duration_jitter
        d = mean + (int(rng.integers(-j, j + 1)) if j else 0)
        durations.append(max(2, d))
    slack = total_frames - sum(durations) - (num_gestures + 1) * min_gap
    if slack < 0:
        raise ValueError(
            f"capacity exceeded: {num_gestures} gestures ({sum(durations)} frames) with {min_gap}-frame gaps "
            f"need {total_frames - slack} frames, have {total_frames}"
        )
    share = rng.standard_exponential(num_gestures + 1)
    extra = np.floor(share / share.sum() * slack).astype(int)
    out = []
    cursor = 0
    for k, (c, d) in enumerate(zip(classes, durations)):
        start = cursor + min_gap + int(extra[k])
        out.append(Annotation(ClassId(int(c)), hand, start, start + d - 1))
        cursor = start + d
    return out


def generate_corpus(
    num_streams: int,
    gestures_per_stream: int = 30,
    frames_per_stream: int = 6500,
    cfg: SynthConfig | None = None,
    hand: Hand = Hand.LEFT,
    min_gap: int = 64,
    modality: Modality = Modality.RGB,
) -> list[tuple[ScoreStreamFile, list[Annotation]]]:
    cfg = cfg or SynthConfig()
    return [
        (generate_stream(ann, hand, frames_per_stream, scfg, modality), ann)
        for ann, scfg in plan_corpus(num_streams, gestures_per_stream, frames_per_stream, cfg, hand, min_gap)
    ]


def plan_corpus(
    num_streams: int,
    gestures_per_stream: int,
    frames_per_stream: int,
    cfg: SynthConfig,
    hand: Hand = Hand.LEFT,
    min_gap: int = 64,
) -> list[tuple[list[Annotation], SynthConfig]]:
    """Annotations and a per-stream derived config for each corpus entry.

    Reusing a plan with different modalities gives streams that share ground
    truth but carry independent noise.
    """
    children = np.random.SeedSequence([cfg.seed, _HAND_KEY[hand]]).spawn(num_streams)
    out = []
    for child in children:
        stream_seed = int(child.generate_state(1, dtype=np.uint32)[0])
        rng = np.random.Generator(np.random.PCG64(child))
        ann = plan_annotations(rng, gestures_per_stream, frames_per_stream, hand, cfg, min_gap)
        out.append((ann, _replace_seed(cfg, stream_seed)))
    return out


def _replace_seed(cfg: SynthConfig, seed: int) -> SynthConfig:
    return SynthConfig(
        seed=seed,
        noise_level=cfg.noise_level,
        ramp_frames=cfg.ramp_frames,
        background_mix=cfg.background_mix,
        confusion=cfg.confusion,
        mean_durations=cfg.mean_durations,
        duration_jitter=cfg.duration_jitter,
    )
