"""Domain types shared by every stage of the pipeline.

Each hand produces its own stream of 7-way softmax vectors: five micro
gestures followed by the two background classes ``None`` (steady hands) and
``Other`` (unrelated movement).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

NUM_CLASSES = 7
SUM_TOLERANCE = 1e-6


class ClassId(enum.IntEnum):
    SWIPE_RIGHT = 0
    SWIPE_LEFT = 1
    FLICK_DOWN = 2
    FLICK_UP = 3
    TAP = 4
    NONE = 5
    OTHER = 6

    @property
    def label(self) -> str:
        return CLASS_NAMES[self.value]

    @classmethod
    def parse(cls, value: object) -> "ClassId":
        """Accept an index or a default label; reject anything outside 0..6."""
        if isinstance(value, ClassId):
            return value
        if isinstance(value, bool):
            raise ValueError(f"invalid class id {value!r}")
        if isinstance(value, int):
            if 0 <= value < NUM_CLASSES:
                return cls(value)
            raise ValueError(f"class index {value} outside [0, {NUM_CLASSES - 1}]")
        if isinstance(value, str):
            if value in CLASS_NAMES:
                return cls(CLASS_NAMES.index(value))
            raise ValueError(f"unknown class label {value!r}")
        raise ValueError(f"invalid class id {value!r}")


CLASS_NAMES: tuple[str, ...] = (
    "SwipeRight",
    "SwipeLeft",
    "FlickDown",
    "FlickUp",
    "Tap",
    "None",
    "Other",
)
GESTURE_CLASSES: tuple[ClassId, ...] = tuple(ClassId(i) for i in range(5))
BACKGROUND_CLASSES: tuple[ClassId, ...] = (ClassId.NONE, ClassId.OTHER)


def is_gesture(c: int) -> bool:
    return 0 <= int(c) <= 4


def is_background(c: int) -> bool:
    return int(c) in (5, 6)


class Hand(str, enum.Enum):
    LEFT = "left"
    RIGHT = "right"


class Modality(str, enum.Enum):
    RGB = "rgb"
    INFRARED = "infrared"
    DEPTH = "depth"


@dataclass(frozen=True, slots=True)
class ScoreFrame:
    frame_index: int
    scores: tuple[float, ...]

    @classmethod
    def of(cls, frame_index: int, scores: Iterable[float]) -> "ScoreFrame":
        return cls(int(frame_index), tuple(float(s) for s in scores))


@dataclass(frozen=True)
class StreamHeader:
    """Metadata binding a score stream to its hand and modality.

    ``modalities`` holds one entry for a raw classifier stream and several for
    a fused stream.
    """

    hand: Hand
    modalities: tuple[Modality, ...] = (Modality.RGB,)
    frame_rate: float = 30.0
    class_names: tuple[str, ...] = CLASS_NAMES
    total_frames: int = 0

    def __post_init__(self) -> None:
        if len(self.class_names) != NUM_CLASSES:
            raise ValueError(f"class_names must have {NUM_CLASSES} entries, got {len(self.class_names)}")
        if not (self.frame_rate > 0 and math.isfinite(self.frame_rate)):
            raise ValueError(f"frame_rate must be positive, got {self.frame_rate}")
        if self.total_frames < 0:
            raise ValueError("total_frames must be non-negative")
        if not self.modalities:
            raise ValueError("at least one modality is required")

    @property
    def modality(self) -> Modality | None:
        return self.modalities[0] if len(self.modalities) == 1 else None

    @property
    def is_fused(self) -> bool:
        return len(self.modalities) > 1


@dataclass(frozen=True)
class DetectionEvent:
    class_id: ClassId
    start_frame: int
    end_frame: int
    confidence: float
    hand: Hand

    def __post_init__(self) -> None:
        if not is_gesture(self.class_id):
            raise ValueError(f"detections must name a gesture class, got {self.class_id!r}")
        if self.start_frame >= self.end_frame:
            raise ValueError(f"start_frame {self.start_frame} must precede end_frame {self.end_frame}")
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"confidence {self.confidence} outside [0, 1]")


@dataclass(frozen=True)
class Annotation:
    """Ground-truth gesture interval; both frame bounds are inclusive."""

    class_id: ClassId
    hand: Hand
    start_frame: int
    end_frame: int

    def __post_init__(self) -> None:
        if self.start_frame < 0:
            raise ValueError(f"start_frame {self.start_frame} is negative")
        if self.start_frame >= self.end_frame:
            raise ValueError(f"start_frame {self.start_frame} must precede end_frame {self.end_frame}")

    def overlaps(self, other: "Annotation") -> bool:
        return self.start_frame <= other.end_frame and other.start_frame <= self.end_frame


@dataclass(frozen=True)
class Violation:
    rule: str
    observed: object
    message: str


@dataclass(frozen=True)
class ValidationResult:
    violations: tuple[Violation, ...] = field(default_factory=tuple)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok


def validate_frame(frame: ScoreFrame, tol: float = SUM_TOLERANCE) -> ValidationResult:
    """Check the softmax invariants of one frame, reporting every violation found."""
    out: list[Violation] = []
    if isinstance(frame.frame_index, bool) or not isinstance(frame.frame_index, int) or frame.frame_index < 0:
        out.append(Violation("frame_index", frame.frame_index, f"frame_index {frame.frame_index!r} is not a non-negative integer"))
    scores = frame.scores
    if len(scores) != NUM_CLASSES:
        out.append(Violation("length", len(scores), f"expected {NUM_CLASSES} scores, got {len(scores)}"))
    finite = True
    for k, s in enumerate(scores):
        if not math.isfinite(s):
            finite = False
            out.append(Violation("finite", s, f"score {k} is {s}"))
        elif s < 0.0 or s > 1.0:
            out.append(Violation("range", s, f"score {k} = {s} outside [0, 1]"))
    if finite and scores:
        total = math.fsum(scores)
        if abs(total - 1.0) > tol:
            out.append(Violation("sum", total, f"sum {total:g} ≠ 1"))
    return ValidationResult(tuple(out))


def check_annotations(annotations: Sequence[Annotation]) -> None:
    """Raise ValueError naming the first overlapping pair on the same hand."""
    by_hand: dict[Hand, list[Annotation]] = {}
    for a in annotations:
        by_hand.setdefault(a.hand, []).append(a)
    for items in by_hand.values():
        items = sorted(items, key=lambda a: (a.start_frame, a.end_frame))
        for prev, cur in zip(items, items[1:]):
            if prev.overlaps(cur):
                raise ValueError(f"overlapping annotations on {cur.hand.value} hand: {prev} and {cur}")


def annotations_to_sequence(annotations: Sequence[Annotation], hand: Hand) -> list[ClassId]:
    check_annotations([a for a in annotations if a.hand == hand])
    mine = sorted((a for a in annotations if a.hand == hand), key=lambda a: a.start_frame)
    return [a.class_id for a in mine if is_gesture(a.class_id)]
