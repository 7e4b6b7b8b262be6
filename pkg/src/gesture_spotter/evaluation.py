"""Sequence-level evaluation with the Levenshtein distance.

Only the order of detected classes matters; how well event intervals line up
with annotations is reported separately as diagnostics.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Hashable, Sequence

from gesture_spotter.core import Annotation, ClassId, DetectionEvent, Hand, annotations_to_sequence

INSERT = "insert"
DELETE = "delete"
SUBSTITUTE = "substitute"


@dataclass(frozen=True)
class EditOp:
    """One edit turning the prediction into the ground truth.

    Ops apply in list order to a working copy of the prediction; ``position``
    indexes that working copy (equal to the count of ground-truth items
    already produced).
    """

    kind: str
    position: int
    value: Hashable = None


def _table(a: Sequence, b: Sequence) -> list[list[int]]:
    n, m = len(a), len(b)
    d = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(n + 1):
        d[i][0] = i
    for j in range(m + 1):
        d[0][j] = j
    for i in range(1, n + 1):
        ai = a[i - 1]
        row, prev = d[i], d[i - 1]
        for j in range(1, m + 1):
            cost = 0 if ai == b[j - 1] else 1
            row[j] = min(prev[j] + 1, row[j - 1] + 1, prev[j - 1] + cost)
    return d


def levenshtein_distance(a: Sequence, b: Sequence) -> int:
    """Unit-cost edit distance, two-row dynamic programme."""
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return len(a)
    prev = list(range(len(b) + 1))
    for i, ai in enumerate(a, start=1):
        cur = [i]
        for j, bj in enumerate(b, start=1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ai != bj)))
        prev = cur
    return prev[-1]


def edit_script(pred: Sequence, gt: Sequence) -> list[EditOp]:
    """Minimal edits from ``pred`` to ``gt``.

    Backtrace tie-break: match, then substitute, then delete, then insert.
    """
    d = _table(pred, gt)
    i, j = len(pred), len(gt)
    rev: list[tuple[str, int, int]] = []
    while i > 0 or j > 0:
        here = d[i][j]
        if i > 0 and j > 0 and pred[i - 1] == gt[j - 1] and d[i - 1][j - 1] == here:
            i, j = i - 1, j - 1
            continue
        if i > 0 and j > 0 and d[i - 1][j - 1] + 1 == here:
            rev.append((SUBSTITUTE, i - 1, j - 1))
            i, j = i - 1, j - 1
        elif i > 0 and d[i - 1][j] + 1 == here:
            rev.append((DELETE, i - 1, j))
            i -= 1
        else:
            rev.append((INSERT, i, j - 1))
            j -= 1
    ops = []
    for kind, pi, gj in reversed(rev):
        if kind == DELETE:
            ops.append(EditOp(DELETE, gj, pred[pi]))
        else:
            ops.append(EditOp(kind, gj, gt[gj]))
    return ops


def apply_edit_ops(pred: Sequence, ops: Sequence[EditOp]) -> list:
    out = list(pred)
    for op in ops:
        if op.kind == SUBSTITUTE:
            out[op.position] = op.value
        elif op.kind == DELETE:
            del out[op.position]
        elif op.kind == INSERT:
            out.insert(op.position, op.value)
        else:
            raise ValueError(f"unknown edit kind {op.kind!r}")
    return out


def levenshtein_accuracy(pred: Sequence, gt: Sequence) -> float:
    """``1 - distance / len(gt)``; negative when predictions over-trigger."""
    if not gt:
        raise ValueError("undefined accuracy: ground truth sequence is empty")
    return 1.0 - levenshtein_distance(pred, gt) / len(gt)


@dataclass
class StreamResult:
    stream_id: str
    distance: int
    gt_length: int
    accuracy: float


@dataclass
class EvalReport:
    distance: int
    gt_length: int
    accuracy: float
    per_stream: list[StreamResult] = field(default_factory=list)
    edit_ops: list[EditOp] = field(default_factory=list)
    predicted: list[ClassId] = field(default_factory=list)
    ground_truth: list[ClassId] = field(default_factory=list)
    overlaps: list[dict[str, Any]] = field(default_factory=list)

    def to_dict(self) -> dict[str, Any]:
        return {
            "distance": self.distance,
            "gt_length": self.gt_length,
            "accuracy": self.accuracy,
            "predicted": [int(c) for c in self.predicted],
            "ground_truth": [int(c) for c in self.ground_truth],
            "edit_ops": [{"kind": o.kind, "position": o.position, "value": int(o.value)} for o in self.edit_ops],
            "per_stream": [vars(s).copy() for s in self.per_stream],
            "overlaps": self.overlaps,
        }


def _iou(a0: int, a1: int, b0: int, b1: int) -> float:
    inter = min(a1, b1) - max(a0, b0) + 1
    if inter <= 0:
        return 0.0
    return inter / (max(a1, b1) - min(a0, b0) + 1)


def temporal_overlaps(events: Sequence[DetectionEvent], annotations: Sequence[Annotation]) -> list[dict[str, Any]]:
    """Best-IoU annotation for each event (informational, not the metric)."""
    out = []
    for k, e in enumerate(events):
        best, best_iou = None, 0.0
        for j, a in enumerate(annotations):
            iou = _iou(e.start_frame, e.end_frame, a.start_frame, a.end_frame)
            if iou > best_iou:
                best, best_iou = j, iou
        out.append({"event": k, "annotation": best, "iou": best_iou})
    return out


def evaluate_run(events: Sequence[DetectionEvent], annotations: Sequence[Annotation], hand: Hand, stream_id: str = "stream") -> EvalReport:
    mine = sorted((e for e in events if e.hand == hand), key=lambda e: e.start_frame)
    pred = [e.class_id for e in mine]
    gt = annotations_to_sequence(annotations, hand)
    dist = levenshtein_distance(pred, gt)
    acc = levenshtein_accuracy(pred, gt)
    gt_ann = sorted((a for a in annotations if a.hand == hand), key=lambda a: a.start_frame)
    return EvalReport(
        distance=dist,
        gt_length=len(gt),
        accuracy=acc,
        per_stream=[StreamResult(stream_id, dist, len(gt), acc)],
        edit_ops=edit_script(pred, gt),
        predicted=pred,
        ground_truth=gt,
        overlaps=temporal_overlaps(mine, gt_ann),
    )


def aggregate(results: Sequence[StreamResult], clamp_zero: bool = False) -> dict[str, float]:
    """Unweighted mean of per-stream accuracies plus the pooled ratio."""
    if not results:
        raise ValueError("nothing to aggregate")
    accs = [max(0.0, r.accuracy) if clamp_zero else r.accuracy for r in results]
    total_d = sum(r.distance for r in results)
    total_gt = sum(r.gt_length for r in results)
    pooled = 1.0 - total_d / total_gt if total_gt else float("nan")
    if clamp_zero:
        pooled = max(0.0, pooled)
    return {
        "mean_accuracy": sum(accs) / len(accs),
        "pooled_accuracy": pooled,
        "streams": len(results),
        "distance": total_d,
        "gt_length": total_gt,
    }
