"""Confusion-matrix construction and precision/recall/accuracy sweeps.

Counts are pooled over the whole sequence, not averaged per frame.
TP/FP/FN are box-level events from per-frame greedy IoU matching; TN is
inherently frame-level for detection (a correctly classified absence has
no box), so a TN is a frame with neither ground truth nor surviving
detections. N = TP + FP + FN + TN therefore mixes box-level and
frame-level counts; this is deliberate and documented.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, NamedTuple, Optional, Sequence

from .geometry import BoundingBox, Detection, iou

DEFAULT_IOU_THRESHOLD = 0.5

#: The canonical nine-step confidence sweep, 0.10 through 0.90.
NINE_THRESHOLDS = tuple(i / 10 for i in range(1, 10))


@dataclass(frozen=True)
class GroundTruthRecord:
    """A labeled box: one object in one frame."""

    frame_index: int
    bbox: BoundingBox
    object_id: int

    def __post_init__(self):
        if self.frame_index < 0:
            raise ValueError(f"frame_index must be non-negative, got {self.frame_index}")
        if self.object_id < 0:
            raise ValueError(f"object_id must be non-negative, got {self.object_id}")


@dataclass(frozen=True)
class ConfusionCounts:
    """TP/FP/FN/TN tallies; n is always their sum."""

    tp: int
    fp: int
    fn: int
    tn: int

    def __post_init__(self):
        for name in ("tp", "fp", "fn", "tn"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")

    @property
    def n(self) -> int:
        return self.tp + self.fp + self.fn + self.tn


class MetricValues(NamedTuple):
    precision: float
    recall: float
    accuracy: float
    degenerate: tuple[str, ...]


@dataclass(frozen=True)
class MetricsReport:
    """One sweep row: counts plus the derived metrics at one threshold."""

    threshold: float
    counts: ConfusionCounts
    precision: float
    recall: float
    accuracy: float
    degenerate: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "threshold": self.threshold,
            "tp": self.counts.tp,
            "fp": self.counts.fp,
            "fn": self.counts.fn,
            "tn": self.counts.tn,
            "n": self.counts.n,
            "precision": self.precision,
            "recall": self.recall,
            "accuracy": self.accuracy,
            "degenerate": list(self.degenerate),
        }


def metrics(counts: ConfusionCounts) -> MetricValues:
    """Precision, recall, and accuracy from pooled counts.

    Degenerate denominators (no predicted positives, no actual positives,
    or an empty sample) yield 0 for the affected metric and are flagged
    rather than raised, keeping sweep outputs total.
    """
    degenerate = []
    if counts.tp + counts.fp > 0:
        precision = counts.tp / (counts.tp + counts.fp)
    else:
        precision = 0.0
        degenerate.append("precision")
    if counts.tp + counts.fn > 0:
        recall = counts.tp / (counts.tp + counts.fn)
    else:
        recall = 0.0
        degenerate.append("recall")
    if counts.n > 0:
        accuracy = (counts.tp + counts.tn) / counts.n
    else:
        accuracy = 0.0
        degenerate.append("accuracy")
    return MetricValues(precision, recall, accuracy, tuple(degenerate))


def match_frame(
    detections: Sequence[Detection],
    ground_truth: Sequence[GroundTruthRecord],
    iou_threshold: float = DEFAULT_IOU_THRESHOLD,
) -> tuple[int, int, int]:
    """Greedy IoU matching within one frame, returning (tp, fp, fn).

    Detections are considered in descending confidence (ties: input order).
    Each claims its best-IoU still-unmatched ground-truth box if that IoU
    reaches iou_threshold; otherwise it is a false positive. Leftover
    ground-truth boxes are false negatives.
    """
    frames = {d.frame_index for d in detections} | {g.frame_index for g in ground_truth}
    if len(frames) > 1:
        raise ValueError(f"records span multiple frames: {sorted(frames)}")

    order = sorted(range(len(detections)), key=lambda i: (-detections[i].confidence, i))
    matched_gt = [False] * len(ground_truth)
    tp = fp = 0
    for det_index in order:
        best_iou = 0.0
        best_gt = None
        for gt_index, record in enumerate(ground_truth):
            if matched_gt[gt_index]:
                continue
            overlap = iou(detections[det_index].bbox, record.bbox)
            if overlap > best_iou:
                best_iou = overlap
                best_gt = gt_index
        if best_gt is not None and best_iou >= iou_threshold:
            matched_gt[best_gt] = True
            tp += 1
        else:
            fp += 1
    fn = matched_gt.count(False)
    return tp, fp, fn


def count_tn(
    frame_count: int,
    detections: Iterable[Detection],
    ground_truth: Iterable[GroundTruthRecord],
) -> int:
    """Frames (of 0..frame_count-1) with neither detections nor ground truth.

    Detections are expected to be threshold-filtered already; a frame whose
    detections were all filtered out counts as empty.
    """
    if frame_count < 0:
        raise ValueError(f"frame_count must be non-negative, got {frame_count}")
    occupied = {d.frame_index for d in detections} | {g.frame_index for g in ground_truth}
    return sum(1 for f in range(frame_count) if f not in occupied)


def _group_by_frame(records):
    grouped: dict[int, list] = {}
    for record in records:
        grouped.setdefault(record.frame_index, []).append(record)
    return grouped


def _infer_frame_count(detections, ground_truth) -> int:
    frames = [d.frame_index for d in detections] + [g.frame_index for g in ground_truth]
    return max(frames) + 1 if frames else 0


def evaluate_at(
    detections: Sequence[Detection],
    ground_truth: Sequence[GroundTruthRecord],
    threshold: float,
    iou_threshold: float = DEFAULT_IOU_THRESHOLD,
    frame_count: Optional[int] = None,
) -> MetricsReport:
    """Pooled confusion counts and metrics at a single confidence threshold.

    frame_count fixes the frame universe for TN counting; when omitted it
    is inferred as the highest frame index present plus one.
    """
    if not (0.0 <= threshold <= 1.0):
        raise ValueError(f"threshold must be in [0, 1], got {threshold}")
    if frame_count is None:
        frame_count = _infer_frame_count(detections, ground_truth)
    kept = [d for d in detections if d.confidence >= threshold]
    det_frames = _group_by_frame(kept)
    gt_frames = _group_by_frame(ground_truth)
    tp = fp = fn = 0
    for frame in sorted(det_frames.keys() | gt_frames.keys()):
        f_tp, f_fp, f_fn = match_frame(
            det_frames.get(frame, ()), gt_frames.get(frame, ()), iou_threshold
        )
        tp += f_tp
        fp += f_fp
        fn += f_fn
    tn = count_tn(frame_count, kept, ground_truth)
    counts = ConfusionCounts(tp, fp, fn, tn)
    values = metrics(counts)
    return MetricsReport(
        threshold, counts, values.precision, values.recall, values.accuracy, values.degenerate
    )


def threshold_sweep(
    detections: Sequence[Detection],
    ground_truth: Sequence[GroundTruthRecord],
    thresholds: Sequence[float] = NINE_THRESHOLDS,
    iou_threshold: float = DEFAULT_IOU_THRESHOLD,
    frame_count: Optional[int] = None,
) -> list[MetricsReport]:
    """Evaluate the sequence once per threshold, strictly increasing in (0, 1)."""
    if len(thresholds) == 0:
        raise ValueError("threshold list must not be empty")
    for t in thresholds:
        if not (0.0 < t < 1.0):
            raise ValueError(f"sweep thresholds must lie strictly inside (0, 1), got {t}")
    for a, b in zip(thresholds, thresholds[1:]):
        if not a < b:
            raise ValueError(f"thresholds must be strictly increasing, got {a} then {b}")
    if frame_count is None:
        frame_count = _infer_frame_count(detections, ground_truth)
    return [
        evaluate_at(detections, ground_truth, t, iou_threshold, frame_count)
        for t in thresholds
    ]
