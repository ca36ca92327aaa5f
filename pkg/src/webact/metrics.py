"""Classification, filtering and temporal-detection metrics.

Average precision uses the all-point interpolation: the area under the
monotone precision envelope over every achieved recall level, which equals the
mean over ground-truth ranks of the best precision at that recall or beyond.
An eleven-point variant is available through the ``interpolation`` argument.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import ValidationError
from .records import Segment
from .walk import FilterResult, _scores_of, filter_threshold, filter_top_k

DETECTION_IOU_THRESHOLDS = (0.1, 0.2, 0.3, 0.4, 0.5)


@dataclass(frozen=True)
class PRPoint:
    """One precision/recall operating point of a filtering sweep.

    ``cutoff`` is the swept quantity (a top-k rank or a score threshold).
    ``empty_kept`` flags the degenerate case where nothing was kept and
    precision defaults to 1.0.
    """

    cutoff: float | int | None
    precision: float
    recall: float
    n_kept: int
    empty_kept: bool = False

    @property
    def f1(self) -> float:
        if self.precision + self.recall == 0:
            return 0.0
        return 2 * self.precision * self.recall / (self.precision + self.recall)


def accuracy(pairs: Sequence[tuple[str, str]]) -> float:
    """Fraction of (predicted, actual) pairs that agree."""
    pairs = list(pairs)
    if not pairs:
        raise ValidationError("accuracy of an empty prediction set is undefined")
    correct = sum(1 for predicted, actual in pairs if predicted == actual)
    return correct / len(pairs)


def filtering_pr(result: FilterResult, inlier_mask,
                 cutoff: float | int | None = None) -> PRPoint:
    """Precision and recall of a kept set against ground-truth inliers."""
    mask = np.asarray(inlier_mask, dtype=bool)
    if mask.shape[0] != result.n:
        raise ValidationError(
            f"mask has {mask.shape[0]} entries for {result.n} samples")
    n_inliers = int(mask.sum())
    if n_inliers == 0:
        raise ValidationError("mask marks no inliers")
    kept = result.kept
    true_kept = int(mask[kept].sum())
    if kept.size == 0:
        return PRPoint(cutoff=cutoff, precision=1.0, recall=0.0,
                       n_kept=0, empty_kept=True)
    return PRPoint(cutoff=cutoff,
                   precision=true_kept / kept.size,
                   recall=true_kept / n_inliers,
                   n_kept=int(kept.size))


def pr_curve(relevance, inlier_mask, *,
             thresholds: Sequence[float] | None = None,
             top_k: Sequence[int] | None = None) -> list[PRPoint]:
    """One PRPoint per sweep value; exactly one sweep kind must be given."""
    if (thresholds is None) == (top_k is None):
        raise ValidationError("provide exactly one of thresholds or top_k")
    scores = _scores_of(relevance)
    points = []
    if thresholds is not None:
        if not len(thresholds):
            raise ValidationError("empty threshold sweep")
        for tau in thresholds:
            points.append(filtering_pr(filter_threshold(scores, tau), inlier_mask,
                                       cutoff=float(tau)))
    else:
        if not len(top_k):
            raise ValidationError("empty top-k sweep")
        for k in top_k:
            points.append(filtering_pr(filter_top_k(scores, int(k)), inlier_mask,
                                       cutoff=int(k)))
    return points


def temporal_iou(a: Segment, b: Segment) -> float:
    """Intersection over union of two time intervals; 0 when disjoint."""
    inter = min(a.end_s, b.end_s) - max(a.start_s, b.start_s)
    if inter <= 0:
        return 0.0
    union = a.duration_s + b.duration_s - inter
    return inter / union


def _interpolated_ap(tp_flags: Sequence[bool], n_truth: int,
                     interpolation: str = "all_points") -> float:
    if n_truth < 1:
        raise ValidationError("AP needs at least one ground-truth instance")
    flags = np.asarray(tp_flags, dtype=bool)
    if flags.size == 0:
        return 0.0
    tp_cum = np.cumsum(flags)
    precision = tp_cum / np.arange(1, flags.size + 1)
    envelope = np.maximum.accumulate(precision[::-1])[::-1]
    if interpolation == "all_points":
        total = 0.0
        for value in envelope[np.flatnonzero(flags)]:
            total += float(value)
        return total / n_truth
    if interpolation == "eleven_point":
        recall = tp_cum / n_truth
        total = 0.0
        for level in np.linspace(0.0, 1.0, 11):
            at_level = envelope[recall >= level - 1e-12]
            total += float(at_level[0]) if at_level.size else 0.0
        return total / 11.0
    raise ValidationError(f"unknown interpolation {interpolation!r}")


def _greedy_match(detections: Sequence[Segment], truth: Sequence[Segment],
                  iou_threshold: float) -> list[bool]:
    """True-positive flags of score-ordered detections.

    Each detection matches at most one not-yet-matched ground-truth segment of
    the same class in the same video, preferring the highest IoU at or above
    the threshold. Everything is sorted on content, so results do not depend
    on input record order.
    """
    dets = sorted(detections,
                  key=lambda s: (-s.score, s.video_id, s.class_label, s.start_s, s.end_s))
    gts = sorted(truth, key=lambda s: (s.video_id, s.class_label, s.start_s, s.end_s))
    matched = [False] * len(gts)
    flags = []
    for det in dets:
        best_iou = 0.0
        best_j = -1
        for j, gt in enumerate(gts):
            if matched[j] or gt.video_id != det.video_id \
                    or gt.class_label != det.class_label:
                continue
            iou = temporal_iou(det, gt)
            if iou >= iou_threshold and iou > best_iou:
                best_iou = iou
                best_j = j
        if best_j >= 0:
            matched[best_j] = True
            flags.append(True)
        else:
            flags.append(False)
    return flags


def detection_ap(detections: Sequence[Segment], truth: Sequence[Segment],
                 iou_threshold: float, interpolation: str = "all_points") -> float:
    """Average precision of scored segments against ground truth."""
    truth = list(truth)
    if not truth:
        raise ValidationError("detection AP needs ground-truth segments")
    flags = _greedy_match(detections, truth, iou_threshold)
    return _interpolated_ap(flags, len(truth), interpolation)


def per_class_detection_ap(detections: Sequence[Segment], truth: Sequence[Segment],
                           iou_threshold: float,
                           interpolation: str = "all_points") -> dict[str, float]:
    """AP per ground-truth class; detections of absent classes are ignored."""
    truth = list(truth)
    if not truth:
        raise ValidationError("detection AP needs ground-truth segments")
    classes = sorted({seg.class_label for seg in truth})
    table = {}
    for label in classes:
        dets = [d for d in detections if d.class_label == label]
        gts = [g for g in truth if g.class_label == label]
        table[label] = detection_ap(dets, gts, iou_threshold, interpolation)
    return table


def detection_map(detections: Sequence[Segment], truth: Sequence[Segment],
                  iou_thresholds: Sequence[float] = DETECTION_IOU_THRESHOLDS,
                  interpolation: str = "all_points") -> dict[float, float]:
    """Mean AP over ground-truth classes at each overlap ratio."""
    if not len(iou_thresholds):
        raise ValidationError("need at least one IoU threshold")
    out = {}
    for threshold in iou_thresholds:
        table = per_class_detection_ap(detections, truth, threshold, interpolation)
        out[float(threshold)] = float(np.mean(list(table.values())))
    return out


def classification_ap(scored: Iterable[tuple[float, bool]],
                      interpolation: str = "all_points") -> float:
    """AP of score-ranked binary labels (no IoU matching).

    Ties at equal score rank negatives first, so the value is pessimistic and
    independent of input order.
    """
    pairs = sorted(scored, key=lambda sp: (-sp[0], bool(sp[1])))
    n_pos = sum(1 for _, positive in pairs if positive)
    if n_pos == 0:
        raise ValidationError("ranked AP needs at least one positive")
    flags = [bool(positive) for _, positive in pairs]
    return _interpolated_ap(flags, n_pos, interpolation)


def classification_map(class_scores: Mapping[str, Sequence[tuple[float, bool]]],
                       interpolation: str = "all_points") -> float:
    """Mean over classes of ranked-video AP (untrimmed recognition metric)."""
    if not class_scores:
        raise ValidationError("classification mAP needs at least one class")
    aps = []
    for label in sorted(class_scores):
        try:
            aps.append(classification_ap(class_scores[label], interpolation))
        except ValidationError as exc:
            raise ValidationError(f"class {label!r}: {exc}") from None
    return float(np.mean(aps))
