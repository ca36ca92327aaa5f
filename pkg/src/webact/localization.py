"""Temporal action localization in untrimmed probability series.

Two schemes are implemented. Frame-by-frame: fix the video-level class, keep
frames whose probability for that class clears a threshold, and group
consecutive qualifying frames into segments, dropping those at or under the
minimum duration. Sliding window: classify fixed-length windows independently
(no global prediction or threshold) and report each window's full temporal
bound, optionally merging same-class neighbors.

Frame t covers the half-open interval [t/fps, (t+1)/fps).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .fusion import predict_label, temporal_average
from .records import ProbabilitySeries, Segment

DEFAULT_MIN_DURATION_S = 0.1
_TIME_EPS = 1e-9


@dataclass(frozen=True)
class LocalizationConfig:
    """Parameters shared by the two localization schemes.

    ``prob_threshold`` and ``min_duration_s`` drive frame-by-frame grouping;
    ``window_s`` / ``stride_s`` / ``merge_overlaps`` drive the sliding window.
    ``gap_frames`` lets frame-by-frame runs bridge short non-qualifying gaps
    (default 0: strictly consecutive frames).
    """

    prob_threshold: float
    min_duration_s: float = DEFAULT_MIN_DURATION_S
    window_s: float | None = None
    stride_s: float | None = None
    merge_overlaps: bool = False
    gap_frames: int = 0

    def __post_init__(self):
        if not (0.0 <= self.prob_threshold <= 1.0):
            raise ValidationError(
                f"prob_threshold must be in [0, 1], got {self.prob_threshold!r}")
        if self.min_duration_s < 0:
            raise ValidationError("min_duration_s must be >= 0")
        if self.gap_frames < 0:
            raise ValidationError("gap_frames must be >= 0")
        if (self.window_s is None) != (self.stride_s is None):
            raise ValidationError("window_s and stride_s must be given together")
        if self.window_s is not None:
            if self.stride_s <= 0:
                raise ValidationError("stride_s must be positive")
            if self.window_s < self.stride_s:
                raise ValidationError("window_s must be >= stride_s")


def localize_frame_by_frame(series: ProbabilitySeries,
                            cfg: LocalizationConfig) -> list[Segment]:
    """Group threshold-clearing frames of the video-level class into segments.

    Segment score is the mean probability of the chosen class over the run.
    Runs whose duration is <= ``min_duration_s`` are dropped (strictly longer
    survives).
    """
    g = predict_label(temporal_average(series)).index
    track = series.probs[:, g]
    qualifying = np.flatnonzero(track >= cfg.prob_threshold)
    segments: list[Segment] = []
    if qualifying.size == 0:
        return segments
    fps = series.fps
    run_start = run_end = int(qualifying[0])
    runs: list[tuple[int, int]] = []
    for t in qualifying[1:]:
        t = int(t)
        if t - run_end <= cfg.gap_frames + 1:
            run_end = t
        else:
            runs.append((run_start, run_end))
            run_start = run_end = t
    runs.append((run_start, run_end))
    for a, b in runs:
        duration = (b + 1 - a) / fps
        if duration <= cfg.min_duration_s:
            continue
        segments.append(Segment(
            video_id=series.video_id,
            class_label=series.class_names[g],
            start_s=a / fps,
            end_s=(b + 1) / fps,
            score=float(track[a:b + 1].mean()),
        ))
    return segments


def _frames_in(start_s: float, end_s: float, fps: float, n_frames: int) -> tuple[int, int]:
    """Frame index range [i0, i1) whose start times fall in [start_s, end_s)."""
    i0 = max(0, int(math.ceil(start_s * fps - _TIME_EPS)))
    i1 = min(n_frames, int(math.ceil(end_s * fps - _TIME_EPS)))
    return i0, i1


def localize_sliding_window(series: ProbabilitySeries,
                            cfg: LocalizationConfig) -> list[Segment]:
    """Classify stride-spaced windows and report their full temporal bounds.

    No global prediction or probability threshold is involved. A final partial
    window at the sequence end is evaluated once. With ``merge_overlaps``,
    chronologically overlapping or adjacent same-class windows are merged and
    the merged score is the max of its parts.
    """
    if cfg.window_s is None or cfg.stride_s is None:
        raise ValidationError("sliding window requires window_s and stride_s")
    duration = series.duration_s
    if cfg.window_s > duration + _TIME_EPS:
        raise ValidationError(
            f"window of {cfg.window_s}s is longer than the {duration}s video")
    segments: list[Segment] = []
    k = 0
    while True:
        start = k * cfg.stride_s
        if start >= duration - _TIME_EPS:
            break
        partial = start + cfg.window_s > duration + _TIME_EPS
        end = duration if partial else start + cfg.window_s
        i0, i1 = _frames_in(start, end, series.fps, series.n_frames)
        if i1 > i0:
            mean = series.probs[i0:i1].mean(axis=0)
            c = int(np.argmax(mean))
            segments.append(Segment(
                video_id=series.video_id,
                class_label=series.class_names[c],
                start_s=start,
                end_s=end,
                score=float(mean[c]),
            ))
        if partial:
            break
        k += 1
    if cfg.merge_overlaps:
        segments = merge_segments(segments)
    return segments


def merge_segments(segments: list[Segment]) -> list[Segment]:
    """Merge same-class segments that overlap or touch; scores combine by max.

    All segments must share one video id. Output is sorted by start time.
    """
    if not segments:
        return []
    video_ids = {seg.video_id for seg in segments}
    if len(video_ids) > 1:
        raise ValidationError(f"cannot merge segments from several videos: {sorted(video_ids)}")
    merged: list[Segment] = []
    by_class: dict[str, list[Segment]] = {}
    for seg in segments:
        by_class.setdefault(seg.class_label, []).append(seg)
    for label in sorted(by_class):
        group = sorted(by_class[label], key=lambda s: (s.start_s, s.end_s))
        current = group[0]
        for seg in group[1:]:
            if seg.start_s <= current.end_s + _TIME_EPS:
                current = Segment(
                    video_id=current.video_id,
                    class_label=label,
                    start_s=current.start_s,
                    end_s=max(current.end_s, seg.end_s),
                    score=max(current.score, seg.score),
                )
            else:
                merged.append(current)
                current = seg
        merged.append(current)
    merged.sort(key=lambda s: (s.start_s, s.end_s, s.class_label))
    return merged
