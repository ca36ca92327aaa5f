"""Domain records: samples, probability series and temporal segments."""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .errors import ValidationError
from .validation import check_probability_rows


class Source(str, enum.Enum):
    """Web provider a sample was retrieved from."""

    GOOGLE_IMAGE = "google_image"
    FLICKR = "flickr"
    YOUTUBE_FRAME = "youtube_frame"
    GIF_FRAME = "gif_frame"
    OTHER = "other"


@dataclass(frozen=True)
class SampleRecord:
    """One retrieved sample (image, video frame or GIF frame).

    ``feature_row`` points at the sample's row in an external feature matrix.
    ``frame_index`` must be present exactly when ``video_id`` is.
    """

    id: str
    class_label: str
    source: Source
    feature_row: int
    video_id: str | None = None
    frame_index: int | None = None
    timestamp_s: float | None = None

    def __post_init__(self):
        if not self.id:
            raise ValidationError("sample id must be non-empty")
        if not self.class_label:
            raise ValidationError(f"sample {self.id!r}: class label must be non-empty")
        if not isinstance(self.source, Source):
            object.__setattr__(self, "source", Source(self.source))
        if self.feature_row < 0:
            raise ValidationError(f"sample {self.id!r}: feature_row must be >= 0")
        if (self.video_id is None) != (self.frame_index is None):
            raise ValidationError(
                f"sample {self.id!r}: frame_index must be present exactly when video_id is")
        if self.frame_index is not None and self.frame_index < 0:
            raise ValidationError(f"sample {self.id!r}: frame_index must be >= 0")
        if self.timestamp_s is not None and self.timestamp_s < 0:
            raise ValidationError(f"sample {self.id!r}: timestamp_s must be >= 0")


@dataclass(frozen=True)
class SampleSet:
    """Ordered collection of samples with unique ids."""

    records: tuple[SampleRecord, ...]

    def __post_init__(self):
        records = tuple(self.records)
        object.__setattr__(self, "records", records)
        seen = set()
        for rec in records:
            if rec.id in seen:
                raise ValidationError(f"duplicate sample id {rec.id!r}")
            seen.add(rec.id)

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self) -> Iterator[SampleRecord]:
        return iter(self.records)

    def __getitem__(self, i: int) -> SampleRecord:
        return self.records[i]

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(rec.id for rec in self.records)

    @property
    def class_labels(self) -> tuple[str, ...]:
        """Distinct class labels, sorted."""
        return tuple(sorted({rec.class_label for rec in self.records}))

    def indices_for_class(self, label: str) -> np.ndarray:
        return np.array([i for i, rec in enumerate(self.records)
                         if rec.class_label == label], dtype=np.intp)

    def subset(self, indices: Sequence[int]) -> "SampleSet":
        return SampleSet(tuple(self.records[int(i)] for i in indices))

    def feature_rows(self) -> np.ndarray:
        return np.array([rec.feature_row for rec in self.records], dtype=np.intp)


def check_feature_rows(samples: SampleSet, n_rows: int) -> None:
    """Ensure every record's feature_row points inside a matrix with n_rows rows."""
    for rec in samples:
        if rec.feature_row >= n_rows:
            raise ValidationError(
                f"sample {rec.id!r}: feature_row {rec.feature_row} outside matrix "
                f"with {n_rows} rows")


@dataclass(frozen=True)
class ProbabilitySeries:
    """Per-frame class probabilities for one video at a known frame rate."""

    video_id: str
    fps: float
    probs: np.ndarray
    class_names: tuple[str, ...]

    def __post_init__(self):
        if self.fps <= 0 or not np.isfinite(self.fps):
            raise ValidationError(f"fps must be positive, got {self.fps!r}")
        probs = check_probability_rows(self.probs, "probability series")
        names = tuple(self.class_names)
        if len(names) != probs.shape[1]:
            raise ValidationError(
                f"{len(names)} class names for {probs.shape[1]} probability columns")
        if len(set(names)) != len(names):
            raise ValidationError("class names must be unique")
        for name in names:
            if not name or "," in name or "\n" in name:
                raise ValidationError(f"invalid class name {name!r}")
        probs = probs.copy()
        probs.flags.writeable = False
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "class_names", names)

    @property
    def n_frames(self) -> int:
        return self.probs.shape[0]

    @property
    def duration_s(self) -> float:
        return self.probs.shape[0] / self.fps


@dataclass(frozen=True)
class Segment:
    """Temporal interval [start_s, end_s) with a class label and confidence."""

    video_id: str
    class_label: str
    start_s: float
    end_s: float
    score: float = 1.0

    def __post_init__(self):
        if not (0 <= self.start_s < self.end_s):
            raise ValidationError(
                f"segment requires 0 <= start < end, got [{self.start_s}, {self.end_s})")
        if not (0.0 <= self.score <= 1.0):
            raise ValidationError(f"segment score must be in [0, 1], got {self.score}")
        for text in (self.video_id, self.class_label):
            if not text or "," in text or "\n" in text:
                raise ValidationError(f"invalid segment field {text!r}")

    @property
    def duration_s(self) -> float:
        return self.end_s - self.start_s
