"""Multi-source training-set assembly, train/validation splits and noise injection.

``mix_sources`` mixes filtered samples from heterogeneous web providers under
per-bucket quotas (the default takes, per class, 400 web images across Google
and Flickr, 500 video frames and 100 GIF frames, i.e. 1000 samples per class).
``inject_noise`` corrupts a single-class set with a controlled fraction of
distractors from other classes to benchmark outlier filtering.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .errors import ShortageError, ValidationError
from .records import SampleRecord, SampleSet, Source

DEFAULT_SPLIT_RATIO = 0.8


@dataclass(frozen=True)
class QuotaBucket:
    """One quota bucket: a name, the sources it merges and a sample count."""

    name: str
    sources: tuple[Source, ...]
    count: int

    def __post_init__(self):
        object.__setattr__(self, "sources",
                           tuple(Source(s) for s in self.sources))
        if self.count < 0:
            raise ValidationError(f"bucket {self.name!r}: count must be >= 0")
        if not self.sources:
            raise ValidationError(f"bucket {self.name!r}: needs at least one source")


@dataclass(frozen=True)
class MixQuota:
    """Ordered quota buckets; bucket order fixes the output sample order."""

    buckets: tuple[QuotaBucket, ...]

    def __post_init__(self):
        buckets = tuple(self.buckets)
        object.__setattr__(self, "buckets", buckets)
        if not buckets:
            raise ValidationError("quota needs at least one bucket")
        names = [b.name for b in buckets]
        if len(set(names)) != len(names):
            raise ValidationError(f"duplicate bucket names in {names}")
        seen: set[Source] = set()
        for bucket in buckets:
            overlap = seen & set(bucket.sources)
            if overlap:
                raise ValidationError(
                    f"source(s) {sorted(s.value for s in overlap)} appear in two buckets")
            seen |= set(bucket.sources)
        if self.total == 0:
            raise ValidationError("quota total must be positive")

    @property
    def total(self) -> int:
        return sum(b.count for b in self.buckets)

    @classmethod
    def default(cls) -> "MixQuota":
        """400 web images + 500 video frames + 100 GIF frames per class."""
        return cls((
            QuotaBucket("web_images", (Source.GOOGLE_IMAGE, Source.FLICKR), 400),
            QuotaBucket("video_frames", (Source.YOUTUBE_FRAME,), 500),
            QuotaBucket("gif_frames", (Source.GIF_FRAME,), 100),
        ))


@dataclass(frozen=True)
class NoiseBench:
    """A corrupted single-class sample set with its ground-truth inlier mask."""

    samples: SampleSet
    inlier_mask: np.ndarray
    noise_fraction: float

    def __post_init__(self):
        mask = np.asarray(self.inlier_mask, dtype=bool)
        if mask.shape[0] != len(self.samples):
            raise ValidationError("inlier mask length must match sample count")
        object.__setattr__(self, "inlier_mask", mask)


def mix_sources(parts: Sequence[tuple[SampleSet, np.ndarray]], quota: MixQuota,
                *, allow_short: bool = False) -> SampleSet:
    """Assemble a training set from per-source filtered sample sets.

    ``parts`` pairs each filtered SampleSet with its per-sample relevance.
    Per class and per quota bucket, the bucket-count most relevant samples
    are taken (ties toward earlier input position). Output order is class,
    then bucket order, then descending relevance.

    Raises ShortageError naming the class and bucket when a quota cannot be
    met and ``allow_short`` is False.
    """
    records: list[SampleRecord] = []
    relevance: list[float] = []
    for samples, scores in parts:
        scores = np.asarray(scores, dtype=np.float64)
        if scores.shape != (len(samples),):
            raise ValidationError(
                f"relevance shape {scores.shape} does not match {len(samples)} samples")
        records.extend(samples)
        relevance.extend(float(s) for s in scores)
    merged = SampleSet(tuple(records))  # also checks cross-part id uniqueness
    scores = np.asarray(relevance)
    chosen: list[SampleRecord] = []
    for label in merged.class_labels:
        for bucket in quota.buckets:
            if bucket.count == 0:
                continue
            candidates = [i for i, rec in enumerate(merged)
                          if rec.class_label == label and rec.source in bucket.sources]
            if len(candidates) < bucket.count and not allow_short:
                raise ShortageError(
                    f"class {label!r}: bucket {bucket.name!r} has {len(candidates)} "
                    f"samples for a quota of {bucket.count}")
            order = sorted(candidates, key=lambda i: (-scores[i], i))
            chosen.extend(merged[i] for i in order[:bucket.count])
    return SampleSet(tuple(chosen))


def split_train_val(samples: SampleSet, ratio: float = DEFAULT_SPLIT_RATIO,
                    seed: int = 0) -> tuple[SampleSet, SampleSet]:
    """Stratified random split; per class, round(ratio * n) samples train.

    Deterministic for a given seed. Both outputs preserve the input manifest
    order. Classes with fewer than 2 samples are rejected.
    """
    if not (0.0 < ratio < 1.0):
        raise ValidationError(f"ratio must be in (0, 1), got {ratio!r}")
    rng = np.random.default_rng(seed)
    train_ids: set[str] = set()
    for label in samples.class_labels:
        idx = samples.indices_for_class(label)
        n = idx.shape[0]
        if n < 2:
            raise ValidationError(f"class {label!r} has {n} sample(s), cannot split")
        n_train = int(round(ratio * n))
        picks = rng.permutation(n)[:n_train]
        train_ids.update(samples[int(idx[p])].id for p in picks)
    train = SampleSet(tuple(rec for rec in samples if rec.id in train_ids))
    val = SampleSet(tuple(rec for rec in samples if rec.id not in train_ids))
    return train, val


def inject_noise(clean: SampleSet, distractors: SampleSet, fraction: float,
                 seed: int = 0) -> NoiseBench:
    """Corrupt a single-class set with round(fraction * n) random distractors.

    Injected records are relabeled to the clean class (they masquerade as
    mislabeled retrievals); the returned inlier mask carries the ground truth,
    true exactly for the original clean samples.
    """
    if not (0.0 <= fraction < 1.0):
        raise ValidationError(f"fraction must be in [0, 1), got {fraction!r}")
    clean_classes = {rec.class_label for rec in clean}
    if len(clean_classes) != 1:
        raise ValidationError(f"clean set must hold one class, got {sorted(clean_classes)}")
    (clean_class,) = clean_classes
    if any(rec.class_label == clean_class for rec in distractors):
        raise ValidationError(f"distractors must not carry the clean class {clean_class!r}")
    n_inject = int(round(fraction * len(clean)))
    if n_inject > len(distractors):
        raise ShortageError(
            f"need {n_inject} distractors, only {len(distractors)} available")
    rng = np.random.default_rng(seed)
    picks = rng.choice(len(distractors), size=n_inject, replace=False)
    injected = tuple(replace(distractors[int(i)], class_label=clean_class)
                     for i in picks)
    samples = SampleSet(tuple(clean) + injected)
    mask = np.concatenate([np.ones(len(clean), dtype=bool),
                           np.zeros(n_inject, dtype=bool)])
    return NoiseBench(samples=samples, inlier_mask=mask, noise_fraction=fraction)
