"""Temporal aggregation of frame probabilities and two-stream fusion.

Per-frame class probabilities are averaged along the temporal axis to score a
whole video; the scores of complementary streams (appearance and motion) are
combined elementwise, either by averaging or by product.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .records import ProbabilitySeries


@dataclass(frozen=True)
class ProbabilityVector:
    """One class-probability vector with its class names."""

    p: np.ndarray
    class_names: tuple[str, ...]

    def __post_init__(self):
        p = np.asarray(self.p, dtype=np.float64)
        if p.ndim != 1:
            raise ValidationError(f"probability vector must be 1-D, got shape {p.shape}")
        names = tuple(self.class_names)
        if p.shape[0] != len(names):
            raise ValidationError(f"{len(names)} class names for {p.shape[0]} entries")
        if np.any(p < 0):
            raise ValidationError("probability vector has negative entries")
        if abs(p.sum() - 1.0) > 1e-6:
            raise ValidationError(f"probability vector sums to {p.sum()!r}, expected 1")
        p = p.copy()
        p.flags.writeable = False
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "class_names", names)


@dataclass(frozen=True)
class Prediction:
    """Argmax outcome; ``tie`` flags degenerate inputs with several maxima."""

    label: str
    index: int
    probability: float
    tie: bool


def _check_same_classes(a: ProbabilityVector, b: ProbabilityVector) -> None:
    if a.class_names != b.class_names:
        raise ValidationError(
            f"class lists differ: {a.class_names} vs {b.class_names}")


def temporal_average(series: ProbabilitySeries) -> ProbabilityVector:
    """Mean of the per-frame probability rows; the video-level score."""
    return ProbabilityVector(series.probs.mean(axis=0), series.class_names)


def fuse_average(a: ProbabilityVector, b: ProbabilityVector) -> ProbabilityVector:
    """Elementwise average of two probability vectors."""
    _check_same_classes(a, b)
    return ProbabilityVector((a.p + b.p) / 2.0, a.class_names)


def fuse_product(a: ProbabilityVector, b: ProbabilityVector) -> ProbabilityVector:
    """Elementwise product, renormalized to sum 1.

    Renormalization does not move the argmax; it keeps fused vectors usable
    wherever a probability vector is expected (e.g. localization thresholds).
    """
    _check_same_classes(a, b)
    q = a.p * b.p
    total = q.sum()
    if total == 0.0:
        raise ValidationError("product fusion is degenerate: all entries are zero")
    return ProbabilityVector(q / total, a.class_names)


def fuse_three(rgb: ProbabilityVector, flow_short: ProbabilityVector,
               flow_long: ProbabilityVector) -> ProbabilityVector:
    """Average the two flow-horizon streams, then product-fuse with RGB."""
    return fuse_product(rgb, fuse_average(flow_short, flow_long))


def predict_label(vector: ProbabilityVector) -> Prediction:
    """Class with maximal probability; ties break to the lowest index."""
    index = int(np.argmax(vector.p))
    top = vector.p[index]
    tie = bool(np.count_nonzero(vector.p == top) > 1)
    return Prediction(label=vector.class_names[index], index=index,
                      probability=float(top), tie=tie)
