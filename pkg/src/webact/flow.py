"""Optical-flow stack layout and first-layer weight inflation.

A motion classifier consumes D consecutive flow fields as a w x h x 2D input
volume: each flow field contributes its horizontal and vertical displacement
planes as two channels. RGB-pretrained first-layer weights (K x 3 x s x s) are
adapted to that volume by replicating the channel mean 2D times.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ValidationError


@dataclass(frozen=True)
class FlowVolume:
    """Stacked displacement planes: ``channels`` has shape (2*depth, h, w)."""

    width: int
    height: int
    depth: int
    channels: np.ndarray

    def __post_init__(self):
        if self.channels.shape != (2 * self.depth, self.height, self.width):
            raise ValidationError(
                f"channels shape {self.channels.shape} does not match "
                f"(2*{self.depth}, {self.height}, {self.width})")


def assemble_flow_stack(flows: Sequence[tuple[np.ndarray, np.ndarray]],
                        interleave: bool = True) -> FlowVolume:
    """Stack D (x, y) displacement plane pairs into a 2D-channel volume.

    With ``interleave=True`` channels are ordered [x1, y1, x2, y2, ...];
    otherwise all x planes precede all y planes. Values are copied bit-exactly
    and all planes must share shape and dtype.
    """
    if not flows:
        raise ValidationError("need at least one flow field")
    planes: list[np.ndarray] = []
    for pair in flows:
        if len(pair) != 2:
            raise ValidationError("each flow field must be an (x, y) plane pair")
        planes.extend(np.asarray(p) for p in pair)
    shape = planes[0].shape
    dtype = planes[0].dtype
    for p in planes:
        if p.ndim != 2:
            raise ValidationError(f"flow planes must be 2-D, got shape {p.shape}")
        if p.shape != shape:
            raise ValidationError(f"plane shape {p.shape} differs from {shape}")
        if p.dtype != dtype:
            raise ValidationError(f"plane dtype {p.dtype} differs from {dtype}")
    depth = len(flows)
    if interleave:
        ordered = planes
    else:
        ordered = planes[0::2] + planes[1::2]
    channels = np.stack(ordered, axis=0)
    return FlowVolume(width=shape[1], height=shape[0], depth=depth, channels=channels)


def inflate_channel_weights(weights, depth: int) -> np.ndarray:
    """Spread 3-channel conv weights over 2*depth flow channels.

    Every output channel equals the mean of the three input channels, so a
    K x 3 x s x s kernel bank becomes K x 2*depth x s x s.
    """
    arr = np.asarray(weights)
    if arr.ndim != 4:
        raise ValidationError(f"weights must be 4-D (K, 3, s, s), got shape {arr.shape}")
    if arr.shape[1] != 3:
        raise ValidationError(f"weights must have exactly 3 input channels, got {arr.shape[1]}")
    if depth < 1:
        raise ValidationError(f"depth must be >= 1, got {depth}")
    mean = arr.mean(axis=1, keepdims=True, dtype=np.float64).astype(arr.dtype)
    return np.repeat(mean, 2 * depth, axis=1)
