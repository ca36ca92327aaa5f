"""Parsers and writers for every external file format.

All writers are deterministic: identical objects produce byte-identical text.
Numeric parsing is locale-independent ('.' decimal separator throughout).
"""
from __future__ import annotations

import json
import struct
from typing import Iterable, Sequence

import numpy as np

from .errors import ParseError, ValidationError
from .records import ProbabilitySeries, SampleRecord, SampleSet, Segment, Source

FEATURE_MAGIC = b"WFEA"
TENSOR_MAGIC = b"WTEN"

_MANIFEST_KEYS = ("id", "class", "source", "feature_row",
                  "video_id", "frame_index", "timestamp_s")
_REQUIRED_KEYS = ("id", "class", "source", "feature_row")


# ---------------------------------------------------------------------------
# sample manifests (.jsonl)

def parse_manifest(text: str) -> SampleSet:
    """Parse a line-delimited manifest; one JSON object per line.

    Blank lines are allowed. Malformed lines and duplicate ids raise ParseError
    carrying the offending line number.
    """
    records: list[SampleRecord] = []
    first_line: dict[str, int] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(lineno, f"invalid JSON: {exc.msg}") from None
        if not isinstance(obj, dict):
            raise ParseError(lineno, "manifest line must be a JSON object")
        unknown = set(obj) - set(_MANIFEST_KEYS)
        if unknown:
            raise ParseError(lineno, f"unknown keys {sorted(unknown)}")
        missing = [k for k in _REQUIRED_KEYS if k not in obj]
        if missing:
            raise ParseError(lineno, f"missing keys {missing}")
        try:
            source = Source(obj["source"])
        except ValueError:
            raise ParseError(lineno, f"unknown source {obj['source']!r}") from None
        for key in ("id", "class"):
            if not isinstance(obj[key], str):
                raise ParseError(lineno, f"{key} must be a string")
        for key in ("feature_row", "frame_index"):
            value = obj.get(key)
            if value is not None and (not isinstance(value, int)
                                      or isinstance(value, bool)):
                raise ParseError(lineno, f"{key} must be an integer")
        if obj.get("video_id") is not None and not isinstance(obj["video_id"], str):
            raise ParseError(lineno, "video_id must be a string")
        if obj.get("timestamp_s") is not None \
                and not isinstance(obj["timestamp_s"], (int, float)):
            raise ParseError(lineno, "timestamp_s must be a number")
        try:
            rec = SampleRecord(
                id=obj["id"],
                class_label=obj["class"],
                source=source,
                feature_row=obj["feature_row"],
                video_id=obj.get("video_id"),
                frame_index=obj.get("frame_index"),
                timestamp_s=obj.get("timestamp_s"),
            )
        except ValidationError as exc:
            raise ParseError(lineno, str(exc)) from None
        if rec.id in first_line:
            raise ParseError(
                lineno, f"duplicate id {rec.id!r} (first seen on line {first_line[rec.id]})")
        first_line[rec.id] = lineno
        records.append(rec)
    return SampleSet(tuple(records))


def write_manifest(samples: SampleSet) -> str:
    lines = []
    for rec in samples:
        obj: dict = {
            "id": rec.id,
            "class": rec.class_label,
            "source": rec.source.value,
            "feature_row": rec.feature_row,
        }
        if rec.video_id is not None:
            obj["video_id"] = rec.video_id
            obj["frame_index"] = rec.frame_index
        if rec.timestamp_s is not None:
            obj["timestamp_s"] = rec.timestamp_s
        lines.append(json.dumps(obj))
    return "".join(line + "\n" for line in lines)


# ---------------------------------------------------------------------------
# feature matrices: little-endian binary with a CSV fallback

def write_feature_matrix(values, fmt: str = "binary") -> bytes:
    arr = np.asarray(values)
    if arr.ndim != 2:
        raise ValidationError(f"feature matrix must be 2-D, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValidationError(f"feature matrix must be non-empty, got {arr.shape}")
    payload = np.ascontiguousarray(arr, dtype="<f4")
    if not np.all(np.isfinite(payload)):
        raise ValidationError("feature matrix contains non-finite values")
    if fmt == "binary":
        n, d = payload.shape
        return FEATURE_MAGIC + struct.pack("<II", n, d) + payload.tobytes()
    if fmt == "csv":
        lines = [",".join(repr(float(x)) for x in row) for row in payload]
        return ("".join(line + "\n" for line in lines)).encode("utf-8")
    raise ValidationError(f"unknown feature format {fmt!r}")


def parse_feature_matrix(data: bytes) -> np.ndarray:
    """Parse WFEA binary bytes, or fall back to CSV when the magic is absent.

    Returns a float32 array; binary round-trips are bit-exact.
    """
    if data[:4] == FEATURE_MAGIC:
        if len(data) < 12:
            raise ValidationError("feature header truncated")
        n, d = struct.unpack("<II", data[4:12])
        if n < 1 or d < 1:
            raise ValidationError(f"feature header requires n >= 1 and d >= 1, got {n} x {d}")
        expected = n * d * 4
        payload = data[12:]
        if len(payload) != expected:
            raise ValidationError(
                f"feature payload is {len(payload)} bytes, expected {expected} for {n} x {d}")
        arr = np.frombuffer(payload, dtype="<f4").reshape(n, d).copy()
    else:
        arr = _parse_feature_csv(data)
    if not np.all(np.isfinite(arr)):
        raise ValidationError("feature matrix contains non-finite values")
    return arr


def _parse_feature_csv(data: bytes) -> np.ndarray:
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError:
        raise ValidationError("bad magic: not a WFEA blob and not UTF-8 CSV") from None
    rows: list[list[float]] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            rows.append([float(cell) for cell in line.split(",")])
        except ValueError:
            raise ParseError(lineno, "invalid float in feature CSV") from None
        if len(rows) > 1 and len(rows[-1]) != len(rows[0]):
            raise ParseError(lineno, "ragged feature CSV row")
    if not rows:
        raise ValidationError("empty feature CSV")
    return np.asarray(rows, dtype="<f4")


# ---------------------------------------------------------------------------
# generic float32 tensors (flow planes, conv weights)

_MAX_TENSOR_RANK = 8


def write_tensor(values) -> bytes:
    arr = np.ascontiguousarray(np.asarray(values), dtype="<f4")
    if arr.ndim < 1 or arr.ndim > _MAX_TENSOR_RANK:
        raise ValidationError(f"tensor rank must be in 1..{_MAX_TENSOR_RANK}, got {arr.ndim}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError("tensor contains non-finite values")
    header = struct.pack("<I", arr.ndim) + struct.pack(f"<{arr.ndim}I", *arr.shape)
    return TENSOR_MAGIC + header + arr.tobytes()


def parse_tensor(data: bytes) -> np.ndarray:
    if data[:4] != TENSOR_MAGIC:
        raise ValidationError("bad magic: expected WTEN tensor blob")
    if len(data) < 8:
        raise ValidationError("tensor header truncated")
    (rank,) = struct.unpack("<I", data[4:8])
    if rank < 1 or rank > _MAX_TENSOR_RANK:
        raise ValidationError(f"tensor rank must be in 1..{_MAX_TENSOR_RANK}, got {rank}")
    if len(data) < 8 + 4 * rank:
        raise ValidationError("tensor dimension header truncated")
    dims = struct.unpack(f"<{rank}I", data[8:8 + 4 * rank])
    if any(d < 1 for d in dims):
        raise ValidationError(f"tensor dimensions must be >= 1, got {dims}")
    expected = int(np.prod(dims)) * 4
    payload = data[8 + 4 * rank:]
    if len(payload) != expected:
        raise ValidationError(
            f"tensor payload is {len(payload)} bytes, expected {expected} for shape {dims}")
    arr = np.frombuffer(payload, dtype="<f4").reshape(dims).copy()
    if not np.all(np.isfinite(arr)):
        raise ValidationError("tensor contains non-finite values")
    return arr


# ---------------------------------------------------------------------------
# per-frame probability series CSV

def parse_probability_series(text: str, video_id: str = "") -> ProbabilitySeries:
    """Parse a probability CSV: '#fps=<v>' sidecar line, header, one row per frame.

    Rows are validated, never renormalized.
    """
    lines = text.splitlines()
    if not lines or not lines[0].startswith("#fps="):
        raise ParseError(1, "first line must be '#fps=<value>'")
    try:
        fps = float(lines[0][len("#fps="):])
    except ValueError:
        raise ParseError(1, f"invalid fps value {lines[0][5:]!r}") from None
    if len(lines) < 2:
        raise ParseError(2, "missing header line")
    header = lines[1].split(",")
    if header[0] != "frame_index" or len(header) < 2:
        raise ParseError(2, "header must be 'frame_index,<class_0>,...'")
    class_names = tuple(header[1:])
    rows: list[list[float]] = []
    for lineno, line in enumerate(lines[2:], start=3):
        if not line.strip():
            continue
        cells = line.split(",")
        if len(cells) != len(header):
            raise ParseError(lineno, f"expected {len(header)} cells, got {len(cells)}")
        try:
            idx = int(cells[0])
            values = [float(c) for c in cells[1:]]
        except ValueError:
            raise ParseError(lineno, "invalid number") from None
        if idx != len(rows):
            raise ParseError(lineno, f"frame_index {idx} out of order, expected {len(rows)}")
        rows.append(values)
    if not rows:
        raise ValidationError("probability series must contain at least one frame")
    return ProbabilitySeries(video_id=video_id, fps=fps,
                             probs=np.asarray(rows, dtype=np.float64),
                             class_names=class_names)


def write_probability_series(series: ProbabilitySeries) -> str:
    out = [f"#fps={series.fps!r}"]
    out.append(",".join(("frame_index",) + series.class_names))
    for t in range(series.n_frames):
        out.append(str(t) + "," + ",".join(repr(float(x)) for x in series.probs[t]))
    return "".join(line + "\n" for line in out)


# ---------------------------------------------------------------------------
# segments CSV (detections and ground truth)

_SEGMENT_HEADER = "video_id,class,start_s,end_s,score"


def write_segments(segments: Iterable[Segment]) -> str:
    """Serialize segments sorted by (video_id, start), 6 decimal places."""
    ordered = sorted(segments,
                     key=lambda s: (s.video_id, s.start_s, s.end_s, s.class_label, s.score))
    out = [_SEGMENT_HEADER]
    for seg in ordered:
        out.append(f"{seg.video_id},{seg.class_label},"
                   f"{seg.start_s:.6f},{seg.end_s:.6f},{seg.score:.6f}")
    return "".join(line + "\n" for line in out)


def parse_segments(text: str) -> list[Segment]:
    lines = text.splitlines()
    if not lines or lines[0] != _SEGMENT_HEADER:
        raise ParseError(1, f"header must be {_SEGMENT_HEADER!r}")
    segments = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        cells = line.split(",")
        if len(cells) != 5:
            raise ParseError(lineno, f"expected 5 cells, got {len(cells)}")
        try:
            seg = Segment(video_id=cells[0], class_label=cells[1],
                          start_s=float(cells[2]), end_s=float(cells[3]),
                          score=float(cells[4]))
        except (ValueError, ValidationError) as exc:
            raise ParseError(lineno, str(exc)) from None
        segments.append(seg)
    return segments


# ---------------------------------------------------------------------------
# relevance tables emitted by the filter pipeline

_RELEVANCE_HEADER = "id,class,relevance,kept"


def write_relevance_table(samples: SampleSet, relevance, kept_mask) -> str:
    relevance = np.asarray(relevance, dtype=np.float64)
    kept_mask = np.asarray(kept_mask, dtype=bool)
    if len(samples) != relevance.shape[0] or len(samples) != kept_mask.shape[0]:
        raise ValidationError("relevance table inputs must have one entry per sample")
    out = [_RELEVANCE_HEADER]
    for rec, score, kept in zip(samples, relevance, kept_mask):
        _check_csv_cell(rec.id)
        _check_csv_cell(rec.class_label)
        out.append(f"{rec.id},{rec.class_label},{float(score)!r},{int(kept)}")
    return "".join(line + "\n" for line in out)


def parse_relevance_table(text: str) -> dict[str, tuple[str, float, bool]]:
    """Return {id: (class_label, relevance, kept)}."""
    lines = text.splitlines()
    if not lines or lines[0] != _RELEVANCE_HEADER:
        raise ParseError(1, f"header must be {_RELEVANCE_HEADER!r}")
    table: dict[str, tuple[str, float, bool]] = {}
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        cells = line.split(",")
        if len(cells) != 4:
            raise ParseError(lineno, f"expected 4 cells, got {len(cells)}")
        if cells[0] in table:
            raise ParseError(lineno, f"duplicate id {cells[0]!r}")
        try:
            table[cells[0]] = (cells[1], float(cells[2]), bool(int(cells[3])))
        except ValueError:
            raise ParseError(lineno, "invalid number") from None
    return table


# ---------------------------------------------------------------------------
# video-level class scores (classification / fusion output)

def write_video_scores(rows: Sequence[tuple[str, str, bool, float, np.ndarray]],
                       class_names: Sequence[str]) -> str:
    """Rows are (video_id, label, tie, score, per-class probabilities)."""
    header = "video_id,label,tie,score," + ",".join(
        _check_csv_cell(c) for c in class_names)
    out = [header]
    for video_id, label, tie, score, probs in sorted(rows, key=lambda r: r[0]):
        probs = np.asarray(probs, dtype=np.float64)
        if probs.shape[0] != len(class_names):
            raise ValidationError(f"video {video_id!r}: score row width mismatch")
        cells = [_check_csv_cell(video_id), _check_csv_cell(label),
                 str(int(tie)), repr(float(score))]
        cells.extend(repr(float(x)) for x in probs)
        out.append(",".join(cells))
    return "".join(line + "\n" for line in out)


def parse_video_scores(text: str) -> tuple[tuple[str, ...],
                                           list[tuple[str, str, bool, float, np.ndarray]]]:
    lines = text.splitlines()
    if not lines or not lines[0].startswith("video_id,label,tie,score,"):
        raise ParseError(1, "header must be 'video_id,label,tie,score,<class_0>,...'")
    class_names = tuple(lines[0].split(",")[4:])
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        cells = line.split(",")
        if len(cells) != 4 + len(class_names):
            raise ParseError(lineno, f"expected {4 + len(class_names)} cells, got {len(cells)}")
        try:
            rows.append((cells[0], cells[1], bool(int(cells[2])), float(cells[3]),
                         np.asarray([float(c) for c in cells[4:]], dtype=np.float64)))
        except ValueError:
            raise ParseError(lineno, "invalid number") from None
    return class_names, rows


def parse_video_labels(text: str) -> dict[str, set[str]]:
    """Parse a 'video_id,class' truth CSV; repeated ids accumulate labels."""
    lines = text.splitlines()
    if not lines or lines[0] != "video_id,class":
        raise ParseError(1, "header must be 'video_id,class'")
    labels: dict[str, set[str]] = {}
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        cells = line.split(",")
        if len(cells) != 2 or not cells[0] or not cells[1]:
            raise ParseError(lineno, "expected 'video_id,class'")
        labels.setdefault(cells[0], set()).add(cells[1])
    return labels


def parse_confidence_table(text: str) -> dict[str, float]:
    """Parse an 'id,confidence' CSV of external classifier scores."""
    lines = text.splitlines()
    if not lines or lines[0] != "id,confidence":
        raise ParseError(1, "header must be 'id,confidence'")
    table: dict[str, float] = {}
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        cells = line.split(",")
        if len(cells) != 2:
            raise ParseError(lineno, "expected 'id,confidence'")
        if cells[0] in table:
            raise ParseError(lineno, f"duplicate id {cells[0]!r}")
        try:
            value = float(cells[1])
        except ValueError:
            raise ParseError(lineno, "invalid confidence") from None
        if not np.isfinite(value):
            raise ParseError(lineno, "confidence must be finite")
        table[cells[0]] = value
    return table


# ---------------------------------------------------------------------------
# metric reports

def _check_csv_cell(text: str) -> str:
    if "," in text or "\n" in text or "\r" in text:
        raise ValidationError(f"value {text!r} cannot be a CSV cell")
    return text


def write_report(columns: Sequence[str], rows: Sequence[Sequence]) -> str:
    """Generic CSV report; floats rendered at 6 decimal places."""
    out = [",".join(_check_csv_cell(c) for c in columns)]
    for row in rows:
        if len(row) != len(columns):
            raise ValidationError(f"report row has {len(row)} cells for {len(columns)} columns")
        cells = []
        for value in row:
            if isinstance(value, bool):
                cells.append(str(int(value)))
            elif isinstance(value, float):
                cells.append(f"{value:.6f}")
            else:
                cells.append(_check_csv_cell(str(value)))
        out.append(",".join(cells))
    return "".join(line + "\n" for line in out)


def write_pr_curve(points) -> str:
    """PR sweep as CSV with columns cutoff, precision, recall."""
    out = ["cutoff,precision,recall"]
    for pt in points:
        cutoff = pt.cutoff
        cell = f"{cutoff:.6f}" if isinstance(cutoff, float) else str(cutoff)
        out.append(f"{cell},{pt.precision:.6f},{pt.recall:.6f}")
    return "".join(line + "\n" for line in out)


def render_pr_curve_svg(points, width: int = 480, height: int = 360) -> str:
    """Minimal standalone SVG rendering of a precision-recall sweep."""
    pad = 40.0
    span_x = width - 2 * pad
    span_y = height - 2 * pad

    def xy(recall: float, precision: float) -> tuple[float, float]:
        return pad + recall * span_x, height - pad - precision * span_y

    coords = [xy(pt.recall, pt.precision) for pt in points]
    poly = " ".join(f"{x:.1f},{y:.1f}" for x, y in coords)
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" y2="{height - pad}" '
        'stroke="black"/>',
        f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height - pad}" stroke="black"/>',
        f'<text x="{width / 2:.1f}" y="{height - 8}" text-anchor="middle" '
        'font-size="12">recall</text>',
        f'<text x="12" y="{height / 2:.1f}" text-anchor="middle" font-size="12" '
        f'transform="rotate(-90 12 {height / 2:.1f})">precision</text>',
    ]
    if poly:
        parts.append(f'<polyline points="{poly}" fill="none" stroke="steelblue" '
                     'stroke-width="1.5"/>')
    parts.append("</svg>")
    return "".join(part + "\n" for part in parts)
