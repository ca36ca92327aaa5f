"""Synthetic benchmarks for the filtering pipeline.

Gaussian clusters stand in for real image features: inliers around the origin,
a distractor pool at a configurable separation along the first axis. The noise
sweep corrupts the inlier set at several noise levels, runs the whole
graph/walk/filter pipeline and reports a precision-recall sweep per level.
The bias demo contrasts walk-relevance filtering with confidence filtering on
the same samples, measuring how far the two kept sets diverge.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from . import io
from .assembly import inject_noise
from .errors import ValidationError
from .graph import pairwise_distances, transition_matrix
from .metrics import PRPoint, pr_curve
from .records import SampleRecord, SampleSet, Source
from .walk import class_relevance, filter_threshold, filter_top_k, relevance_scores

NOISE_LEVELS = (0.01, 0.02, 0.03, 0.04, 0.05, 0.10, 0.15, 0.20)

DEFAULT_N_INLIERS = 200
DEFAULT_OUTLIER_POOL = 60
DEFAULT_DIM = 64
DEFAULT_SEPARATION = 10.0
DEFAULT_SIGMA = 0.5


def generate_clusters(n_inliers: int = DEFAULT_N_INLIERS,
                      n_outlier_pool: int = DEFAULT_OUTLIER_POOL,
                      d: int = DEFAULT_DIM,
                      separation: float = DEFAULT_SEPARATION,
                      sigma: float = DEFAULT_SIGMA,
                      seed: int = 0) -> tuple[np.ndarray, SampleSet]:
    """Two isotropic Gaussian clusters: inliers at the origin, a distractor
    pool offset by ``separation`` along the first axis.

    Returns the stacked feature matrix and a SampleSet whose classes are
    ``inlier`` (rows 0..n_inliers-1) and ``distractor`` (the rest).
    Deterministic for a given seed.
    """
    if d < 1:
        raise ValidationError(f"feature dimension must be >= 1, got {d}")
    if n_inliers < 1 or n_outlier_pool < 0:
        raise ValidationError("cluster sizes must be positive")
    if sigma <= 0 or separation < 0:
        raise ValidationError("sigma must be positive and separation nonnegative")
    rng = np.random.default_rng(seed)
    inliers = rng.normal(0.0, sigma, size=(n_inliers, d))
    center = np.zeros(d)
    center[0] = separation
    outliers = center + rng.normal(0.0, sigma, size=(n_outlier_pool, d))
    features = np.vstack([inliers, outliers])
    records = [SampleRecord(f"in{i:05d}", "inlier", Source.OTHER, i)
               for i in range(n_inliers)]
    records += [SampleRecord(f"out{i:05d}", "distractor", Source.OTHER, n_inliers + i)
                for i in range(n_outlier_pool)]
    return features, SampleSet(tuple(records))


@dataclass(frozen=True)
class NoiseSweepLevel:
    """Precision-recall sweep of one noise level, with its summary points."""

    noise_fraction: float
    n_clean: int
    n_injected: int
    points: tuple[PRPoint, ...]
    matched: PRPoint        # the point with k = n_clean
    best: PRPoint           # max-F1 point of the sweep (first on ties)

    @property
    def max_recall_at_full_precision(self) -> float:
        candidates = [p.recall for p in self.points if p.precision == 1.0]
        return max(candidates) if candidates else 0.0


def _sweep_one_level(features, samples, level: float, seed: int, *,
                     beta: float, gamma: float, self_loops: bool) -> NoiseSweepLevel:
    clean_idx = samples.indices_for_class("inlier")
    pool_idx = samples.indices_for_class("distractor")
    bench = inject_noise(samples.subset(clean_idx), samples.subset(pool_idx),
                         level, seed=seed)
    rows = bench.samples.feature_rows()
    dist = pairwise_distances(features[rows])
    P = transition_matrix(dist, gamma=gamma, self_loops=self_loops)
    result = relevance_scores(P, beta=beta)
    n = len(bench.samples)
    points = pr_curve(result, bench.inlier_mask, top_k=range(1, n + 1))
    n_clean = int(clean_idx.shape[0])
    matched = points[n_clean - 1]
    best = max(points, key=lambda p: p.f1)
    return NoiseSweepLevel(noise_fraction=level, n_clean=n_clean,
                           n_injected=n - n_clean, points=tuple(points),
                           matched=matched, best=best)


def run_noise_sweep(n_inliers: int = DEFAULT_N_INLIERS,
                    n_outlier_pool: int = DEFAULT_OUTLIER_POOL,
                    d: int = DEFAULT_DIM,
                    separation: float = DEFAULT_SEPARATION,
                    sigma: float = DEFAULT_SIGMA,
                    noise_levels: Sequence[float] = NOISE_LEVELS,
                    seed: int = 0, *, beta: float = 0.99, gamma: float = 0.01,
                    self_loops: bool = False, threads: int = 1,
                    out_dir: Path | None = None,
                    svg: bool = False) -> list[NoiseSweepLevel]:
    """Run the filtering benchmark across noise levels.

    Per level: inject distractors, build the graph, converge relevance and
    sweep every top-k cutoff into a PR curve. Levels run independently (up to
    ``threads`` in parallel) and are returned in the given order. When
    ``out_dir`` is set, one PR CSV per level plus a summary.csv are written.
    """
    if not noise_levels:
        raise ValidationError("need at least one noise level")
    features, samples = generate_clusters(n_inliers, n_outlier_pool, d,
                                          separation, sigma, seed)

    def job(i_level):
        i, level = i_level
        return _sweep_one_level(features, samples, level, seed=seed + i + 1,
                                beta=beta, gamma=gamma, self_loops=self_loops)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            levels = list(pool.map(job, enumerate(noise_levels)))
    else:
        levels = [job(pair) for pair in enumerate(noise_levels)]

    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        summary_rows = []
        for lvl in levels:
            stem = f"noise_{lvl.noise_fraction * 100:g}pct"
            (out_dir / f"{stem}.csv").write_text(io.write_pr_curve(lvl.points),
                                                 encoding="utf-8")
            if svg:
                (out_dir / f"{stem}.svg").write_text(
                    io.render_pr_curve_svg(lvl.points), encoding="utf-8")
            summary_rows.append((
                f"{lvl.noise_fraction:g}", lvl.n_clean, lvl.n_injected,
                lvl.matched.precision, lvl.matched.recall,
                int(lvl.best.cutoff), lvl.best.f1,
                lvl.max_recall_at_full_precision,
            ))
        summary = io.write_report(
            ("noise_fraction", "n_clean", "n_injected", "matched_precision",
             "matched_recall", "best_f1_k", "best_f1",
             "max_recall_at_full_precision"),
            summary_rows)
        (out_dir / "summary.csv").write_text(summary, encoding="utf-8")
    return levels


@dataclass(frozen=True)
class BiasClassRow:
    """Kept-set comparison between walk filtering and confidence filtering."""

    class_label: str
    n: int
    kept_walk: int
    kept_confidence: int
    overlap: int
    jaccard: float


def run_filter_bias_demo(samples: SampleSet, features, confidences, *,
                         top_k: int | None = None, threshold: float | None = None,
                         beta: float = 0.99, gamma: float = 0.01,
                         self_loops: bool = False) -> list[BiasClassRow]:
    """Compare independent (walk) and supervised (confidence) kept sets.

    The same policy is applied per class to both score sources; the report
    rows measure how far the selections diverge, sorted by class with an
    overall row appended last.
    """
    confidences = np.asarray(confidences, dtype=np.float64)
    if confidences.shape != (len(samples),):
        raise ValidationError(
            f"confidence shape {confidences.shape} does not match {len(samples)} samples")
    if not np.all(np.isfinite(confidences)):
        raise ValidationError("confidences contain non-finite values")
    if (top_k is None) == (threshold is None):
        raise ValidationError("provide exactly one of top_k or threshold")
    relevance = class_relevance(samples, features, beta=beta, gamma=gamma,
                                self_loops=self_loops)
    rows = []
    total_walk: set[str] = set()
    total_conf: set[str] = set()
    for label in samples.class_labels:
        idx = samples.indices_for_class(label)
        if top_k is not None:
            walk = filter_top_k(relevance[idx], top_k)
            conf = filter_top_k(confidences[idx], top_k)
        else:
            walk = filter_threshold(relevance[idx], threshold)
            conf = filter_threshold(confidences[idx], threshold)
        kept_walk = {samples[int(idx[i])].id for i in walk.kept}
        kept_conf = {samples[int(idx[i])].id for i in conf.kept}
        union = kept_walk | kept_conf
        inter = kept_walk & kept_conf
        rows.append(BiasClassRow(
            class_label=label, n=int(idx.shape[0]),
            kept_walk=len(kept_walk), kept_confidence=len(kept_conf),
            overlap=len(inter),
            jaccard=len(inter) / len(union) if union else 1.0,
        ))
        total_walk |= kept_walk
        total_conf |= kept_conf
    union = total_walk | total_conf
    inter = total_walk & total_conf
    rows.append(BiasClassRow(
        class_label="(all)", n=len(samples),
        kept_walk=len(total_walk), kept_confidence=len(total_conf),
        overlap=len(inter),
        jaccard=len(inter) / len(union) if union else 1.0,
    ))
    return rows
