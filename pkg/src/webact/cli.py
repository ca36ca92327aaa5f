"""Command-line entry point.

Every subcommand reads and writes plain files, never mutates its inputs, and
echoes its effective configuration (all parameters including defaults and
seeds) to a JSON sidecar so any output can be reproduced from the sidecar
alone. Outputs are byte-identical across reruns with identical inputs.

Exit codes: 0 success, 1 validation error, 2 usage error. Every flag can also
be set through an environment variable prefixed WEBACT_<COMMAND>_.
"""
from __future__ import annotations

import functools
import json
import sys
from pathlib import Path

import click
import numpy as np

from . import bench as bench_mod
from . import io
from .assembly import MixQuota, QuotaBucket, mix_sources, split_train_val
from .errors import ValidationError
from .fusion import ProbabilityVector, fuse_product, predict_label, temporal_average
from .localization import (LocalizationConfig, localize_frame_by_frame,
                           localize_sliding_window)
from .metrics import (accuracy, classification_ap, classification_map,
                      detection_map, per_class_detection_ap)
from .records import Source, check_feature_rows
from .walk import filter_sample_set

_CONTEXT = {
    "auto_envvar_prefix": "WEBACT",
    "help_option_names": ["-h", "--help"],
}


def _fail(message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(1)


def _validation_errors(func):
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except ValidationError as exc:
            _fail(str(exc))
        except OSError as exc:
            _fail(f"i/o failure: {exc}")
    return wrapper


def _write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(text.encode("utf-8"))


def _write_config(anchor: Path, command: str, params: dict) -> None:
    """Sidecar with the effective configuration of one run.

    ``anchor`` is the primary output file (sidecar appends .config.json) or an
    output directory (sidecar is config.json inside it).
    """
    if anchor.is_dir():
        target = anchor / "config.json"
    else:
        target = anchor.with_name(anchor.name + ".config.json")
    payload = {"command": command,
               "params": {k: (str(v) if isinstance(v, Path) else v)
                          for k, v in params.items()}}
    _write_text(target, json.dumps(payload, sort_keys=True, indent=2) + "\n")


def _read_manifest(path: Path):
    return io.parse_manifest(path.read_text(encoding="utf-8"))


def _read_series(path: Path):
    return io.parse_probability_series(path.read_text(encoding="utf-8"),
                                       video_id=path.stem)


_in_file = click.Path(exists=True, dir_okay=False, path_type=Path)
_out_file = click.Path(dir_okay=False, path_type=Path)


@click.group(context_settings=_CONTEXT, no_args_is_help=True)
@click.option("--threads", type=click.IntRange(min=1), default=1, show_default=True,
              help="Upper bound on worker threads; results never depend on it.")
@click.pass_context
def main(ctx, threads):
    """Webly-collected action dataset curation and evaluation toolkit."""
    ctx.obj = {"threads": threads}


@main.command("filter")
@click.option("--manifest", required=True, type=_in_file,
              help="Sample manifest (.jsonl).")
@click.option("--features", "features_path", required=True, type=_in_file,
              help="Feature matrix (WFEA binary or CSV).")
@click.option("--out-manifest", required=True, type=_out_file,
              help="Kept samples, input order preserved.")
@click.option("--out-relevance", required=True, type=_out_file,
              help="Per-sample relevance CSV (id,class,relevance,kept).")
@click.option("--beta", default=0.99, show_default=True,
              help="Walk weight versus uniform restart.")
@click.option("--gamma", default=0.01, show_default=True,
              help="Affinity decay rate with feature distance.")
@click.option("--tol", default=1e-10, show_default=True)
@click.option("--max-iter", default=1000, show_default=True)
@click.option("--top-k", type=int, default=None,
              help="Keep the k most relevant samples per class [default: 450 "
                   "unless --threshold is given].")
@click.option("--threshold", type=float, default=None,
              help="Keep samples with relevance >= threshold.")
@click.option("--self-loops/--no-self-loops", default=False, show_default=True)
@_validation_errors
def filter_cmd(manifest, features_path, out_manifest, out_relevance, beta, gamma,
               tol, max_iter, top_k, threshold, self_loops):
    """Random-walk filter a manifest into a kept manifest plus relevance CSV."""
    if top_k is not None and threshold is not None:
        raise click.UsageError("give at most one of --top-k / --threshold")
    if top_k is None and threshold is None:
        top_k = 450
    samples = _read_manifest(manifest)
    features = io.parse_feature_matrix(features_path.read_bytes())
    check_feature_rows(samples, features.shape[0])
    relevance, kept = filter_sample_set(
        samples, features, beta=beta, gamma=gamma, top_k=top_k,
        threshold=threshold, self_loops=self_loops, tol=tol, max_iter=max_iter)
    kept_set = samples.subset(np.flatnonzero(kept))
    _write_text(out_manifest, io.write_manifest(kept_set))
    _write_text(out_relevance, io.write_relevance_table(samples, relevance, kept))
    _write_config(out_manifest, "filter", {
        "manifest": manifest, "features": features_path,
        "out_manifest": out_manifest, "out_relevance": out_relevance,
        "beta": beta, "gamma": gamma, "tol": tol, "max_iter": max_iter,
        "top_k": top_k, "threshold": threshold, "self_loops": self_loops,
    })
    click.echo(f"kept {len(kept_set)} of {len(samples)} samples")


def _build_quota(quota_opts, bucket_opts) -> MixQuota:
    buckets = {b.name: [list(b.sources), b.count]
               for b in MixQuota.default().buckets}
    order = list(buckets)
    for spec in bucket_opts:
        name, _, source_list = spec.partition("=")
        if not source_list:
            raise click.UsageError(f"--bucket needs NAME=source[,source...], got {spec!r}")
        try:
            sources = [Source(s) for s in source_list.split(",")]
        except ValueError as exc:
            raise click.UsageError(str(exc))
        if name not in buckets:
            buckets[name] = [sources, 0]
            order.append(name)
        else:
            buckets[name][0] = sources
    for spec in quota_opts:
        name, _, count = spec.partition("=")
        if name not in buckets:
            raise click.UsageError(
                f"unknown quota bucket {name!r}; define it with --bucket first")
        try:
            buckets[name][1] = int(count)
        except ValueError:
            raise click.UsageError(f"--quota needs NAME=COUNT, got {spec!r}")
    return MixQuota(tuple(QuotaBucket(name, tuple(buckets[name][0]), buckets[name][1])
                          for name in order))


@main.command("mix")
@click.option("--manifest", "manifests", required=True, multiple=True, type=_in_file,
              help="Filtered manifest; repeat per source.")
@click.option("--relevance", "relevances", required=True, multiple=True, type=_in_file,
              help="Relevance CSV paired with each --manifest, in order.")
@click.option("--quota", "quota_opts", multiple=True,
              help="Override a bucket count, NAME=COUNT. Defaults: "
                   "web_images=400, video_frames=500, gif_frames=100.")
@click.option("--bucket", "bucket_opts", multiple=True,
              help="Redefine or add a bucket's sources, NAME=source[,source...].")
@click.option("--allow-short", is_flag=True, default=False,
              help="Accept buckets with fewer samples than their quota.")
@click.option("--out", required=True, type=_out_file)
@_validation_errors
def mix_cmd(manifests, relevances, quota_opts, bucket_opts, allow_short, out):
    """Mix filtered per-source manifests into a training manifest under quotas."""
    if len(manifests) != len(relevances):
        raise click.UsageError("--manifest and --relevance counts must match")
    quota = _build_quota(quota_opts, bucket_opts)
    parts = []
    for mpath, rpath in zip(manifests, relevances):
        samples = _read_manifest(mpath)
        table = io.parse_relevance_table(rpath.read_text(encoding="utf-8"))
        missing = [rec.id for rec in samples if rec.id not in table]
        if missing:
            raise ValidationError(
                f"{rpath}: no relevance for id(s) {missing[:3]}"
                + ("..." if len(missing) > 3 else ""))
        scores = np.array([table[rec.id][1] for rec in samples])
        parts.append((samples, scores))
    mixed = mix_sources(parts, quota, allow_short=allow_short)
    _write_text(out, io.write_manifest(mixed))
    _write_config(out, "mix", {
        "manifests": [str(p) for p in manifests],
        "relevances": [str(p) for p in relevances],
        "quota": {b.name: b.count for b in quota.buckets},
        "bucket_sources": {b.name: [s.value for s in b.sources] for b in quota.buckets},
        "allow_short": allow_short, "out": out,
    })
    click.echo(f"mixed {len(mixed)} samples")


@main.command("split")
@click.option("--manifest", required=True, type=_in_file)
@click.option("--ratio", default=0.8, show_default=True,
              help="Training fraction per class.")
@click.option("--seed", default=0, show_default=True)
@click.option("--train-out", required=True, type=_out_file)
@click.option("--val-out", required=True, type=_out_file)
@_validation_errors
def split_cmd(manifest, ratio, seed, train_out, val_out):
    """Stratified train/validation split of a manifest."""
    samples = _read_manifest(manifest)
    train, val = split_train_val(samples, ratio, seed)
    _write_text(train_out, io.write_manifest(train))
    _write_text(val_out, io.write_manifest(val))
    _write_config(train_out, "split", {
        "manifest": manifest, "ratio": ratio, "seed": seed,
        "train_out": train_out, "val_out": val_out,
    })
    click.echo(f"train {len(train)} / val {len(val)}")


def _video_vectors(paths):
    """Per-stream video-level probability vectors, classes checked equal."""
    vectors = []
    names = None
    for path in paths:
        series = _read_series(path)
        if names is None:
            names = series.class_names
        elif series.class_names != names:
            raise ValidationError(
                f"{path}: class names {series.class_names} differ from {names}")
        vectors.append(temporal_average(series))
    return names, vectors


@main.command("fuse")
@click.option("--streams", required=True, multiple=True, type=_in_file,
              help="Probability CSVs of one video, one per stream (>= 2).")
@click.option("--fusion", type=click.Choice(["average", "product"]),
              default="average", show_default=True)
@click.option("--video-id", default=None,
              help="Video id for the output row [default: first stream's stem].")
@click.option("--out", required=True, type=_out_file)
@_validation_errors
def fuse_cmd(streams, fusion, video_id, out):
    """Fuse the video-level scores of several streams of one video."""
    if len(streams) < 2:
        raise click.UsageError("need at least two --streams")
    names, vectors = _video_vectors(streams)
    if fusion == "average":
        fused = ProbabilityVector(np.mean([v.p for v in vectors], axis=0), names)
    else:
        fused = vectors[0]
        for vec in vectors[1:]:
            fused = fuse_product(fused, vec)
    video_id = video_id or streams[0].stem
    pred = predict_label(fused)
    text = io.write_video_scores(
        [(video_id, pred.label, pred.tie, pred.probability, fused.p)], names)
    _write_text(out, text)
    _write_config(out, "fuse", {
        "streams": [str(p) for p in streams], "fusion": fusion,
        "video_id": video_id, "out": out,
    })
    click.echo(f"{video_id}: {pred.label} ({pred.probability:.4f})")


@main.command("classify")
@click.option("--series", "series_paths", required=True, multiple=True, type=_in_file,
              help="Probability CSV per video (trimmed or untrimmed).")
@click.option("--out", required=True, type=_out_file)
@_validation_errors
def classify_cmd(series_paths, out):
    """Label videos by temporally averaged probabilities."""
    names = None
    rows = []
    for path in series_paths:
        series = _read_series(path)
        if names is None:
            names = series.class_names
        elif series.class_names != names:
            raise ValidationError(
                f"{path}: class names {series.class_names} differ from {names}")
        vector = temporal_average(series)
        pred = predict_label(vector)
        rows.append((series.video_id, pred.label, pred.tie, pred.probability,
                     vector.p))
    _write_text(out, io.write_video_scores(rows, names))
    _write_config(out, "classify", {
        "series": [str(p) for p in series_paths], "out": out,
    })
    click.echo(f"classified {len(rows)} video(s)")


@main.command("localize")
@click.option("--series", "series_paths", required=True, multiple=True, type=_in_file)
@click.option("--mode", type=click.Choice(["frames", "window"]), default="frames",
              show_default=True)
@click.option("--threshold", type=float, default=None,
              help="Per-frame probability threshold (frames mode, required).")
@click.option("--min-duration", default=0.1, show_default=True,
              help="Segments must be strictly longer than this many seconds.")
@click.option("--gap-frames", default=0, show_default=True,
              help="Non-qualifying frames a run may bridge (frames mode).")
@click.option("--window", type=float, default=None, help="Window length, seconds.")
@click.option("--stride", type=float, default=None, help="Window stride, seconds.")
@click.option("--merge/--no-merge", default=False, show_default=True,
              help="Merge overlapping same-class windows (window mode).")
@click.option("--out", required=True, type=_out_file)
@_validation_errors
def localize_cmd(series_paths, mode, threshold, min_duration, gap_frames,
                 window, stride, merge, out):
    """Localize actions in untrimmed probability series; emit a segments CSV."""
    if mode == "frames":
        if threshold is None:
            raise click.UsageError("frames mode requires --threshold")
        cfg = LocalizationConfig(prob_threshold=threshold,
                                 min_duration_s=min_duration,
                                 gap_frames=gap_frames)
    else:
        if window is None or stride is None:
            raise click.UsageError("window mode requires --window and --stride")
        cfg = LocalizationConfig(prob_threshold=0.0, min_duration_s=min_duration,
                                 window_s=window, stride_s=stride,
                                 merge_overlaps=merge)
    segments = []
    for path in series_paths:
        series = _read_series(path)
        if mode == "frames":
            segments.extend(localize_frame_by_frame(series, cfg))
        else:
            segments.extend(localize_sliding_window(series, cfg))
    _write_text(out, io.write_segments(segments))
    _write_config(out, "localize", {
        "series": [str(p) for p in series_paths], "mode": mode,
        "threshold": threshold, "min_duration": min_duration,
        "gap_frames": gap_frames, "window": window, "stride": stride,
        "merge": merge, "out": out,
    })
    click.echo(f"{len(segments)} segment(s)")


@main.command("eval-acc")
@click.option("--predictions", required=True, type=_in_file,
              help="Video scores CSV (classify/fuse output).")
@click.option("--truth", required=True, type=_in_file,
              help="Ground truth CSV: video_id,class.")
@click.option("--out", required=True, type=_out_file)
@_validation_errors
def eval_acc_cmd(predictions, truth, out):
    """Classification accuracy of predicted video labels (single-label truth)."""
    _, rows = io.parse_video_scores(predictions.read_text(encoding="utf-8"))
    labels = io.parse_video_labels(truth.read_text(encoding="utf-8"))
    pairs = []
    for video_id, label, _tie, _score, _probs in rows:
        if video_id not in labels:
            raise ValidationError(f"no ground truth for video {video_id!r}")
        if len(labels[video_id]) != 1:
            raise ValidationError(
                f"video {video_id!r} has several truth labels; accuracy needs "
                "single-label truth (use eval-map for multi-label sets)")
        (actual,) = labels[video_id]
        pairs.append((label, actual))
    value = accuracy(pairs)
    correct = sum(1 for p, a in pairs if p == a)
    _write_text(out, io.write_report(("n", "correct", "accuracy"),
                                     [(len(pairs), correct, value)]))
    _write_config(out, "eval-acc", {
        "predictions": predictions, "truth": truth, "out": out,
    })
    click.echo(f"accuracy {value:.6f}")


@main.command("eval-map")
@click.option("--scores", required=True, type=_in_file,
              help="Video scores CSV (classify output over the test set).")
@click.option("--truth", required=True, type=_in_file,
              help="Ground truth CSV: video_id,class (repeat ids for multi-label).")
@click.option("--out", required=True, type=_out_file)
@_validation_errors
def eval_map_cmd(scores, truth, out):
    """Untrimmed classification mAP over score-ranked videos."""
    names, rows = io.parse_video_scores(scores.read_text(encoding="utf-8"))
    labels = io.parse_video_labels(truth.read_text(encoding="utf-8"))
    truth_classes = {label for label_set in labels.values() for label in label_set}
    missing = truth_classes - set(names)
    if missing:
        raise ValidationError(f"truth classes absent from scores: {sorted(missing)}")
    evaluated = sorted(truth_classes)
    if not evaluated:
        raise ValidationError("truth file contains no labels")
    class_scores = {}
    for ci, name in enumerate(names):
        if name not in truth_classes:
            continue
        pairs = []
        for video_id, _label, _tie, _score, probs in rows:
            if video_id not in labels:
                raise ValidationError(f"no ground truth for video {video_id!r}")
            pairs.append((float(probs[ci]), name in labels[video_id]))
        class_scores[name] = pairs
    value = classification_map(class_scores)
    report_rows = [("mAP", value)]
    report_rows += [(name, classification_ap(class_scores[name]))
                    for name in evaluated]
    _write_text(out, io.write_report(("name", "ap"), report_rows))
    _write_config(out, "eval-map", {"scores": scores, "truth": truth, "out": out})
    click.echo(f"mAP {value:.6f}")


def _parse_thresholds(text: str) -> tuple[float, ...]:
    try:
        values = tuple(float(cell) for cell in text.split(","))
    except ValueError:
        raise click.UsageError(f"bad --iou-thresholds {text!r}")
    if not values:
        raise click.UsageError("need at least one IoU threshold")
    return values


@main.command("eval-detect")
@click.option("--detections", required=True, type=_in_file,
              help="Predicted segments CSV (localize output).")
@click.option("--truth", required=True, type=_in_file,
              help="Ground-truth segments CSV.")
@click.option("--iou-thresholds", default="0.1,0.2,0.3,0.4,0.5", show_default=True)
@click.option("--label", default="detections", show_default=True,
              help="Row label of the emitted table.")
@click.option("--per-class-out", type=_out_file, default=None,
              help="Optional per-class AP table.")
@click.option("--out", required=True, type=_out_file)
@_validation_errors
def eval_detect_cmd(detections, truth, iou_thresholds, label, per_class_out, out):
    """Detection mAP table over overlap ratios (one row per run)."""
    thresholds = _parse_thresholds(iou_thresholds)
    dets = io.parse_segments(detections.read_text(encoding="utf-8"))
    gts = io.parse_segments(truth.read_text(encoding="utf-8"))
    table = detection_map(dets, gts, thresholds)
    columns = ("method",) + tuple(f"{t:g}" for t in thresholds)
    _write_text(out, io.write_report(columns,
                                     [(label,) + tuple(table[float(t)] for t in thresholds)]))
    if per_class_out is not None:
        per_class = {t: per_class_detection_ap(dets, gts, t) for t in thresholds}
        classes = sorted({g.class_label for g in gts})
        rows = [(name,) + tuple(per_class[t][name] for t in thresholds)
                for name in classes]
        _write_text(per_class_out, io.write_report(("class",) + columns[1:], rows))
    _write_config(out, "eval-detect", {
        "detections": detections, "truth": truth,
        "iou_thresholds": list(thresholds), "label": label,
        "per_class_out": per_class_out, "out": out,
    })
    click.echo(" ".join(f"{t:g}:{table[float(t)]:.4f}" for t in thresholds))


@main.command("bench-noise")
@click.option("--n-inliers", default=bench_mod.DEFAULT_N_INLIERS, show_default=True)
@click.option("--outlier-pool", default=bench_mod.DEFAULT_OUTLIER_POOL,
              show_default=True)
@click.option("--dim", default=bench_mod.DEFAULT_DIM, show_default=True)
@click.option("--separation", default=bench_mod.DEFAULT_SEPARATION, show_default=True)
@click.option("--sigma", default=bench_mod.DEFAULT_SIGMA, show_default=True)
@click.option("--noise-levels", default="0.01,0.02,0.03,0.04,0.05,0.10,0.15,0.20",
              show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--beta", default=0.99, show_default=True)
@click.option("--gamma", default=0.01, show_default=True)
@click.option("--self-loops/--no-self-loops", default=False, show_default=True)
@click.option("--svg", is_flag=True, default=False, help="Also render PR curves as SVG.")
@click.option("--out-dir", required=True,
              type=click.Path(file_okay=False, path_type=Path))
@click.pass_context
@_validation_errors
def bench_noise_cmd(ctx, n_inliers, outlier_pool, dim, separation, sigma,
                    noise_levels, seed, beta, gamma, self_loops, svg, out_dir):
    """Noise-injection filtering benchmark on synthetic clusters."""
    levels = _parse_thresholds(noise_levels)
    bench_mod.run_noise_sweep(
        n_inliers=n_inliers, n_outlier_pool=outlier_pool, d=dim,
        separation=separation, sigma=sigma, noise_levels=levels, seed=seed,
        beta=beta, gamma=gamma, self_loops=self_loops,
        threads=ctx.obj["threads"], out_dir=out_dir, svg=svg)
    _write_config(out_dir, "bench-noise", {
        "n_inliers": n_inliers, "outlier_pool": outlier_pool, "dim": dim,
        "separation": separation, "sigma": sigma,
        "noise_levels": list(levels), "seed": seed, "beta": beta,
        "gamma": gamma, "self_loops": self_loops, "svg": svg,
        "out_dir": out_dir, "threads": ctx.obj["threads"],
    })
    click.echo(f"wrote {len(levels)} level(s) to {out_dir}")


@main.command("bench-bias")
@click.option("--manifest", required=True, type=_in_file)
@click.option("--features", "features_path", required=True, type=_in_file)
@click.option("--confidences", required=True, type=_in_file,
              help="External classifier scores CSV: id,confidence.")
@click.option("--top-k", type=int, default=None)
@click.option("--threshold", type=float, default=None)
@click.option("--beta", default=0.99, show_default=True)
@click.option("--gamma", default=0.01, show_default=True)
@click.option("--self-loops/--no-self-loops", default=False, show_default=True)
@click.option("--out", required=True, type=_out_file)
@_validation_errors
def bench_bias_cmd(manifest, features_path, confidences, top_k, threshold,
                   beta, gamma, self_loops, out):
    """Kept-set divergence between walk filtering and confidence filtering."""
    if (top_k is None) == (threshold is None):
        raise click.UsageError("give exactly one of --top-k / --threshold")
    samples = _read_manifest(manifest)
    features = io.parse_feature_matrix(features_path.read_bytes())
    check_feature_rows(samples, features.shape[0])
    table = io.parse_confidence_table(confidences.read_text(encoding="utf-8"))
    missing = [rec.id for rec in samples if rec.id not in table]
    if missing:
        raise ValidationError(f"no confidence for id(s) {missing[:3]}"
                              + ("..." if len(missing) > 3 else ""))
    conf = np.array([table[rec.id] for rec in samples])
    rows = bench_mod.run_filter_bias_demo(
        samples, features, conf, top_k=top_k, threshold=threshold,
        beta=beta, gamma=gamma, self_loops=self_loops)
    _write_text(out, io.write_report(
        ("class", "n", "kept_walk", "kept_confidence", "overlap", "jaccard"),
        [(r.class_label, r.n, r.kept_walk, r.kept_confidence, r.overlap, r.jaccard)
         for r in rows]))
    _write_config(out, "bench-bias", {
        "manifest": manifest, "features": features_path,
        "confidences": confidences, "top_k": top_k, "threshold": threshold,
        "beta": beta, "gamma": gamma, "self_loops": self_loops, "out": out,
    })
    click.echo(f"overall jaccard {rows[-1].jaccard:.6f}")


if __name__ == "__main__":
    main()
