"""Independent slow-path oracles used to cross-check the library.

Everything here is deliberately written with plain loops and direct formula
evaluation, staying independent of the vectorized implementations it checks.
"""
import math

import numpy as np


def pairwise_distances_loops(X):
    """Double-loop Euclidean distances."""
    X = np.asarray(X, dtype=np.float64)
    n, d = X.shape
    out = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            s = 0.0
            for k in range(d):
                s += (X[i, k] - X[j, k]) ** 2
            out[i, j] = math.sqrt(s)
    return out


def transition_matrix_direct(dist, gamma, self_loops):
    """Direct per-entry evaluation of exp(-gamma*d) row normalization."""
    dist = np.asarray(dist, dtype=np.float64)
    n = dist.shape[0]
    out = np.zeros((n, n))
    for i in range(n):
        denom = 0.0
        for m in range(n):
            if not self_loops and m == i:
                continue
            denom += math.exp(-gamma * dist[i, m])
        for j in range(n):
            if not self_loops and j == i:
                continue
            out[i, j] = math.exp(-gamma * dist[i, j]) / denom
    return out


def relevance_linear_solve(P, beta):
    """Closed-form fixed point r = (1-beta) (I - beta P^T)^-1 v."""
    P = np.asarray(P, dtype=np.float64)
    n = P.shape[0]
    v = np.full(n, 1.0 / n)
    return (1.0 - beta) * np.linalg.solve(np.eye(n) - beta * P.T, v)


def interval_iou_grid(a_start, a_end, b_start, b_end, step=0.001):
    """IoU by counting 1 ms grid cells."""
    lo = min(a_start, b_start)
    hi = max(a_end, b_end)
    n_cells = int(round((hi - lo) / step)) + 1
    inter = union = 0
    for c in range(n_cells):
        t = lo + (c + 0.5) * step
        in_a = a_start <= t < a_end
        in_b = b_start <= t < b_end
        if in_a and in_b:
            inter += 1
        if in_a or in_b:
            union += 1
    return inter / union if union else 0.0


def window_scan_oracle(series, window_s, stride_s, merge):
    """Direct enumeration of stride-spaced windows with per-frame loops.

    Returns (start, end, label, score) tuples in output order.
    """
    duration = series.n_frames / series.fps
    segments = []
    k = 0
    while True:
        start = k * stride_s
        if start >= duration - 1e-9:
            break
        partial = start + window_s > duration + 1e-9
        end = duration if partial else start + window_s
        frames = [t for t in range(series.n_frames)
                  if start - 1e-9 <= t / series.fps < end - 1e-9]
        if frames:
            mean = [sum(series.probs[t][c] for t in frames) / len(frames)
                    for c in range(len(series.class_names))]
            c = max(range(len(mean)), key=lambda i: (mean[i], -i))
            segments.append((start, end, series.class_names[c], mean[c]))
        if partial:
            break
        k += 1
    if merge:
        merged = []
        by_class = {}
        for start, end, label, score in segments:
            by_class.setdefault(label, []).append((start, end, score))
        for label in sorted(by_class):
            group = sorted(by_class[label])
            cur_s, cur_e, cur_score = group[0]
            for s, e, sc in group[1:]:
                if s <= cur_e + 1e-9:
                    cur_e = max(cur_e, e)
                    cur_score = max(cur_score, sc)
                else:
                    merged.append((cur_s, cur_e, label, cur_score))
                    cur_s, cur_e, cur_score = s, e, sc
            merged.append((cur_s, cur_e, label, cur_score))
        segments = sorted(merged)
    return segments


def merge_intervals_sweep(intervals, tol=1e-9):
    """Interval union by sweep over sorted (start, end) pairs."""
    merged = []
    for start, end in sorted(intervals):
        if merged and start <= merged[-1][1] + tol:
            merged[-1][1] = max(merged[-1][1], end)
        else:
            merged.append([start, end])
    return [tuple(iv) for iv in merged]


def detection_ap_loops(detections, truth, iou_threshold):
    """Greedy score-ordered matching plus direct AP definition, all loops.

    ``detections`` and ``truth`` are lists of (video_id, class_label, start,
    end, score) and (video_id, class_label, start, end) tuples.
    """
    if not truth:
        raise ValueError("no ground truth")
    if not detections:
        return 0.0
    dets = sorted(detections, key=lambda d: (-d[4], d[0], d[1], d[2], d[3]))
    gts = sorted(truth)
    used = [False] * len(gts)
    tp_flags = []
    for vid, label, start, end, _score in dets:
        best_iou = 0.0
        best_j = -1
        for j, (gvid, glabel, gstart, gend) in enumerate(gts):
            if used[j] or gvid != vid or glabel != label:
                continue
            inter = max(0.0, min(end, gend) - max(start, gstart))
            union = (end - start) + (gend - gstart) - inter
            iou = inter / union if union > 0 else 0.0
            if iou >= iou_threshold and iou > best_iou:
                best_iou = iou
                best_j = j
        if best_j >= 0:
            used[best_j] = True
            tp_flags.append(True)
        else:
            tp_flags.append(False)
    # AP by definition: for each ground-truth rank m, the best precision among
    # prefixes recovering at least m true positives.
    n_truth = len(gts)
    precisions = []
    tp = 0
    for i, flag in enumerate(tp_flags, start=1):
        tp += int(flag)
        precisions.append((tp, tp / i))
    total = 0.0
    for m in range(1, n_truth + 1):
        best = 0.0
        for tp, prec in precisions:
            if tp >= m and prec > best:
                best = prec
        total += best
    return total / n_truth


def ranked_ap_loops(labels_in_rank_order, n_positive):
    """AP of a ranked binary list via the same direct definition."""
    precisions = []
    tp = 0
    for i, flag in enumerate(labels_in_rank_order, start=1):
        tp += int(flag)
        precisions.append((tp, tp / i))
    total = 0.0
    for m in range(1, n_positive + 1):
        best = 0.0
        for tp, prec in precisions:
            if tp >= m and prec > best:
                best = prec
        total += best
    return total / n_positive
