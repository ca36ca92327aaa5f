"""Random-walk relevance scoring and sample filtering policies.

The relevance of a sample is the fixed point of a damped walk over the
similarity graph: at each step, mass flows along the transition matrix with
weight ``beta`` and restarts uniformly with weight ``1 - beta``. Samples in
dense, self-similar regions accumulate mass; isolated outliers do not.

Filtering either keeps the top-k samples by relevance, keeps samples above a
score threshold, or applies the same policies to externally supplied
classifier confidences (the supervised baseline).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, ValidationError
from .graph import MAX_NODES, pairwise_distances, transition_matrix
from .records import SampleSet
from .validation import as_float_vector, check_transition_matrix

DEFAULT_BETA = 0.99
DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 1000


@dataclass(frozen=True)
class RelevanceResult:
    """Converged relevance scores plus iteration diagnostics.

    ``scores`` is nonnegative and sums to 1; ``residual_l1`` is the L1 change
    of the final iteration.
    """

    scores: np.ndarray
    n_iter: int
    residual_l1: float


@dataclass(frozen=True)
class FilterResult:
    """Partition of sample indices into kept and removed sets."""

    kept: np.ndarray
    removed: np.ndarray
    policy: str

    @property
    def n(self) -> int:
        return self.kept.shape[0] + self.removed.shape[0]

    def kept_mask(self) -> np.ndarray:
        mask = np.zeros(self.n, dtype=bool)
        mask[self.kept] = True
        return mask


def relevance_scores(p, beta: float = DEFAULT_BETA, *,
                     tol: float = DEFAULT_TOL,
                     max_iter: int = DEFAULT_MAX_ITER) -> RelevanceResult:
    """Iterate the damped walk to its fixed point.

    Starting from the uniform vector v = (1/n, ..., 1/n), repeats

        r_k = beta * P^T r_{k-1} + (1 - beta) * v

    until the L1 change drops below ``tol``. Mass is conserved at every step
    (each r_k sums to 1), which is asserted in debug mode.

    Parameters
    ----------
    p : array-like, shape (n, n)
        Row-stochastic transition matrix.
    beta : float in [0, 1)
        Walk weight; the restart weight is 1 - beta. Default 0.99.
    tol : float
        L1 convergence tolerance (default 1e-10).
    max_iter : int
        Iteration budget; exceeding it raises ConvergenceError carrying the
        last residual.
    """
    P = check_transition_matrix(p)
    if not (0 <= beta < 1):
        raise ValidationError(f"beta must be in [0, 1), got {beta!r}")
    if tol <= 0:
        raise ValidationError(f"tol must be positive, got {tol!r}")
    if max_iter < 1:
        raise ValidationError(f"max_iter must be >= 1, got {max_iter!r}")
    n = P.shape[0]
    PT = np.ascontiguousarray(P.T)
    v = np.full(n, 1.0 / n)
    r = v.copy()
    residual = np.inf
    for k in range(1, max_iter + 1):
        r_next = beta * (PT @ r) + (1.0 - beta) * v
        assert abs(r_next.sum() - 1.0) < 1e-9, "relevance mass must be conserved"
        residual = float(np.abs(r_next - r).sum())
        r = r_next
        if residual < tol:
            return RelevanceResult(scores=r, n_iter=k, residual_l1=residual)
    raise ConvergenceError(
        f"no convergence after {max_iter} iterations (residual {residual:g} >= {tol:g})",
        residual_l1=residual, n_iter=max_iter)


def _scores_of(relevance) -> np.ndarray:
    if isinstance(relevance, RelevanceResult):
        return relevance.scores
    return as_float_vector(relevance, "scores")


def filter_top_k(relevance, k: int) -> FilterResult:
    """Keep the k highest-scoring samples; ties break toward the smaller index."""
    scores = _scores_of(relevance)
    n = scores.shape[0]
    if not (1 <= k <= n):
        raise ValidationError(f"k must be in 1..{n}, got {k}")
    order = np.argsort(-scores, kind="stable")
    kept = np.sort(order[:k])
    removed = np.sort(order[k:])
    return FilterResult(kept=kept, removed=removed, policy=f"top_k(k={k})")


def filter_threshold(relevance, tau: float) -> FilterResult:
    """Keep samples whose score is at least ``tau``."""
    scores = _scores_of(relevance)
    kept = np.flatnonzero(scores >= tau)
    removed = np.flatnonzero(scores < tau)
    return FilterResult(kept=kept, removed=removed, policy=f"threshold(tau={tau!r})")


def supervised_filter(confidences, *, top_k: int | None = None,
                      threshold: float | None = None) -> FilterResult:
    """Filter on external classifier confidences instead of walk relevance.

    Selection semantics are identical to the relevance policies; exactly one
    of ``top_k`` / ``threshold`` must be given.
    """
    scores = as_float_vector(confidences, "confidences")
    if (top_k is None) == (threshold is None):
        raise ValidationError("provide exactly one of top_k or threshold")
    if top_k is not None:
        inner = filter_top_k(scores, top_k)
    else:
        inner = filter_threshold(scores, threshold)
    return FilterResult(kept=inner.kept, removed=inner.removed,
                        policy=f"supervised_{inner.policy}")


def class_relevance(samples: SampleSet, features, *,
                    beta: float = DEFAULT_BETA, gamma: float = 0.01,
                    self_loops: bool = False, tol: float = DEFAULT_TOL,
                    max_iter: int = DEFAULT_MAX_ITER,
                    max_nodes: int = MAX_NODES) -> np.ndarray:
    """Per-class relevance for a whole sample set.

    Filtering is independent per class label: each class gets its own graph
    over its own feature rows, so scores are comparable within a class only
    (each class's scores sum to 1).

    Returns an array aligned with ``samples``.
    """
    X = np.asarray(features)
    relevance = np.zeros(len(samples), dtype=np.float64)
    for label in samples.class_labels:
        idx = samples.indices_for_class(label)
        rows = samples.subset(idx).feature_rows()
        try:
            dist = pairwise_distances(X[rows], max_nodes=max_nodes)
            P = transition_matrix(dist, gamma=gamma, self_loops=self_loops)
            result = relevance_scores(P, beta=beta, tol=tol, max_iter=max_iter)
        except ConvergenceError as exc:
            raise ConvergenceError(f"class {label!r}: {exc}",
                                   residual_l1=exc.residual_l1,
                                   n_iter=exc.n_iter) from None
        except ValidationError as exc:
            raise type(exc)(f"class {label!r}: {exc}") from None
        relevance[idx] = result.scores
    return relevance


def filter_sample_set(samples: SampleSet, features, *,
                      beta: float = DEFAULT_BETA, gamma: float = 0.01,
                      top_k: int | None = None, threshold: float | None = None,
                      self_loops: bool = False, tol: float = DEFAULT_TOL,
                      max_iter: int = DEFAULT_MAX_ITER,
                      max_nodes: int = MAX_NODES) -> tuple[np.ndarray, np.ndarray]:
    """Run per-class relevance scoring plus one filtering policy.

    Returns ``(relevance, kept_mask)`` aligned with ``samples``. ``top_k``
    applies per class.
    """
    if (top_k is None) == (threshold is None):
        raise ValidationError("provide exactly one of top_k or threshold")
    relevance = class_relevance(samples, features, beta=beta, gamma=gamma,
                                self_loops=self_loops, tol=tol, max_iter=max_iter,
                                max_nodes=max_nodes)
    kept_mask = np.zeros(len(samples), dtype=bool)
    for label in samples.class_labels:
        idx = samples.indices_for_class(label)
        if top_k is not None:
            if top_k > idx.shape[0]:
                raise ValidationError(
                    f"class {label!r} has {idx.shape[0]} samples, cannot keep top {top_k}")
            result = filter_top_k(relevance[idx], top_k)
        else:
            result = filter_threshold(relevance[idx], threshold)
        kept_mask[idx[result.kept]] = True
    return relevance, kept_mask
