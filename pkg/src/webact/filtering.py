"""Scikit-learn compatible estimator wrappers around the filtering policies.

Both estimators are transductive, like sklearn's LocalOutlierFactor: they
score the samples they were fitted on, and ``predict`` labels those same
samples with +1 (kept) / -1 (removed).
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, OutlierMixin
from sklearn.exceptions import NotFittedError

from .errors import ValidationError
from .graph import DEFAULT_GAMMA, MAX_NODES, pairwise_distances, transition_matrix
from .validation import as_float_vector
from .walk import (DEFAULT_BETA, DEFAULT_MAX_ITER, DEFAULT_TOL, FilterResult,
                   filter_threshold, filter_top_k, relevance_scores,
                   supervised_filter)


class RandomWalkFilter(BaseEstimator, OutlierMixin):
    """Graph random-walk outlier filter over feature vectors.

    Builds a fully connected similarity graph over the fitted samples,
    computes damped-walk relevance scores and keeps samples either by
    ``top_k`` rank or by score ``threshold``.

    Parameters
    ----------
    beta : float in [0, 1)
        Walk weight versus uniform restart (default 0.99).
    gamma : float > 0
        Affinity decay rate with Euclidean distance (default 0.01).
    top_k : int or None
        Keep the k most relevant samples.
    threshold : float or None
        Keep samples with relevance >= threshold. Exactly one of ``top_k`` /
        ``threshold`` must be set before calling predict.
    self_loops : bool
        Whether graph nodes may transition to themselves (default False).
    tol, max_iter : float, int
        Convergence controls of the walk iteration.
    max_nodes : int
        Dense-graph size guard.

    Attributes
    ----------
    relevance_ : ndarray of shape (n_samples,)
        Converged relevance scores, summing to 1.
    n_iter_ : int
        Iterations used.
    residual_ : float
        L1 residual of the final iteration.
    """

    def __init__(self, beta=DEFAULT_BETA, gamma=DEFAULT_GAMMA, top_k=None,
                 threshold=None, self_loops=False, tol=DEFAULT_TOL,
                 max_iter=DEFAULT_MAX_ITER, max_nodes=MAX_NODES):
        self.beta = beta
        self.gamma = gamma
        self.top_k = top_k
        self.threshold = threshold
        self.self_loops = self_loops
        self.tol = tol
        self.max_iter = max_iter
        self.max_nodes = max_nodes

    def fit(self, X, y=None):
        """Build the graph and converge relevance scores for X."""
        dist = pairwise_distances(X, max_nodes=self.max_nodes)
        P = transition_matrix(dist, gamma=self.gamma, self_loops=self.self_loops)
        result = relevance_scores(P, beta=self.beta, tol=self.tol,
                                  max_iter=self.max_iter)
        self.relevance_ = result.scores
        self.n_iter_ = result.n_iter
        self.residual_ = result.residual_l1
        return self

    def score_samples(self, X=None) -> np.ndarray:
        """Relevance of the fitted samples (X is ignored; transductive)."""
        self._check_fitted()
        return self.relevance_.copy()

    def filter_result(self) -> FilterResult:
        self._check_fitted()
        if (self.top_k is None) == (self.threshold is None):
            raise ValidationError("set exactly one of top_k or threshold")
        if self.top_k is not None:
            return filter_top_k(self.relevance_, self.top_k)
        return filter_threshold(self.relevance_, self.threshold)

    def predict(self, X=None) -> np.ndarray:
        """+1 for kept samples, -1 for filtered-out ones (fitted samples only)."""
        return np.where(self.filter_result().kept_mask(), 1, -1)

    def _check_fitted(self):
        if not hasattr(self, "relevance_"):
            raise NotFittedError("RandomWalkFilter is not fitted yet; call fit first")


class ConfidenceFilter(BaseEstimator, OutlierMixin):
    """Supervised-filtering baseline: select by external classifier confidences.

    X at fit time is the vector of per-sample confidences produced by some
    already-trained classifier. Selection semantics match RandomWalkFilter
    so the two can be compared on equal footing.
    """

    def __init__(self, top_k=None, threshold=None):
        self.top_k = top_k
        self.threshold = threshold

    def fit(self, X, y=None):
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 2 and X.shape[1] == 1:
            X = X[:, 0]
        self.confidences_ = as_float_vector(X, "confidences")
        return self

    def filter_result(self) -> FilterResult:
        if not hasattr(self, "confidences_"):
            raise NotFittedError("ConfidenceFilter is not fitted yet; call fit first")
        return supervised_filter(self.confidences_, top_k=self.top_k,
                                 threshold=self.threshold)

    def predict(self, X=None) -> np.ndarray:
        return np.where(self.filter_result().kept_mask(), 1, -1)
