"""Similarity graph construction over feature vectors.

A retrieved sample set is modeled as a fully connected graph whose nodes are
samples and whose edge affinities decay exponentially with Euclidean feature
distance. The row-normalized affinities form the transition matrix that drives
the random-walk relevance scores in :mod:`webact.walk`.
"""
from __future__ import annotations

import numpy as np

from .errors import DegenerateGraphError, ValidationError
from .validation import check_distance_matrix, check_feature_matrix

DEFAULT_GAMMA = 0.01
MAX_NODES = 20_000


def pairwise_distances(features, max_nodes: int = MAX_NODES) -> np.ndarray:
    """Exact Euclidean distance matrix between feature rows.

    Each unordered pair is computed once from explicit differences (no
    dot-product expansion), so the result is exactly symmetric with a zero
    diagonal.

    Parameters
    ----------
    features : array-like, shape (n, d)
        One feature vector per sample, n >= 2.
    max_nodes : int
        Guard rail for the dense n x n result (default 20,000 nodes).

    Returns
    -------
    ndarray, shape (n, n)
    """
    X = check_feature_matrix(features)
    n = X.shape[0]
    if n < 2:
        raise DegenerateGraphError(f"need at least 2 samples to build a graph, got {n}")
    if n > max_nodes:
        raise ValidationError(
            f"{n} nodes exceeds the dense-graph limit of {max_nodes}; "
            "raise max_nodes explicitly if this is intended")
    dist = np.zeros((n, n), dtype=np.float64)
    for i in range(n - 1):
        row = np.sqrt(((X[i + 1:] - X[i]) ** 2).sum(axis=1))
        dist[i, i + 1:] = row
        dist[i + 1:, i] = row
    return dist


def transition_matrix(dist, gamma: float = DEFAULT_GAMMA,
                      self_loops: bool = False) -> np.ndarray:
    """Row-stochastic transition matrix from a distance matrix.

    Row i holds exp(-gamma * dist[i, j]) normalized over j. With
    ``self_loops=False`` (default) the diagonal is excluded from both the
    numerator and the normalization, so p[i, i] = 0; with ``self_loops=True``
    the zero-distance diagonal term participates like any other node.

    Rows are normalized after subtracting the row-wise maximum exponent, so
    large gamma * dist products underflow gracefully instead of producing
    NaN rows.

    Parameters
    ----------
    dist : array-like, shape (n, n)
        Symmetric nonnegative distances, zero diagonal.
    gamma : float
        Positive decay rate of affinity with distance (default 0.01).
    self_loops : bool
        Whether a node may transition to itself.

    Returns
    -------
    ndarray, shape (n, n)
        Rows sum to 1 within 1e-9; all entries nonnegative.
    """
    D = check_distance_matrix(dist)
    if gamma <= 0 or not np.isfinite(gamma):
        raise ValidationError(f"gamma must be positive, got {gamma!r}")
    n = D.shape[0]
    if n == 1 and not self_loops:
        raise DegenerateGraphError(
            "single node with self_loops=False leaves a zero denominator")
    exponents = -gamma * D
    if not self_loops:
        np.fill_diagonal(exponents, -np.inf)
    row_max = exponents.max(axis=1, keepdims=True)
    weights = np.exp(exponents - row_max)
    return weights / weights.sum(axis=1, keepdims=True)
