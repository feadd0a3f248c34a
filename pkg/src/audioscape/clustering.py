"""DBSCAN over the 2-D embedding, eps selection, and noise reassignment.

The clusterer is deterministic: points are expanded in ascending index
order, so border points always land in the lowest-numbered cluster that
reaches them. The eps sweep picks, lexicographically, the run with the
most clusters, then the fewest noise points, then the smallest eps. Noise
survivors are attached to their nearest core point afterwards, replacing
the manual curation step described for the reference data set.
"""

from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin

from .validation import as_float_matrix

DEFAULT_MIN_SAMPLES = 5
NOISE = -1


@dataclass
class ClusterAssignment:
    """Per-segment cluster labels plus the DBSCAN run that produced them.

    labels may contain -1 (noise) before reassignment; afterwards every
    label is in [0, n_clusters). names is an optional display-name map
    supplied by a human annotator.
    """

    labels: np.ndarray
    n_clusters: int
    eps_used: float
    min_samples: int
    core_flags: np.ndarray
    names: dict[int, str] = field(default_factory=dict)

    def __post_init__(self):
        self.labels = np.asarray(self.labels, dtype=np.int64)
        self.core_flags = np.asarray(self.core_flags, dtype=bool)
        if self.labels.shape != self.core_flags.shape:
            raise ValueError("labels and core_flags must have the same length")
        if self.n_clusters < 0 or self.eps_used <= 0 or self.min_samples < 1:
            raise ValueError("invalid clustering metadata")

    @property
    def n_points(self):
        return len(self.labels)

    @property
    def n_noise(self):
        return int(np.sum(self.labels == NOISE))

    @property
    def is_all_noise(self):
        return self.n_clusters == 0


def dbscan(coords, eps, min_samples=DEFAULT_MIN_SAMPLES):
    """Euclidean DBSCAN with closed-ball neighborhoods.

    A point is core when its eps-ball (itself included) holds at least
    min_samples points. Expansion proceeds from the lowest unlabeled core
    index, growing each cluster to completion before the next starts.

    Returns:
        (labels, core_flags): labels use -1 for noise.
    """
    coords = as_float_matrix(coords, "coords")
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")
    n = coords.shape[0]
    diff = coords[:, None, :] - coords[None, :, :]
    within = np.einsum("ijk,ijk->ij", diff, diff) <= eps * eps
    core = within.sum(axis=1) >= min_samples
    labels = np.full(n, NOISE, dtype=np.int64)
    cluster = 0
    for seed in range(n):
        if labels[seed] != NOISE or not core[seed]:
            continue
        labels[seed] = cluster
        frontier = [seed]
        while frontier:
            point = frontier.pop(0)
            for neighbor in np.flatnonzero(within[point]):
                if labels[neighbor] == NOISE:
                    labels[neighbor] = cluster
                    if core[neighbor]:
                        frontier.append(int(neighbor))
        cluster += 1
    return labels, core


def default_eps_grid(coords, size=40, lo_pct=1.0, hi_pct=99.0):
    """Geometric eps grid between percentiles of the nonzero pairwise distances."""
    coords = as_float_matrix(coords, "coords", min_rows=2)
    diff = coords[:, None, :] - coords[None, :, :]
    d = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
    d = d[np.triu_indices_from(d, k=1)]
    d = d[d > 0.0]
    if d.size == 0:
        return np.array([1.0])  # all points coincide; any eps works
    lo, hi = np.percentile(d, [lo_pct, hi_pct])
    lo = max(lo, 1e-12)
    hi = max(hi, lo * (1.0 + 1e-9))
    return np.geomspace(lo, hi, size)


def eps_sweep(coords, eps_values=None, min_samples=DEFAULT_MIN_SAMPLES):
    """Run DBSCAN across eps values and keep the best run, pre-reassignment.

    Selection is lexicographic: most clusters, then fewest noise points,
    then smallest eps. When every eps yields zero clusters the all-noise
    run for the smallest eps is returned (is_all_noise flags it) so the
    caller can decide how to fail.
    """
    coords = as_float_matrix(coords, "coords")
    if eps_values is None:
        eps_values = default_eps_grid(coords)
    eps_values = [float(e) for e in eps_values]
    if not eps_values:
        raise ValueError("eps_values must be non-empty")
    if sorted(eps_values) != eps_values:
        raise ValueError("eps_values must be ascending")
    best = None
    best_key = None
    for eps in eps_values:
        labels, core = dbscan(coords, eps, min_samples)
        n_clusters = int(labels.max()) + 1 if labels.max() >= 0 else 0
        n_noise = int(np.sum(labels == NOISE))
        key = (-n_clusters, n_noise, eps)
        if best_key is None or key < best_key:
            best_key = key
            best = ClusterAssignment(labels=labels, n_clusters=n_clusters, eps_used=eps,
                                     min_samples=min_samples, core_flags=core)
    return best


def assign_noise(assignment, coords):
    """Attach every noise point to the cluster of its nearest core point.

    Distance ties break toward the lower core index. Labels of non-noise
    points are untouched and the cluster count is unchanged.
    """
    coords = as_float_matrix(coords, "coords")
    if assignment.n_clusters == 0:
        raise ValueError("cannot reassign noise: clustering produced zero clusters")
    labels = assignment.labels.copy()
    core_idx = np.flatnonzero(assignment.core_flags)
    for i in np.flatnonzero(labels == NOISE):
        d2 = np.sum((coords[core_idx] - coords[i]) ** 2, axis=1)
        labels[i] = labels[core_idx[int(np.argmin(d2))]]  # argmin takes the first = lowest index
    return ClusterAssignment(labels=labels, n_clusters=assignment.n_clusters,
                             eps_used=assignment.eps_used, min_samples=assignment.min_samples,
                             core_flags=assignment.core_flags, names=dict(assignment.names))


class DensityClusterer(BaseEstimator, ClusterMixin):
    """Estimator wrapper around dbscan(); fit_predict(X) -> labels with -1 noise."""

    def __init__(self, eps=0.5, min_samples=DEFAULT_MIN_SAMPLES):
        self.eps = eps
        self.min_samples = min_samples

    def fit(self, X, y=None):
        labels, core = dbscan(as_float_matrix(X, "X"), self.eps, self.min_samples)
        self.labels_ = labels
        self.core_flags_ = core
        self.n_clusters_ = int(labels.max()) + 1 if labels.max() >= 0 else 0
        return self
