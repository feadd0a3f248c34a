"""Exact 2-D t-SNE with perplexity calibration and a quality-gated grid search.

High-dimensional affinities are Gaussian conditionals whose per-point
precision is binary-searched so the distribution's perplexity (2^entropy)
hits the target. The joint P is matched by a Student-t kernel Q in 2-D by
gradient descent on the KL divergence, with early exaggeration and a
momentum switch. Everything is O(N^2); the intended N is tens to a few
hundred segments, where exactness beats approximation.

The final KL value is graded into tiers: "strict" below 0.5, "loose"
below 1.0, "failed" otherwise. Callers decide what to do with a failed
tier; the optimizer never raises for poor convergence.
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np
from sklearn.base import BaseEstimator

from .features import FeatureTable
from .validation import as_float_matrix

P_FLOOR = 1e-12
GATE_STRICT = 0.5
GATE_LOOSE = 1.0


def gate_tier(kl):
    if kl < GATE_STRICT:
        return "strict"
    if kl < GATE_LOOSE:
        return "loose"
    return "failed"


@dataclass
class TsneParams:
    """Optimizer settings. Only perplexity and learning_rate usually vary;
    the exaggeration/momentum schedule is exposed for reproducibility."""

    perplexity: float = 30.0
    learning_rate: float = 200.0
    n_iter: int = 1000
    early_exaggeration_factor: float = 12.0
    exaggeration_iters: int = 250
    momentum_early: float = 0.5
    momentum_late: float = 0.8
    seed: int = 0
    init_scale: float = 1e-4

    def __post_init__(self):
        if self.perplexity <= 1.0:
            raise ValueError(f"perplexity must exceed 1, got {self.perplexity}")
        if self.learning_rate <= 0.0:
            raise ValueError("learning_rate must be positive")
        if self.n_iter < self.exaggeration_iters:
            raise ValueError(
                f"n_iter {self.n_iter} is below the exaggeration phase "
                f"({self.exaggeration_iters} iterations)"
            )

    def to_dict(self):
        return {
            "perplexity": self.perplexity,
            "learning_rate": self.learning_rate,
            "n_iter": self.n_iter,
            "early_exaggeration_factor": self.early_exaggeration_factor,
            "exaggeration_iters": self.exaggeration_iters,
            "momentum_early": self.momentum_early,
            "momentum_late": self.momentum_late,
            "seed": self.seed,
            "init_scale": self.init_scale,
        }


@dataclass
class Embedding2D:
    """N x 2 coordinates plus run diagnostics."""

    coords: np.ndarray
    final_kl: float
    params: TsneParams
    converged_gate: str = field(default="")

    def __post_init__(self):
        self.coords = as_float_matrix(self.coords, "coords", min_rows=2)
        if self.coords.shape[1] != 2:
            raise ValueError("coords must be N x 2")
        if not (math.isfinite(self.final_kl) and self.final_kl >= -1e-9):
            raise ValueError(f"final_kl must be finite and >= 0, got {self.final_kl}")
        self.final_kl = max(0.0, float(self.final_kl))
        if not self.converged_gate:
            self.converged_gate = gate_tier(self.final_kl)

    @property
    def n_points(self):
        return self.coords.shape[0]


def pairwise_sq_dists(table):
    """Symmetric matrix of squared Euclidean distances, zero diagonal."""
    X = table.values if isinstance(table, FeatureTable) else as_float_matrix(table, min_rows=2)
    diff = X[:, None, :] - X[None, :, :]
    d2 = np.einsum("ijk,ijk->ij", diff, diff)
    d2 = 0.5 * (d2 + d2.T)
    np.fill_diagonal(d2, 0.0)
    return d2


def _row_entropy_bits(d_row, beta):
    """Entropy (bits) and probabilities of one conditional distribution."""
    shifted = d_row - d_row.min()
    p = np.exp(-beta * shifted)
    total = p.sum()
    p = p / total
    # H = (beta * sum(p*d) + ln(sum exp)) / ln 2, with d shifted for stability
    h_nats = beta * float(np.dot(p, shifted)) + math.log(total)
    return h_nats / math.log(2.0), p


def calibrate_conditionals(d2, perplexity, tol=1e-5, max_iter=50):
    """Binary-search per-row precisions so each row's perplexity hits the target.

    Args:
        d2: N x N squared-distance matrix
        perplexity: target effective neighbor count, must be < N
        tol: acceptable |2^H - perplexity|
        max_iter: search steps per row before giving up

    Returns:
        (P, converged): P is row-stochastic with zero diagonal; converged is
        a boolean per row. Rows that fail to converge keep the closest
        probabilities found (the caller may warn, nothing raises).
    """
    d2 = as_float_matrix(d2, "d2", min_rows=2)
    n = d2.shape[0]
    if not perplexity < n:
        raise ValueError(f"perplexity {perplexity} must be below N = {n}")
    P = np.zeros_like(d2)
    converged = np.zeros(n, dtype=bool)
    mask = ~np.eye(n, dtype=bool)
    for i in range(n):
        d_row = d2[i][mask[i]]
        beta, lo, hi = 1.0, 0.0, math.inf
        best_p, best_err = None, math.inf
        for _ in range(max_iter):
            realized_bits, p = _row_entropy_bits(d_row, beta)
            err = abs(2.0 ** realized_bits - perplexity)
            if err < best_err:
                best_p, best_err = p, err
            if err <= tol:
                converged[i] = True
                break
            if 2.0 ** realized_bits > perplexity:
                lo = beta  # too diffuse: sharpen
                beta = beta * 2.0 if hi == math.inf else (beta + hi) / 2.0
            else:
                hi = beta
                beta = beta / 2.0 if lo == 0.0 else (beta + lo) / 2.0
        P[i][mask[i]] = best_p
    return P, converged


def symmetrize(p_cond):
    """Joint affinities p_ij = (p_j|i + p_i|j) / 2N, floored off-diagonal."""
    p_cond = as_float_matrix(p_cond, "p_cond", min_rows=2)
    n = p_cond.shape[0]
    joint = (p_cond + p_cond.T) / (2.0 * n)
    off = ~np.eye(n, dtype=bool)
    joint[off] = np.maximum(joint[off], P_FLOOR)
    return joint


def _student_t_q(coords):
    """Unnormalized Student-t weights W and normalized Q (zero diagonals)."""
    d2 = pairwise_sq_dists(coords)
    w = 1.0 / (1.0 + d2)
    np.fill_diagonal(w, 0.0)
    q = w / w.sum()
    return w, q


def kl_divergence(P, coords):
    """KL(P || Q) of the joint affinities against the Student-t kernel of coords.

    Terms with p_ij = 0 contribute nothing; q is floored to keep the log
    finite. Non-negative for any valid P by Gibbs' inequality.
    """
    P = as_float_matrix(P, "P", min_rows=2)
    _, q = _student_t_q(as_float_matrix(coords, "coords", min_rows=2))
    live = P > 0.0
    return float(np.sum(P[live] * np.log(P[live] / np.maximum(q[live], P_FLOOR))))


def _kl_gradient(P, coords):
    """dKL/dY: 4 * sum_j (p_ij - q_ij) * (y_i - y_j) / (1 + ||y_i - y_j||^2)."""
    w, q = _student_t_q(coords)
    m = (P - q) * w
    return 4.0 * (m.sum(axis=1)[:, None] * coords - m @ coords)


def tsne_optimize(P, params):
    """Gradient descent on KL(P||Q) with early exaggeration and momentum.

    Deterministic for a given seed. Coordinates are re-centered to zero
    mean every iteration so the embedding cannot drift. The reported
    final_kl is computed on the plain (un-exaggerated) P.
    """
    P = as_float_matrix(P, "P", min_rows=2)
    n = P.shape[0]
    rng = np.random.default_rng(params.seed)
    coords = params.init_scale * rng.standard_normal((n, 2))
    velocity = np.zeros_like(coords)
    exaggerated = P * params.early_exaggeration_factor
    for it in range(params.n_iter):
        in_exaggeration = it < params.exaggeration_iters
        target = exaggerated if in_exaggeration else P
        momentum = params.momentum_early if in_exaggeration else params.momentum_late
        grad = _kl_gradient(target, coords)
        velocity = momentum * velocity - params.learning_rate * grad
        coords = coords + velocity
        coords = coords - coords.mean(axis=0)
        if not np.all(np.isfinite(coords)):
            raise FloatingPointError(
                f"optimizer diverged at iteration {it}; lower the learning rate"
            )
    final_kl = kl_divergence(P, coords)
    return Embedding2D(coords=coords, final_kl=final_kl, params=params)


def tsne_run(table, params):
    """Calibrate affinities for a feature table and optimize an embedding."""
    d2 = pairwise_sq_dists(table)
    p_cond, _ = calibrate_conditionals(d2, params.perplexity)
    return tsne_optimize(symmetrize(p_cond), params)


def grid_search(table, grid, runs_per_cell=1):
    """Run every parameter cell runs_per_cell times and keep the lowest KL.

    Seeds are derived as cell_seed + run_index, so sweeps are reproducible
    and duplicate cells produce identical runs. The best embedding is
    returned even when its gate tier is "failed"; callers enforce policy.
    """
    if not grid:
        raise ValueError("grid must contain at least one parameter cell")
    if runs_per_cell < 1:
        raise ValueError("runs_per_cell must be >= 1")
    X = table.values if isinstance(table, FeatureTable) else as_float_matrix(table, min_rows=2)
    n = X.shape[0]
    for cell in grid:
        if not cell.perplexity < n:
            raise ValueError(f"perplexity {cell.perplexity} must be below N = {n}")
    d2 = pairwise_sq_dists(X)
    best = None
    for cell in grid:
        p_cond, _ = calibrate_conditionals(d2, cell.perplexity)
        joint = symmetrize(p_cond)
        for run in range(runs_per_cell):
            result = tsne_optimize(joint, replace(cell, seed=cell.seed + run))
            if best is None or result.final_kl < best.final_kl:
                best = result
    return best


class TsneEmbedding(BaseEstimator):
    """Estimator wrapper: fit_transform(X) -> N x 2 coordinates.

    After fitting, ``embedding_`` holds the coordinates, ``kl_divergence_``
    the final KL, and ``gate_`` the quality tier.
    """

    def __init__(self, perplexity=30.0, learning_rate=200.0, n_iter=1000,
                 early_exaggeration=12.0, seed=0, init_scale=1e-4):
        self.perplexity = perplexity
        self.learning_rate = learning_rate
        self.n_iter = n_iter
        self.early_exaggeration = early_exaggeration
        self.seed = seed
        self.init_scale = init_scale

    def _params(self):
        return TsneParams(
            perplexity=self.perplexity, learning_rate=self.learning_rate,
            n_iter=self.n_iter, early_exaggeration_factor=self.early_exaggeration,
            seed=self.seed, init_scale=self.init_scale,
        )

    def fit(self, X, y=None):
        result = tsne_run(as_float_matrix(X, "X", min_rows=2), self._params())
        self.embedding_ = result.coords
        self.kl_divergence_ = result.final_kl
        self.gate_ = result.converged_gate
        return self

    def fit_transform(self, X, y=None):
        return self.fit(X).embedding_
