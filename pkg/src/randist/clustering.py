"""Clustering on learned embeddings: Lloyd's K-means with k-means++ seeding
and restart averaging of NMI / pairwise-F against ground-truth classes.
"""
from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .data import Dataset, standardize as standardize_dataset
from .encoder import EncoderModel, LossTrace, TrainConfig, train
from .mappings import identity_map, rff, sparse_rp
from .metrics import nmi, pairwise_f
from .rng import child_seed, stream


@dataclass
class KMeansResult:
    assignments: np.ndarray
    centroids: np.ndarray
    inertia: float
    iterations_run: int


def embed(model: EncoderModel, data) -> np.ndarray:
    """Rows of the learned representation for a Dataset or matrix."""
    X = data.features if isinstance(data, Dataset) else np.asarray(data, dtype=np.float64)
    return model.forward_batch(X)


def _sq_dists(X: np.ndarray, C: np.ndarray) -> np.ndarray:
    d2 = (
        np.sum(X * X, axis=1)[:, None]
        + np.sum(C * C, axis=1)[None, :]
        - 2.0 * (X @ C.T)
    )
    return np.maximum(d2, 0.0)


def _plusplus_init(X: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    # greedy k-means++: draw a few D^2-weighted candidates per step and
    # keep the one that shrinks the potential most
    n = X.shape[0]
    trials = 2 + int(math.log(k)) if k > 1 else 1
    centroids = np.empty((k, X.shape[1]))
    centroids[0] = X[rng.integers(0, n)]
    closest = _sq_dists(X, centroids[:1]).ravel()
    for c in range(1, k):
        total = closest.sum()
        if total <= 0.0:  # all remaining points coincide with a centroid
            candidates = rng.integers(0, n, size=trials)
        else:
            candidates = rng.choice(n, size=trials, p=closest / total)
        best_pick, best_closest, best_total = None, None, np.inf
        for pick in candidates:
            cand_closest = np.minimum(closest, _sq_dists(X, X[pick : pick + 1]).ravel())
            cand_total = cand_closest.sum()
            if cand_total < best_total:
                best_pick, best_closest, best_total = pick, cand_closest, cand_total
        centroids[c] = X[best_pick]
        closest = best_closest
    return centroids


def kmeans(X: np.ndarray, k: int, max_iters: int = 300, seed: int = 0) -> KMeansResult:
    """Lloyd iterations from k-means++ until the assignments stop changing.

    Empty clusters are reseeded to the point currently farthest from its
    centroid, so every cluster id stays populated.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {X.shape}")
    n = X.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= {n}, got k={k}")
    if max_iters < 1:
        raise ValueError(f"max_iters must be >= 1, got {max_iters}")
    rng = stream(seed)
    centroids = _plusplus_init(X, k, rng)
    assignments = np.full(n, -1, dtype=np.int64)
    point_d2 = np.zeros(n)
    iterations = 0
    for _ in range(max_iters):
        d2 = _sq_dists(X, centroids)
        new_assign = np.argmin(d2, axis=1)
        point_d2 = d2[np.arange(n), new_assign]
        for empty in np.setdiff1d(np.arange(k), new_assign):
            farthest = int(np.argmax(point_d2))
            centroids[empty] = X[farthest]
            new_assign[farthest] = empty
            point_d2[farthest] = 0.0
        if np.array_equal(new_assign, assignments):
            break
        assignments = new_assign
        iterations += 1
        for c in range(k):
            centroids[c] = X[assignments == c].mean(axis=0)
    else:
        # out of iterations: make the reported state self-consistent
        d2 = _sq_dists(X, centroids)
        assignments = np.argmin(d2, axis=1)
        point_d2 = d2[np.arange(n), assignments]
    inertia = float(point_d2.sum())
    return KMeansResult(
        assignments=assignments, centroids=centroids, inertia=inertia, iterations_run=iterations
    )


@dataclass
class ClusteringResult:
    nmi_mean: float
    nmi_std: float
    f_mean: float
    f_std: float
    nmi_values: np.ndarray
    f_values: np.ndarray
    model: EncoderModel
    trace: LossTrace
    embeddings: np.ndarray
    assignments: np.ndarray  # from the first restart, for export
    train_seconds: float = 0.0
    cluster_seconds: float = 0.0


def run_clustering(
    data: Dataset,
    config: Optional[TrainConfig] = None,
    restarts: int = 30,
    ablation: str = "none",
    source: str = "rff",
    standardize: bool = True,
    normalize_embeddings: bool = False,
    kmeans_max_iters: int = 300,
    bandwidth: Optional[float] = None,
    density: Optional[float] = None,
    map_dim: Optional[int] = None,
    workers: int = 1,
) -> ClusteringResult:
    """Train the representation, embed, and K-means with restart averaging.

    k is the number of distinct ground-truth labels, which must be present.
    The reconstruction auxiliary loss is on by default and removed by
    ablation='no_aux_loss'; 'no_pair_loss' keeps only the reconstruction
    loss. Reported NMI/F statistics are mean and population std over
    restarts.
    """
    if data.labels is None:
        raise ValueError("clustering evaluation needs ground-truth labels")
    if ablation not in ("none", "no_pair_loss", "no_aux_loss"):
        raise ValueError(f"unknown clustering ablation {ablation!r}")
    if restarts < 1:
        raise ValueError(f"restarts must be >= 1, got {restarts}")
    if config is None:
        config = TrainConfig.clustering_defaults()
    if config.task != "clustering":
        raise ValueError(f"clustering pipeline needs task='clustering', got {config.task!r}")

    X = data.features
    if standardize:
        X = standardize_dataset(data)[0].features
    d = X.shape[1]

    use_pair = config.use_pair_loss and ablation != "no_pair_loss"
    use_aux = config.use_aux_loss and ablation != "no_aux_loss"
    if not (use_pair or use_aux):
        raise ValueError("no loss enabled: ablation removed the only active loss")
    cfg = TrainConfig(
        m=config.m,
        epochs=config.epochs,
        task="clustering",
        batch_size=config.batch_size,
        learning_rate=config.learning_rate,
        use_pair_loss=use_pair,
        use_aux_loss=use_aux,
        aux_weight=config.aux_weight,
        leaky_slope=config.leaky_slope,
        seed=config.seed,
    )

    k_map = map_dim if map_dim is not None else cfg.m
    map_seed = child_seed(cfg.seed, 10_000)
    if source == "rff":
        mapping = rff(d, k_map, bandwidth=bandwidth, data=X, seed=map_seed)
    elif source == "srp":
        mapping = sparse_rp(d, k_map, density=density, seed=map_seed)
    elif source == "identity":
        mapping = identity_map(d)
    else:
        raise ValueError(f"unknown source {source!r}")

    t0 = time.perf_counter()
    model, trace = train(X, cfg, mapping)
    H = embed(model, X)
    t1 = time.perf_counter()
    if normalize_embeddings:
        norms = np.linalg.norm(H, axis=1, keepdims=True)
        norms[norms == 0] = 1.0
        H = H / norms

    k = int(np.unique(data.labels).size)
    seeds = [child_seed(cfg.seed, 20_000 + r) for r in range(restarts)]

    def one_restart(seed: int) -> KMeansResult:
        return kmeans(H, k, max_iters=kmeans_max_iters, seed=seed)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one_restart, seeds))
    else:
        results = [one_restart(s) for s in seeds]

    nmi_values = np.array([nmi(data.labels, r.assignments) for r in results])
    f_values = np.array([pairwise_f(data.labels, r.assignments) for r in results])
    return ClusteringResult(
        nmi_mean=float(nmi_values.mean()),
        nmi_std=float(nmi_values.std()),
        f_mean=float(f_values.mean()),
        f_std=float(f_values.std()),
        nmi_values=nmi_values,
        f_values=f_values,
        model=model,
        trace=trace,
        embeddings=H,
        assignments=results[0].assignments,
        train_seconds=t1 - t0,
        cluster_seconds=time.perf_counter() - t1,
    )
