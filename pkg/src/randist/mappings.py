"""Frozen random mappings that supply supervisory inner products.

Four constructions are available:

* Gaussian random projection: x -> (1/sqrt(K)) A x with A_ij ~ N(0, 1),
  which preserves norms and inner products in the Johnson-Lindenstrauss
  sense.
* Sparse random projection: entries +/- sqrt(1/(density*K)) with
  probability density/2 each, 0 otherwise (very-sparse scheme, default
  density 1/sqrt(D)); inner products are unbiased.
* Random Fourier features: x -> sqrt(2/K) cos(W x + b) with
  W_ij ~ N(0, 1/sigma^2) and b ~ U[0, 2pi); dot products are unbiased
  estimates of the Gaussian RBF kernel exp(-||x-y||^2 / (2 sigma^2)).
* Identity: supervisory dots are the raw Gram entries.

A mapping is frozen at construction; `apply` is pure and thread-safe.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .rng import child_seed, stream

GAUSSIAN_RP = "gaussian_rp"
SPARSE_RP = "sparse_rp"
RFF = "rff"
IDENTITY = "identity"
KINDS = (GAUSSIAN_RP, SPARSE_RP, RFF, IDENTITY)


@dataclass(frozen=True)
class RandomMap:
    kind: str
    in_dim: int
    out_dim: int
    seed: int
    weights: Optional[np.ndarray] = None  # K x D, absent for identity
    offsets: Optional[np.ndarray] = None  # length K, rff only
    bandwidth: Optional[float] = None  # rff only
    density: Optional[float] = None  # sparse_rp only


@dataclass(frozen=True)
class JlAudit:
    epsilon: float
    sample_pairs: int
    violation_rate: float
    bound: float


def _check_dims(d: int, k: int) -> None:
    if d < 1 or k < 1:
        raise ValueError(f"dimensions must be positive, got d={d}, k={k}")


def gaussian_rp(d: int, k: int, seed: int = 0) -> RandomMap:
    """Dense Gaussian projection; application scales by 1/sqrt(k)."""
    _check_dims(d, k)
    weights = stream(seed).standard_normal((k, d))
    return RandomMap(kind=GAUSSIAN_RP, in_dim=d, out_dim=k, seed=seed, weights=weights)


def sparse_rp(d: int, k: int, density: Optional[float] = None, seed: int = 0) -> RandomMap:
    """Signed sparse projection with scaling baked into the entries."""
    _check_dims(d, k)
    if density is None:
        density = 1.0 / math.sqrt(d)
    if not 0.0 < density <= 1.0:
        raise ValueError(f"density must be in (0, 1], got {density}")
    value = math.sqrt(1.0 / (density * k))
    u = stream(seed).random((k, d))
    weights = np.where(u < density / 2.0, value, np.where(u < density, -value, 0.0))
    return RandomMap(
        kind=SPARSE_RP, in_dim=d, out_dim=k, seed=seed, weights=weights, density=density
    )


def median_bandwidth(X: np.ndarray, max_points: int = 1000, seed: int = 0) -> float:
    """Median of pairwise distances over a uniform subsample of <= max_points rows."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    n = X.shape[0]
    if n > max_points:
        idx = stream(seed).choice(n, size=max_points, replace=False)
        X = X[idx]
    sq = np.sum(X * X, axis=1)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (X @ X.T)
    iu = np.triu_indices(X.shape[0], k=1)
    if iu[0].size == 0:
        return 1.0
    med = float(np.median(np.sqrt(np.maximum(d2[iu], 0.0))))
    return med if med > 0.0 else 1.0


def rff(
    d: int,
    k: int,
    bandwidth: Optional[float] = None,
    data: Optional[np.ndarray] = None,
    seed: int = 0,
) -> RandomMap:
    """Random Fourier features for the RBF kernel at the given bandwidth.

    When `bandwidth` is omitted it is set by the median heuristic on
    `data` (which must then be provided).
    """
    _check_dims(d, k)
    if bandwidth is None:
        if data is None:
            raise ValueError("rff needs an explicit bandwidth or data for the median heuristic")
        bandwidth = median_bandwidth(data, seed=child_seed(seed, 1))
    if bandwidth <= 0:
        raise ValueError(f"bandwidth must be positive, got {bandwidth}")
    rng = stream(seed)
    weights = rng.standard_normal((k, d)) / bandwidth
    offsets = rng.uniform(0.0, 2.0 * math.pi, size=k)
    return RandomMap(
        kind=RFF,
        in_dim=d,
        out_dim=k,
        seed=seed,
        weights=weights,
        offsets=offsets,
        bandwidth=float(bandwidth),
    )


def identity_map(d: int) -> RandomMap:
    if d < 1:
        raise ValueError(f"dimension must be positive, got d={d}")
    return RandomMap(kind=IDENTITY, in_dim=d, out_dim=d, seed=0)


def apply(mapping: RandomMap, X: np.ndarray) -> np.ndarray:
    """Map rows of X (or a single vector) through the frozen projection."""
    X = np.asarray(X, dtype=np.float64)
    single = X.ndim == 1
    if single:
        X = X[None, :]
    if X.ndim != 2 or X.shape[1] != mapping.in_dim:
        raise ValueError(
            f"input has {X.shape[-1] if X.ndim else 0} columns, mapping expects {mapping.in_dim}"
        )
    if mapping.kind == IDENTITY:
        out = X
    elif mapping.kind == GAUSSIAN_RP:
        out = (X @ mapping.weights.T) / math.sqrt(mapping.out_dim)
    elif mapping.kind == SPARSE_RP:
        out = X @ mapping.weights.T
    elif mapping.kind == RFF:
        out = math.sqrt(2.0 / mapping.out_dim) * np.cos(X @ mapping.weights.T + mapping.offsets)
    else:
        raise ValueError(f"unknown mapping kind {mapping.kind!r}")
    return out[0] if single else out


def pairwise_target(mapping: RandomMap, x_i: np.ndarray, x_j: np.ndarray) -> float:
    """Supervisory label for a pair: the dot product of the mapped vectors."""
    return float(np.dot(apply(mapping, x_i), apply(mapping, x_j)))


def rbf_kernel(x: np.ndarray, y: np.ndarray, sigma: float) -> float:
    """exp(-||x-y||^2 / (2 sigma^2)); the oracle the RFF mapping approximates."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise ValueError(f"shape mismatch: {x.shape} vs {y.shape}")
    if sigma <= 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    diff = x - y
    return float(np.exp(-np.dot(diff, diff) / (2.0 * sigma * sigma)))


def jl_audit(
    mapping: RandomMap,
    X: np.ndarray,
    epsilon: float,
    n_pairs: int = 2000,
    seed: int = 0,
) -> JlAudit:
    """Measure how often projected inner products drift by >= epsilon.

    Rows are rescaled by the largest row norm so every vector has norm <= 1
    (the preservation guarantee is stated for such vectors); training never
    applies this rescaling. The reported bound is 4 exp(-(eps^2-eps^3) K / 4).
    """
    if mapping.kind != GAUSSIAN_RP:
        raise ValueError(f"jl_audit requires a {GAUSSIAN_RP} mapping, got {mapping.kind!r}")
    if not 0.0 < epsilon < 0.5:
        raise ValueError(f"epsilon must be in (0, 0.5), got {epsilon}")
    if n_pairs < 1:
        raise ValueError(f"n_pairs must be positive, got {n_pairs}")
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    max_norm = float(np.max(np.linalg.norm(X, axis=1)))
    Xh = X / max_norm if max_norm > 0 else X
    P = apply(mapping, Xh)
    rng = stream(seed)
    n = Xh.shape[0]
    i = rng.integers(0, n, size=n_pairs)
    j = rng.integers(0, n, size=n_pairs)
    orig = np.sum(Xh[i] * Xh[j], axis=1)
    proj = np.sum(P[i] * P[j], axis=1)
    violation_rate = float(np.mean(np.abs(orig - proj) >= epsilon))
    k = mapping.out_dim
    bound = 4.0 * math.exp(-(epsilon**2 - epsilon**3) * k / 4.0)
    return JlAudit(
        epsilon=epsilon, sample_pairs=n_pairs, violation_rate=violation_rate, bound=bound
    )
