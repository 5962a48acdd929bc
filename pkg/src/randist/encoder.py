"""The trainable representation: one affine layer plus leaky-ReLU, an
optional linear decoder, analytic gradients and the SGD training loop.

Each SGD step regresses the full batch Gram: every ordered pair inside the
shuffled batch, self-pairs included, so each embedding norm is anchored to
its supervisory value. Subsampling pairs leaves the norms under-determined
and makes the near-convergence gradient noisy enough to escape at the
fixed learning rate. Supervisory targets are dot products under the frozen
random mapping, precomputed once since the mapping never changes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import NumericError
from .losses import PairBatch
from .mappings import RandomMap, apply
from .rng import child_seed, stream

TASKS = ("anomaly", "clustering")


@dataclass
class TrainConfig:
    m: int
    epochs: int
    task: str = "anomaly"
    batch_size: int = 192
    learning_rate: float = 0.1
    use_pair_loss: bool = True
    use_aux_loss: bool = True
    aux_weight: float = 1.0
    leaky_slope: float = 0.01
    seed: int = 0

    def __post_init__(self):
        problems = []
        if self.m < 1:
            problems.append(f"m must be >= 1, got {self.m}")
        if self.epochs < 1:
            problems.append(f"epochs must be >= 1, got {self.epochs}")
        if self.batch_size < 2:
            problems.append(f"batch_size must be >= 2, got {self.batch_size}")
        if self.learning_rate <= 0:
            problems.append(f"learning_rate must be positive, got {self.learning_rate}")
        if self.aux_weight < 0:
            problems.append(f"aux_weight must be >= 0, got {self.aux_weight}")
        if self.task not in TASKS:
            problems.append(f"task must be one of {TASKS}, got {self.task!r}")
        if self.seed < 0:
            problems.append(f"seed must be non-negative, got {self.seed}")
        if problems:
            raise ValueError("; ".join(problems))

    @classmethod
    def anomaly_defaults(cls, **overrides) -> "TrainConfig":
        args = dict(m=50, epochs=200, task="anomaly")
        args.update(overrides)
        return cls(**args)

    @classmethod
    def clustering_defaults(cls, **overrides) -> "TrainConfig":
        args = dict(m=1024, epochs=1000, task="clustering")
        args.update(overrides)
        return cls(**args)


@dataclass
class EncoderModel:
    w: np.ndarray  # M x D
    b: np.ndarray  # M
    leaky_slope: float
    random_map: RandomMap
    decoder_w: Optional[np.ndarray] = None  # D x M, present iff reconstruction loss
    decoder_b: Optional[np.ndarray] = None  # D

    @property
    def m(self) -> int:
        return self.w.shape[0]

    @property
    def d(self) -> int:
        return self.w.shape[1]

    @property
    def has_decoder(self) -> bool:
        return self.decoder_w is not None

    def forward(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.d,):
            raise ValueError(f"expected input of length {self.d}, got shape {x.shape}")
        z = self.w @ x + self.b
        return np.where(z > 0.0, z, self.leaky_slope * z)

    def forward_batch(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.d:
            raise ValueError(f"expected an N x {self.d} matrix, got shape {X.shape}")
        z = X @ self.w.T + self.b
        return np.where(z > 0.0, z, self.leaky_slope * z)

    def decode(self, h: np.ndarray) -> np.ndarray:
        if not self.has_decoder:
            raise ValueError("model has no decoder")
        h = np.asarray(h, dtype=np.float64)
        if h.shape != (self.m,):
            raise ValueError(f"expected hidden vector of length {self.m}, got shape {h.shape}")
        return self.decoder_w @ h + self.decoder_b


@dataclass
class LossTrace:
    total: np.ndarray
    pair: np.ndarray
    aux: np.ndarray


@dataclass
class Gradients:
    dw: np.ndarray
    db: np.ndarray
    ddecoder_w: Optional[np.ndarray] = None
    ddecoder_b: Optional[np.ndarray] = None


def forward(model: EncoderModel, x: np.ndarray) -> np.ndarray:
    return model.forward(x)


def decode(model: EncoderModel, h: np.ndarray) -> np.ndarray:
    return model.decode(h)


def init_model(
    d: int, m: int, config: TrainConfig, random_map: RandomMap, seed: int
) -> EncoderModel:
    """Fresh parameters: W ~ N(0, 1/(d*m)), b = 0; decoder ~ N(0, 1/m).

    The 1/m factor keeps the initial embedded dot products O(1) whatever
    the representation width; without it the squared-dot-product loss can
    run away at the fixed 0.1 learning rate on standardized data.
    """
    if d < 1 or m < 1:
        raise ValueError(f"dimensions must be positive, got d={d}, m={m}")
    if config.use_aux_loss and config.task == "anomaly" and m != random_map.out_dim:
        raise ValueError(
            f"novelty loss needs m == mapping out_dim, got m={m}, out_dim={random_map.out_dim}"
        )
    rng = stream(seed)
    w = rng.normal(0.0, math.sqrt(1.0 / (d * m)), size=(m, d))
    b = np.zeros(m)
    decoder_w = decoder_b = None
    if config.use_aux_loss and config.task == "clustering":
        decoder_w = rng.normal(0.0, math.sqrt(1.0 / m), size=(d, m))
        decoder_b = np.zeros(d)
    return EncoderModel(
        w=w,
        b=b,
        leaky_slope=config.leaky_slope,
        random_map=random_map,
        decoder_w=decoder_w,
        decoder_b=decoder_b,
    )


def grad_batch(
    model: EncoderModel, X: np.ndarray, pairs: PairBatch, config: TrainConfig
) -> tuple[Gradients, tuple[float, float, float]]:
    """Exact gradients of the batch objective, plus (total, pair, aux) losses.

    The objective is the mean pair loss plus aux_weight times the mean
    auxiliary loss over the distinct points of the batch. The leaky-ReLU
    subgradient at exactly 0 uses the negative-side slope.
    """
    if not (config.use_pair_loss or config.use_aux_loss):
        raise ValueError("no loss enabled")
    X = np.asarray(X, dtype=np.float64)
    uniq, inv = np.unique(np.concatenate([pairs.i, pairs.j]), return_inverse=True)
    n_pairs = len(pairs)
    il, jl = inv[:n_pairs], inv[n_pairs:]
    Xu = X[uniq]
    Z = Xu @ model.w.T + model.b
    S = np.where(Z > 0.0, 1.0, model.leaky_slope)
    H = Z * S

    dH = np.zeros_like(H)
    loss_pair = 0.0
    if config.use_pair_loss:
        r = np.sum(H[il] * H[jl], axis=1) - pairs.y
        loss_pair = float(np.mean(r * r))
        coef = (2.0 / n_pairs) * r[:, None]
        np.add.at(dH, il, coef * H[jl])
        np.add.at(dH, jl, coef * H[il])

    loss_aux = 0.0
    ddec_w = ddec_b = None
    lam = config.aux_weight
    n_u = uniq.size
    if config.use_aux_loss:
        if config.task == "anomaly":
            res = H - apply(model.random_map, Xu)
            loss_aux = float(np.mean(res * res))
            dH += (2.0 * lam / (model.m * n_u)) * res
        else:
            res = H @ model.decoder_w.T + model.decoder_b - Xu
            loss_aux = float(np.mean(res * res))
            scale = 2.0 * lam / (model.d * n_u)
            ddec_w = scale * (res.T @ H)
            ddec_b = scale * res.sum(axis=0)
            dH += scale * (res @ model.decoder_w)

    dZ = dH * S
    dw = dZ.T @ Xu
    db = dZ.sum(axis=0)

    total = 0.0
    if config.use_pair_loss:
        total += loss_pair
    if config.use_aux_loss:
        total += lam * loss_aux
    if not math.isfinite(total):
        raise NumericError(f"non-finite batch loss {total}")
    return Gradients(dw=dw, db=db, ddecoder_w=ddec_w, ddecoder_b=ddec_b), (
        total,
        loss_pair,
        loss_aux,
    )


def _grad_batch_gram(
    model: EncoderModel,
    Xb: np.ndarray,
    targets_b: Optional[np.ndarray],
    config: TrainConfig,
) -> tuple[Gradients, tuple[float, float, float]]:
    """grad_batch specialised to all ordered pairs of one batch.

    Same gradients as grad_batch on the full index product, but dense
    matrix products instead of scatter-adds.
    """
    nb = Xb.shape[0]
    Z = Xb @ model.w.T + model.b
    S = np.where(Z > 0.0, 1.0, model.leaky_slope)
    H = Z * S

    dH = np.zeros_like(H)
    loss_pair = 0.0
    if config.use_pair_loss:
        R = H @ H.T - targets_b @ targets_b.T
        loss_pair = float(np.mean(R * R))
        dH += (4.0 / (nb * nb)) * (R @ H)

    loss_aux = 0.0
    ddec_w = ddec_b = None
    lam = config.aux_weight
    if config.use_aux_loss:
        if config.task == "anomaly":
            res = H - apply(model.random_map, Xb)
            loss_aux = float(np.mean(res * res))
            dH += (2.0 * lam / (model.m * nb)) * res
        else:
            res = H @ model.decoder_w.T + model.decoder_b - Xb
            loss_aux = float(np.mean(res * res))
            scale = 2.0 * lam / (model.d * nb)
            ddec_w = scale * (res.T @ H)
            ddec_b = scale * res.sum(axis=0)
            dH += scale * (res @ model.decoder_w)

    dZ = dH * S
    dw = dZ.T @ Xb
    db = dZ.sum(axis=0)

    total = 0.0
    if config.use_pair_loss:
        total += loss_pair
    if config.use_aux_loss:
        total += lam * loss_aux
    if not math.isfinite(total):
        raise NumericError(f"non-finite batch loss {total}")
    return Gradients(dw=dw, db=db, ddecoder_w=ddec_w, ddecoder_b=ddec_b), (
        total,
        loss_pair,
        loss_aux,
    )


def train(
    X: np.ndarray, config: TrainConfig, random_map: RandomMap
) -> tuple[EncoderModel, LossTrace]:
    """Plain SGD over within-batch pair products; returns model and loss trace.

    Deterministic in (X, config, random_map): the shuffle and the
    initialization both derive from config.seed. A trailing shuffled batch
    of a single row is dropped (it cannot be paired).
    """
    X = np.ascontiguousarray(np.asarray(X, dtype=np.float64))
    if X.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {X.shape}")
    n, d = X.shape
    if n < 2:
        raise ValueError(f"need at least 2 rows to form pairs, got {n}")
    if d != random_map.in_dim:
        raise ValueError(f"data has {d} columns, mapping expects {random_map.in_dim}")
    if not (config.use_pair_loss or config.use_aux_loss):
        raise ValueError("no loss enabled")

    model = init_model(d, config.m, config, random_map, seed=child_seed(config.seed, 0))
    targets = apply(random_map, X) if config.use_pair_loss else None
    shuffle_rng = stream(child_seed(config.seed, 1))

    lr = config.learning_rate
    trace = LossTrace(
        total=np.zeros(config.epochs), pair=np.zeros(config.epochs), aux=np.zeros(config.epochs)
    )
    for epoch in range(config.epochs):
        perm = shuffle_rng.permutation(n)
        sums = np.zeros(3)
        batches = 0
        for start in range(0, n, config.batch_size):
            idx = perm[start : start + config.batch_size]
            if idx.size < 2:
                continue
            try:
                grads, losses = _grad_batch_gram(
                    model, X[idx], None if targets is None else targets[idx], config
                )
            except NumericError as err:
                raise NumericError(f"training diverged at epoch {epoch}: {err}") from err
            model.w -= lr * grads.dw
            model.b -= lr * grads.db
            if grads.ddecoder_w is not None:
                model.decoder_w -= lr * grads.ddecoder_w
                model.decoder_b -= lr * grads.ddecoder_b
            sums += losses
            batches += 1
        means = sums / batches
        if not np.all(np.isfinite(means)):
            raise NumericError(f"training diverged at epoch {epoch}: mean loss {means[0]}")
        trace.total[epoch], trace.pair[epoch], trace.aux[epoch] = means
    return model, trace
