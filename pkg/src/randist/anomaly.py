"""Anomaly detection: novelty scoring, iterative top-fraction filtering and
an ensemble of independently seeded members.

Each member owns its own frozen mapping and model. Filtering ("boosting")
retrains from a fresh initialization after dropping the highest-scoring
fraction of the current training rows, so contaminating anomalies stop
biasing the fit. Scores are always computed on the full dataset; filtering
only changes training membership.
"""
from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .data import Dataset, standardize as standardize_dataset
from .encoder import EncoderModel, LossTrace, TrainConfig, train
from .losses import novelty_loss
from .mappings import RandomMap, identity_map, rff, sparse_rp
from .metrics import auc_pr, auc_roc
from .rng import child_seed

ABLATIONS = ("none", "no_pair_loss", "no_aux_loss", "no_boosting")
SOURCES = ("rff", "srp", "identity")


@dataclass
class BoostConfig:
    train: TrainConfig
    members: int = 30
    filter_fraction: float = 0.05
    filter_rounds: int = 1
    source: str = "rff"
    bandwidth: Optional[float] = None  # rff source; median heuristic when None
    density: Optional[float] = None  # srp source

    def __post_init__(self):
        problems = []
        if self.members < 1:
            problems.append(f"members must be >= 1, got {self.members}")
        if not 0.0 <= self.filter_fraction < 0.5:
            problems.append(f"filter_fraction must be in [0, 0.5), got {self.filter_fraction}")
        if self.filter_rounds < 0:
            problems.append(f"filter_rounds must be >= 0, got {self.filter_rounds}")
        if self.source not in SOURCES:
            problems.append(f"source must be one of {SOURCES}, got {self.source!r}")
        if self.train.task != "anomaly":
            problems.append(f"anomaly pipeline needs task='anomaly', got {self.train.task!r}")
        if problems:
            raise ValueError("; ".join(problems))


@dataclass
class Member:
    model: EncoderModel
    mapping: RandomMap
    seed: int
    trace: LossTrace
    train_rows: int


@dataclass
class Ensemble:
    members: list = field(default_factory=list)

    @property
    def seeds(self) -> list:
        return [m.seed for m in self.members]


def anomaly_score(model: EncoderModel, x: np.ndarray) -> float:
    """The novelty value of x; higher means more anomalous."""
    return novelty_loss(model, x)


def score_rows(model: EncoderModel, X: np.ndarray) -> np.ndarray:
    """anomaly_score applied row by row (same code path, so values agree bit-exactly)."""
    X = np.asarray(X, dtype=np.float64)
    return np.array([anomaly_score(model, X[r]) for r in range(X.shape[0])])


def _build_map(d: int, config: BoostConfig, seed: int, X: np.ndarray) -> RandomMap:
    k = config.train.m  # novelty scoring requires M == K
    if config.source == "rff":
        return rff(d, k, bandwidth=config.bandwidth, data=X, seed=seed)
    if config.source == "srp":
        return sparse_rp(d, k, density=config.density, seed=seed)
    return identity_map(d)


def removal_count(fraction: float, n: int) -> int:
    """Rows dropped in one filtering round: floor(fraction * n), at least 1."""
    if fraction <= 0.0:
        return 0
    return max(1, math.floor(fraction * n))


def boost_train_member(
    X: np.ndarray, config: BoostConfig, member_seed: int
) -> Member:
    """Train one member: full fit, then filter-and-refit rounds.

    The member's mapping stays frozen across rounds; each refit starts from
    a fresh initialization (seed derived from member_seed and the round).
    Ties in the filtering scores are broken by stable row order.
    """
    X = np.asarray(X, dtype=np.float64)
    d = X.shape[1]
    mapping = _build_map(d, config, seed=child_seed(member_seed, 0), X=X)
    if config.train.m != mapping.out_dim:
        raise ValueError(
            f"anomaly scoring needs m == mapping out_dim, got {config.train.m} vs "
            f"{mapping.out_dim} (identity source forces m = data dim)"
        )

    active = np.arange(X.shape[0])

    def fit(round_idx: int):
        cfg = TrainConfig(
            m=config.train.m,
            epochs=config.train.epochs,
            task="anomaly",
            batch_size=config.train.batch_size,
            learning_rate=config.train.learning_rate,
            use_pair_loss=config.train.use_pair_loss,
            use_aux_loss=config.train.use_aux_loss,
            aux_weight=config.train.aux_weight,
            leaky_slope=config.train.leaky_slope,
            seed=child_seed(member_seed, 1 + round_idx),
        )
        return train(X[active], cfg, mapping)

    model, trace = fit(0)
    if config.filter_fraction > 0.0:
        for round_idx in range(1, config.filter_rounds + 1):
            n_remove = removal_count(config.filter_fraction, active.size)
            if active.size - n_remove < 2 * config.train.batch_size:
                raise ValueError(
                    f"filtering at round {round_idx} would leave "
                    f"{active.size - n_remove} rows, need at least {2 * config.train.batch_size}"
                )
            scores = score_rows(model, X[active])
            order = np.argsort(-scores, kind="mergesort")
            active = np.sort(active[order[n_remove:]])
            model, trace = fit(round_idx)
    return Member(
        model=model, mapping=mapping, seed=member_seed, trace=trace, train_rows=int(active.size)
    )


def fit_ensemble(X: np.ndarray, config: BoostConfig, workers: int = 1) -> Ensemble:
    """Boost-train `members` independently seeded members."""
    seeds = [child_seed(config.train.seed, i) for i in range(config.members)]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            members = list(pool.map(lambda s: boost_train_member(X, config, s), seeds))
    else:
        members = [boost_train_member(X, config, s) for s in seeds]
    return Ensemble(members=members)


def ensemble_score(ensemble: Ensemble, X: np.ndarray) -> np.ndarray:
    """Per-row arithmetic mean of the member anomaly scores."""
    if not ensemble.members:
        raise ValueError("empty ensemble")
    X = np.asarray(X, dtype=np.float64)
    per_member = np.stack([score_rows(m.model, X) for m in ensemble.members])
    return per_member.mean(axis=0)


@dataclass
class AnomalyResult:
    scores: np.ndarray
    ensemble: Ensemble
    auc_roc: Optional[float] = None
    auc_pr: Optional[float] = None
    train_seconds: float = 0.0
    score_seconds: float = 0.0


def run_anomaly(
    data: Dataset,
    config: Optional[BoostConfig] = None,
    ablation: str = "none",
    source: str = "rff",
    standardize: bool = True,
    workers: int = 1,
) -> AnomalyResult:
    """Full detector: configure per ablation/source, fit, score, evaluate.

    Metrics are filled only when labels are present; scores never need
    them. For the identity source the representation width is forced to
    the data dimension so novelty scoring stays well-defined.
    """
    if ablation not in ABLATIONS:
        raise ValueError(f"ablation must be one of {ABLATIONS}, got {ablation!r}")
    if source not in SOURCES:
        raise ValueError(f"source must be one of {SOURCES}, got {source!r}")
    if config is None:
        config = BoostConfig(train=TrainConfig.anomaly_defaults())

    X = data.features
    if standardize:
        X = standardize_dataset(data)[0].features

    train_cfg = config.train
    m = X.shape[1] if source == "identity" else train_cfg.m
    use_pair = train_cfg.use_pair_loss and ablation != "no_pair_loss"
    use_aux = train_cfg.use_aux_loss and ablation != "no_aux_loss"
    if not (use_pair or use_aux):
        raise ValueError("no loss enabled: ablation removed the only active loss")
    cfg = BoostConfig(
        train=TrainConfig(
            m=m,
            epochs=train_cfg.epochs,
            task="anomaly",
            batch_size=train_cfg.batch_size,
            learning_rate=train_cfg.learning_rate,
            use_pair_loss=use_pair,
            use_aux_loss=use_aux,
            aux_weight=train_cfg.aux_weight,
            leaky_slope=train_cfg.leaky_slope,
            seed=train_cfg.seed,
        ),
        members=config.members,
        filter_fraction=config.filter_fraction,
        filter_rounds=0 if ablation == "no_boosting" else config.filter_rounds,
        source=source,
        bandwidth=config.bandwidth,
        density=config.density,
    )

    t0 = time.perf_counter()
    ensemble = fit_ensemble(X, cfg, workers=workers)
    t1 = time.perf_counter()
    scores = ensemble_score(ensemble, X)
    result = AnomalyResult(
        scores=scores,
        ensemble=ensemble,
        train_seconds=t1 - t0,
        score_seconds=time.perf_counter() - t1,
    )
    if data.labels is not None:
        result.auc_roc = auc_roc(scores, data.labels)
        result.auc_pr = auc_pr(scores, data.labels)
    return result
