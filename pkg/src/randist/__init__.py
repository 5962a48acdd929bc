"""randist: representation learning without labels by predicting inner
products in a frozen random feature space, plus the anomaly-detection and
clustering pipelines built on the learned embeddings."""

from ._version import __version__
from .data import (
    Dataset,
    StandardizeParams,
    load_csv,
    standardize,
    synth_anomaly,
    synth_blobs,
    unstandardize,
    write_csv,
)
from .encoder import EncoderModel, Gradients, LossTrace, TrainConfig, grad_batch, init_model, train
from .losses import (
    PairBatch,
    batch_objective,
    distance_prediction_loss,
    novelty_loss,
    reconstruction_loss,
)
from .mappings import (
    JlAudit,
    RandomMap,
    apply,
    gaussian_rp,
    identity_map,
    jl_audit,
    median_bandwidth,
    pairwise_target,
    rbf_kernel,
    rff,
    sparse_rp,
)
from .anomaly import (
    AnomalyResult,
    BoostConfig,
    Ensemble,
    anomaly_score,
    boost_train_member,
    ensemble_score,
    fit_ensemble,
    run_anomaly,
    score_rows,
)
from .clustering import ClusteringResult, KMeansResult, embed, kmeans, run_clustering
from .metrics import auc_pr, auc_roc, nmi, pairwise_f
from .persist import load_ensemble, load_model, save_ensemble, save_model
from .errors import ConfigError, DataError, ModelFileError, NumericError

__all__ = [
    "__version__",
    "Dataset",
    "StandardizeParams",
    "load_csv",
    "write_csv",
    "standardize",
    "unstandardize",
    "synth_blobs",
    "synth_anomaly",
    "RandomMap",
    "JlAudit",
    "gaussian_rp",
    "sparse_rp",
    "rff",
    "identity_map",
    "median_bandwidth",
    "apply",
    "pairwise_target",
    "rbf_kernel",
    "jl_audit",
    "PairBatch",
    "distance_prediction_loss",
    "reconstruction_loss",
    "novelty_loss",
    "batch_objective",
    "EncoderModel",
    "TrainConfig",
    "LossTrace",
    "Gradients",
    "init_model",
    "grad_batch",
    "train",
    "BoostConfig",
    "Ensemble",
    "AnomalyResult",
    "anomaly_score",
    "score_rows",
    "boost_train_member",
    "fit_ensemble",
    "ensemble_score",
    "run_anomaly",
    "KMeansResult",
    "ClusteringResult",
    "embed",
    "kmeans",
    "run_clustering",
    "auc_roc",
    "auc_pr",
    "nmi",
    "pairwise_f",
    "save_model",
    "load_model",
    "save_ensemble",
    "load_ensemble",
    "ConfigError",
    "DataError",
    "NumericError",
    "ModelFileError",
]
