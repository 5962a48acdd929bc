#!/usr/bin/env python3
"""Desk-scale anomaly experiment on synthetic shell data.

Trains the full detector plus its three ablations on the same seed and
prints an AUC table, mirroring how the decomposition experiments are run.
"""
import argparse
import sys
import time

from randist import BoostConfig, TrainConfig, run_anomaly, synth_anomaly


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n-normal", type=int, default=950)
    parser.add_argument("--n-anomaly", type=int, default=50)
    parser.add_argument("--dim", type=int, default=16)
    parser.add_argument("--members", type=int, default=10)
    parser.add_argument("--epochs", type=int, default=200)
    parser.add_argument("--seed", type=int, default=11)
    parser.add_argument("--data-seed", type=int, default=7)
    parser.add_argument("--source", choices=["rff", "srp", "identity"], default="rff")
    parser.add_argument("--workers", type=int, default=1)
    args = parser.parse_args(argv)

    data = synth_anomaly(args.n_normal, args.n_anomaly, args.dim, seed=args.data_seed)
    print(f"data: {data.n} rows, {data.d} columns, {data.labels.mean():.1%} anomalies")

    def config():
        return BoostConfig(
            train=TrainConfig.anomaly_defaults(epochs=args.epochs, seed=args.seed),
            members=args.members,
        )

    print(f"{'variant':<14} {'auc_roc':>8} {'auc_pr':>8} {'seconds':>8}")
    for ablation in ("none", "no_pair_loss", "no_aux_loss", "no_boosting"):
        t0 = time.perf_counter()
        result = run_anomaly(
            data, config(), ablation=ablation, source=args.source, workers=args.workers
        )
        label = "full" if ablation == "none" else ablation
        print(
            f"{label:<14} {result.auc_roc:>8.4f} {result.auc_pr:>8.4f} "
            f"{time.perf_counter() - t0:>8.1f}"
        )
    return 0


if __name__ == "__main__":
    sys.exit(main())
