#!/usr/bin/env python3
"""Desk-scale clustering experiment: K-means quality on the learned space.

Compares the learned embedding against clustering the raw standardized
features, and optionally sweeps the supervisory source.
"""
import argparse
import sys

import numpy as np

from randist import TrainConfig, kmeans, nmi, pairwise_f, run_clustering, standardize, synth_blobs
from randist.rng import child_seed


def raw_baseline(data, restarts, seed):
    X = standardize(data)[0].features
    k = int(np.unique(data.labels).size)
    nmis, fs = [], []
    for r in range(restarts):
        result = kmeans(X, k, seed=child_seed(seed, r))
        nmis.append(nmi(data.labels, result.assignments))
        fs.append(pairwise_f(data.labels, result.assignments))
    return float(np.mean(nmis)), float(np.mean(fs))


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--clusters", type=int, default=4)
    parser.add_argument("--per-cluster", type=int, default=100)
    parser.add_argument("--dim", type=int, default=32)
    parser.add_argument("--m", type=int, default=64)
    parser.add_argument("--epochs", type=int, default=1000)
    parser.add_argument("--restarts", type=int, default=10)
    parser.add_argument("--seed", type=int, default=9)
    parser.add_argument("--data-seed", type=int, default=5)
    parser.add_argument("--all-sources", action="store_true",
                        help="also run the srp supervisory source")
    args = parser.parse_args(argv)

    data = synth_blobs(args.clusters, args.per_cluster, args.dim, seed=args.data_seed)
    print(f"data: {data.n} rows, {data.d} columns, {args.clusters} clusters")

    base_nmi, base_f = raw_baseline(data, args.restarts, args.seed)
    print(f"{'space':<22} {'nmi':>14} {'f':>14}")
    print(f"{'raw standardized':<22} {base_nmi:>14.4f} {base_f:>14.4f}")

    sources = ["rff", "srp"] if args.all_sources else ["rff"]
    for source in sources:
        cfg = TrainConfig.clustering_defaults(m=args.m, epochs=args.epochs, seed=args.seed)
        result = run_clustering(data, cfg, restarts=args.restarts, source=source)
        print(
            f"{'learned (' + source + ')':<22} "
            f"{result.nmi_mean:>8.4f}+-{result.nmi_std:.3f} "
            f"{result.f_mean:>8.4f}+-{result.f_std:.3f}"
        )
    return 0


if __name__ == "__main__":
    sys.exit(main())
