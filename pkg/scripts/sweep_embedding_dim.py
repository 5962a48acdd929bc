#!/usr/bin/env python3
"""Sensitivity of anomaly detection to the representation width.

Sweeps m (= projection width k) over a list of values on the synthetic
shell data and prints the resulting AUCs, one row per width.
"""
import argparse
import sys
import time

from randist import BoostConfig, TrainConfig, run_anomaly, synth_anomaly


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--dims", type=int, nargs="+", default=[10, 25, 50, 100, 200])
    parser.add_argument("--members", type=int, default=5)
    parser.add_argument("--epochs", type=int, default=200)
    parser.add_argument("--seed", type=int, default=11)
    parser.add_argument("--data-seed", type=int, default=7)
    args = parser.parse_args(argv)

    data = synth_anomaly(950, 50, 16, seed=args.data_seed)
    print(f"{'m=k':>6} {'auc_roc':>8} {'auc_pr':>8} {'seconds':>8}")
    for m in args.dims:
        cfg = BoostConfig(
            train=TrainConfig.anomaly_defaults(m=m, epochs=args.epochs, seed=args.seed),
            members=args.members,
        )
        t0 = time.perf_counter()
        result = run_anomaly(data, cfg)
        print(
            f"{m:>6} {result.auc_roc:>8.4f} {result.auc_pr:>8.4f} "
            f"{time.perf_counter() - t0:>8.1f}"
        )
    return 0


if __name__ == "__main__":
    sys.exit(main())
