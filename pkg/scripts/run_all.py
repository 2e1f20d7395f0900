#!/usr/bin/env python3
"""Run every packaged experiment scan with its default config.

Usage: python3 scripts/run_all.py [--only fig2,fig6] [--out runs] [--threads N]

The full set takes a while at desk scale (the advantage diagram and the
long-horizon operator-entropy scan dominate); --only lets you cherry-pick.
"""

import argparse
import dataclasses
import sys
import time

from qmpso.experiments import default_config, experiment_names, run_experiment


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--only", help="comma-separated subset of experiment names")
    ap.add_argument("--out", default="runs")
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()

    names = experiment_names()
    if args.only:
        wanted = [n.strip() for n in args.only.split(",")]
        unknown = sorted(set(wanted) - set(names))
        if unknown:
            ap.error(f"unknown experiment(s) {unknown}; choose from {names}")
        names = wanted

    for name in names:
        cfg = dataclasses.replace(default_config(name), out_dir=args.out)
        t0 = time.time()
        res = run_experiment(name, cfg, threads=args.threads)
        print(f"{name}: {time.time() - t0:7.1f} s -> {res['out_dir']}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
