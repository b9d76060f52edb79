#!/usr/bin/env python3
"""Run the default inclusion suite and write report.json, report.csv and trajectories.

    python scripts/run_suite.py --out results/suite --threads 4
"""
import argparse
import sys
import time

from lacusum.harness import DEFAULT_CONFIG, run_suite, write_report


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--config", help="suite config; default is every law on the builtin catalog")
    ap.add_argument("--out", default="results/suite")
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args()

    text = open(args.config).read() if args.config else DEFAULT_CONFIG
    t0 = time.perf_counter()
    rep = run_suite(text, threads=args.threads)
    write_report(rep, args.out)
    counts = rep.counts()
    print(f"{len(rep.results)} instances in {time.perf_counter() - t0:.1f}s: "
          + ", ".join(f"{k} {v}" for k, v in counts.items()))
    for r in rep.results:
        if r.status == "Violated":
            print("  violated:", r.law, *r.instance)
    return 1 if rep.violated else 0


if __name__ == "__main__":
    sys.exit(main())
