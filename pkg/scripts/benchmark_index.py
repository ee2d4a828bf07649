#!/usr/bin/env python3
"""Index-construction scaling experiment.

Generates synthetic corpora at several target sizes, times suffix-array
construction plus duplicate enumeration single-threaded, and fits the
log-log scaling exponent. Prints a table and optionally writes JSON.
"""

import argparse
import json
import time

import numpy as np

from notedup.exact_match import build_index, find_duplicate_substrings
from notedup.synth import benchmark_spec, generate_synthetic_corpus


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument(
        "--sizes-mb",
        type=float,
        nargs="+",
        default=[10, 22, 50],
        help="target corpus sizes in MB",
    )
    parser.add_argument("--k", type=int, default=100, help="minimum match length")
    parser.add_argument("--seed", type=int, default=1)
    parser.add_argument("--out", help="write results JSON here")
    args = parser.parse_args()

    # warm the jit-compiled kernels before timing anything
    warm, _ = generate_synthetic_corpus(benchmark_spec(200_000), seed=0)
    find_duplicate_substrings(build_index(warm), args.k)

    rows = []
    print(f"{'target':>8} {'chars':>12} {'notes':>8} {'build+enum':>11} {'spans':>8}")
    for mb in args.sizes_mb:
        corpus, _ = generate_synthetic_corpus(
            benchmark_spec(int(mb * 1_000_000)), seed=args.seed
        )
        chars = sum(len(n.text) for n in corpus.notes)
        t0 = time.perf_counter()
        index = build_index(corpus)
        spans = find_duplicate_substrings(index, args.k)
        elapsed = time.perf_counter() - t0
        rows.append({"target_mb": mb, "chars": chars, "notes": len(corpus),
                     "seconds": elapsed, "spans": len(spans)})
        print(f"{mb:>7}M {chars:>12,} {len(corpus):>8,} {elapsed:>10.2f}s {len(spans):>8,}")

    if len(rows) >= 2:
        xs = np.log([r["chars"] for r in rows])
        ys = np.log([r["seconds"] for r in rows])
        exponent = float(np.polyfit(xs, ys, 1)[0])
        print(f"fitted scaling exponent: {exponent:.3f}")
    else:
        exponent = None

    if args.out:
        with open(args.out, "w", encoding="utf-8") as handle:
            json.dump({"rows": rows, "exponent": exponent}, handle, indent=2)
        print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
