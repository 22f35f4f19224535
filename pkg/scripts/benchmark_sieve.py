#!/usr/bin/env python3
"""Time the segmented sieve: counting, streaming, and the weighted sum."""

import argparse
import time

from gapsum import engine, sums


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--limits", default="1e8,1e9")
    parser.add_argument("--workers", type=int, default=None)
    args = parser.parse_args()
    limits = [int(float(x)) for x in args.limits.split(",")]

    for limit in limits:
        t0 = time.perf_counter()
        count = engine.prime_count(limit, workers=args.workers)
        t_count = time.perf_counter() - t0

        t0 = time.perf_counter()
        streamed = sum(len(b) for b in engine.prime_blocks(limit, workers=args.workers)) + 1
        t_stream = time.perf_counter() - t0
        assert streamed == count

        t0 = time.perf_counter()
        snap = sums.weighted_gap_sum(
            sums.WeightSpec(0.0), prime_limit=limit, workers=args.workers
        )
        t_sum = time.perf_counter() - t0

        rate = limit / t_stream / 1e6
        print(
            f"limit {limit:.1e}: pi={count} | count {t_count:.2f}s | "
            f"stream {t_stream:.2f}s ({rate:.0f} M/s) | sum(1/d) {t_sum:.2f}s "
            f"(value {snap.value:.6e})"
        )


if __name__ == "__main__":
    main()
