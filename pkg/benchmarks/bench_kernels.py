#!/usr/bin/env python3
"""Compare the compiled text kernels against the pure-Python fallback.

Usage: python benchmarks/bench_kernels.py [--repeats N]

Times the LCS dynamic programme and character-3-gram counting on workloads
shaped like real explanation evaluation (tens-to-hundreds of tokens per
side, whole-corpus batches) and prints per-backend throughput.
"""

from __future__ import annotations

import argparse
import random
import time
from array import array

from claimcheck.kernels import BACKEND, pure

try:
    from claimcheck.kernels import _textcore
except ImportError:
    _textcore = None


def _time(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def bench_lcs(repeats: int) -> list[tuple[str, str, float]]:
    rng = random.Random(1)
    rows = []
    for la, lb, pairs in ((30, 40, 2000), (120, 150, 300), (400, 500, 40)):
        data = [
            (
                array("I", (rng.randrange(50) for _ in range(la))),
                array("I", (rng.randrange(50) for _ in range(lb))),
            )
            for _ in range(pairs)
        ]

        def run(impl):
            def body():
                for a, b in data:
                    impl.lcs_length(a, b)

            return body

        label = f"lcs {la}x{lb} x{pairs}"
        rows.append((label, "pure", _time(run(pure), repeats)))
        if _textcore is not None:
            rows.append((label, "compiled", _time(run(_textcore), repeats)))
    return rows


def bench_ngrams(repeats: int) -> list[tuple[str, str, float]]:
    rng = random.Random(2)
    alphabet = "ابتثجحخدذرزسشصضطظعغفقكلمنهوي "
    rows = []
    for length, texts in ((80, 3000), (600, 400)):
        data = [
            "".join(rng.choice(alphabet) for _ in range(length)) for _ in range(texts)
        ]

        def run(impl):
            def body():
                for text in data:
                    impl.char_ngram_counts(text, 3)

            return body

        label = f"3grams len{length} x{texts}"
        rows.append((label, "pure", _time(run(pure), repeats)))
        if _textcore is not None:
            rows.append((label, "compiled", _time(run(_textcore), repeats)))
    return rows


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    print(f"active backend: {BACKEND}")
    if _textcore is None:
        print("compiled kernels unavailable; timing pure implementation only")

    rows = bench_lcs(args.repeats) + bench_ngrams(args.repeats)
    by_label: dict[str, dict[str, float]] = {}
    for label, backend, seconds in rows:
        by_label.setdefault(label, {})[backend] = seconds

    width = max(len(label) for label in by_label)
    print(f"{'workload'.ljust(width)}  {'pure':>10}  {'compiled':>10}  {'speedup':>8}")
    for label, timings in by_label.items():
        pure_s = timings["pure"]
        if "compiled" in timings:
            comp_s = timings["compiled"]
            speedup = f"{pure_s / comp_s:7.1f}x"
            comp_text = f"{comp_s * 1000:9.1f}ms"
        else:
            speedup = "-"
            comp_text = "-"
        print(
            f"{label.ljust(width)}  {pure_s * 1000:9.1f}ms  {comp_text}  {speedup}"
        )


if __name__ == "__main__":
    main()
