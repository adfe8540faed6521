"""Compare the compiled and pure-Python kernels on the stdlib mini-corpus.

    python benchmarks/bench_kernels.py [--repeat N]
"""
from __future__ import annotations

import argparse
import time
from collections import Counter

from codebench import corpus, dedup, kernels, pytok, subword


def _best(fn, repeat: int) -> float:
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--files", type=int, default=240)
    args = ap.parse_args()

    paths = corpus.stdlib_manifest(limit=args.files)
    sources = [s for s in map(corpus.read_source, paths) if s is not None]
    counts = Counter(t.text for s in sources for t in pytok.tokenize(s))
    items = sorted(counts.items())
    vocab = subword.build_vocabulary(counts, 2000)
    known = set(vocab.entries)
    tokens = [t for t, _ in items]
    packed = dedup._Packed([dedup.similarity_key(s) for s in sources])
    n = len(sources)

    if "compiled" not in kernels.IMPLEMENTATIONS:
        print("compiled kernels unavailable; only the pure-Python timings are shown")
    print(f"{n} files, {len(items)} distinct tokens, vocabulary {len(vocab)}")
    print(f"{'kernel':<18} {'impl':<9} {'seconds':>9}")
    base: dict[str, float] = {}
    for name, impl in sorted(kernels.IMPLEMENTATIONS.items(), reverse=True):
        cases = {
            "greedy_segment": lambda: [impl.greedy_segment(t, vocab.id_of, vocab.max_len,
                                                           vocab.escape_base) for t in tokens],
            "count_substrings": lambda: impl.count_substrings(items, known, vocab.max_len),
            "similar_among": lambda: [impl.similar_among(packed.ids, packed.cnts, packed.offsets,
                                                         i, range(i), 4, 5, 7, 10)
                                      for i in range(n)],
        }
        for case, fn in cases.items():
            t = _best(fn, args.repeat)
            speed = f"  ({base[case] / t:.1f}x)" if case in base and name == "compiled" else ""
            base.setdefault(case, t)
            print(f"{case:<18} {name:<9} {t:>9.3f}{speed}")


if __name__ == "__main__":
    main()
