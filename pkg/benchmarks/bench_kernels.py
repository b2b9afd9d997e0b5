"""Compare the compiled and pure-Python scoring kernels.

Scores every benchmark query under a set of configurations with each
available backend, checks that the accumulated scores are bit-identical,
and reports wall time per backend.

    python3 benchmarks/bench_kernels.py [--docs 10000] [--queries 50] [--configs usecase1]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from qppconf import kernels
from qppconf.index import build_index
from qppconf.retrieval import accumulate
from qppconf.similarity import BM25, Rerank, enumerate_dfr_grid, usecase1_set
from qppconf.synthetic import generate


def sweep(index, configs, queries) -> tuple[float, list[np.ndarray]]:
    out = []
    t = time.perf_counter()
    for c in configs:
        for q in queries:
            acc, _ = accumulate(index, c, q)
            out.append(acc)
    return time.perf_counter() - t, out


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--docs", type=int, default=10_000)
    ap.add_argument("--queries", type=int, default=50)
    ap.add_argument("--configs", choices=["usecase1", "grid"], default="grid")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    bench = generate(args.seed, args.docs, args.queries)
    index = build_index(bench.docs)
    queries = [index.analyze(text) for _, text in bench.topics]
    if args.configs == "usecase1":
        configs = [c for c in usecase1_set() if not isinstance(c, Rerank)]
    else:
        configs = [BM25()] + enumerate_dfr_grid()
    postings = sum(len(index.postings(t)) for q in queries for t in set(q) if index.term_id(t) >= 0)
    print(f"{index.doc_count} docs, {len(queries)} queries, {len(configs)} configs, "
          f"{postings * len(configs)} postings scored per backend")

    results = {}
    for name in kernels.available_backends():
        kernels.score_postings = kernels.load_backend(name).score_postings
        elapsed, accs = sweep(index, configs, queries)
        results[name] = (elapsed, accs)
        print(f"{name:>8}: {elapsed:8.3f} s")
    names = list(results)
    if len(names) == 2:
        a, b = (results[n][1] for n in names)
        same = all(np.array_equal(x, y) for x, y in zip(a, b))
        print(f"speedup {results['python'][0] / results['cython'][0]:.1f}x, bit-identical: {same}")
    else:
        print("compiled backend not built; only the fallback was timed")


if __name__ == "__main__":
    main()
