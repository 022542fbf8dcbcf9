"""Benchmark the jitted kernels against the pure-numpy fallback.

Re-executes itself in two subprocesses (PLAYERSEG_NUMBA=1 / 0) so each path
is measured in a clean process, then prints a comparison table.

    python3 benchmarks/bench_kernels.py [--repeat 3]
"""

from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys
import time


def timed(fn, repeat):
    fn()  # warmup (jit compilation lands here)
    best = float("inf")
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def run_benchmarks(repeat):
    import numpy as np

    from playerseg import accel, clustering, dimred, embeddings, graphstats
    from playerseg.ingest import SocialGraph

    rng = np.random.default_rng(0)
    results = {}

    data = rng.normal(size=(20_000, 16))
    cents = rng.normal(size=(8, 16))

    def kmeans_step():
        labels = clustering.assign_step(data, cents)
        clustering.update_step(data, labels, 8)

    results["kmeans assign+update (20k x 16, K=8)"] = timed(kmeans_step, repeat)

    n = 1500
    edges = [
        (f"n{i}", f"n{j}", 1.0)
        for i in range(n)
        for j in rng.integers(0, n, size=8)
        if i != j
    ]
    graph = SocialGraph.from_edges(edges, extra_nodes=[f"n{i}" for i in range(n)])

    corpus = embeddings.random_walks(graph, 1, 10, seed=0)

    def walks():
        embeddings.random_walks(graph, 1, 10, seed=1)

    results[f"random walks ({graph.n_nodes} nodes x1 x10)"] = timed(walks, repeat)

    def skipgram():
        embeddings.skipgram_train(corpus, dim=32, epochs=1, seed=0)

    results["skip-gram epoch (15k walk tokens, dim=32)"] = timed(skipgram, repeat)

    def line():
        embeddings.line_train(graph, dim=32, samples=30_000, seed=0)

    results["line sampling (30k samples, dim=32)"] = timed(line, repeat)

    def pr():
        graphstats.pagerank(graph, tol=1e-12)

    results[f"pagerank ({graph.n_nodes} nodes, {graph.n_edges} edges)"] = timed(pr, repeat)

    def tri():
        graphstats.triangle_count(graph)
        graphstats.avg_clustering_coefficient(graph)

    results["triangles + clustering coeff"] = timed(tri, repeat)

    x = rng.normal(size=(1_000, 2))
    p = np.abs(rng.normal(size=(1_000, 1_000)))
    p = (p + p.T) / p.sum() / 2

    def tsne_step():
        grad = np.empty_like(x)
        dimred.tsne_forces_step(p, x, grad)

    results["t-SNE gradient step (N=1000)"] = timed(tsne_step, repeat)

    return {"numba": accel.NUMBA_ACTIVE, "results": results}


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument("--inner", action="store_true", help=argparse.SUPPRESS)
    args = parser.parse_args()

    if args.inner:
        print(json.dumps(run_benchmarks(args.repeat)))
        return

    rows = {}
    for flag in ("1", "0"):
        env = dict(os.environ, PLAYERSEG_NUMBA=flag)
        proc = subprocess.run(
            [sys.executable, __file__, "--inner", "--repeat", str(args.repeat)],
            env=env,
            capture_output=True,
            text=True,
        )
        if proc.returncode != 0:
            sys.stderr.write(proc.stderr)
            sys.exit(proc.returncode)
        payload = json.loads(proc.stdout.strip().splitlines()[-1])
        label = "numba" if payload["numba"] else "numpy"
        for name, secs in payload["results"].items():
            rows.setdefault(name, {})[label] = secs

    width = max(len(n) for n in rows)
    print(f"{'kernel':<{width}}  {'numba':>10}  {'numpy':>10}  {'speedup':>8}")
    for name, cols in rows.items():
        ratio = cols["numpy"] / cols["numba"] if cols.get("numba") else float("nan")
        print(
            f"{name:<{width}}  {cols.get('numba', float('nan')):>9.4f}s "
            f"{cols.get('numpy', float('nan')):>9.4f}s  {ratio:>7.1f}x"
        )


if __name__ == "__main__":
    main()
