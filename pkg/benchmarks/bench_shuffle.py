"""Compare the compiled and pure-Python shuffle kernels on mesh workloads.

Usage: python benchmarks/bench_shuffle.py [--repeat N] [--depth D]
"""

from __future__ import annotations

import argparse
import random
import statistics
import time
from importlib import resources

from gcmerge import _kernels
from gcmerge.parser import parse_global_type
from gcmerge.typealg import enumerate_paths, paths_automaton, shuffle_decompose


def _protocols():
    corpus = resources.files("gcmerge") / "corpus"
    out = {}
    for name in ("ab.gt", "gc.gt"):
        out.update(parse_global_type(corpus.joinpath(name).read_text(encoding="utf-8")))
    return out


def mesh_workload(depth: int) -> list[tuple[list, list, int, bool]]:
    """Maximal paths of Gc against the base paths of Ga and Gb, in both modes."""
    ps = _protocols()
    base = [w for g in (ps["Ga"], ps["Gb"]) for w in enumerate_paths(paths_automaton(g), 5) if w]
    words = [w for w, maximal in enumerate_paths(paths_automaton(ps["Gc"]), depth).items() if maximal]
    jobs = [(list(w), base, 2, False) for w in words]
    jobs += [(list(w), base, 3, True) for w in words]
    return jobs


def random_workload(seed: int, n: int) -> list[tuple[list, list, int, bool]]:
    """Encoded words over a small alphabet; roughly half have no decomposition."""
    rng = random.Random(seed)
    jobs = []
    for _ in range(n):
        base = [[rng.randrange(4) for _ in range(rng.randint(1, 3))] for _ in range(3)]
        p = []
        for _ in range(rng.randint(2, 4)):
            p = _interleave(rng, p, base[rng.randrange(3)])
        if rng.random() < 0.5:
            p[rng.randrange(len(p))] = rng.randrange(4)
        jobs.append((p, base, 3, False))
    return jobs


def _interleave(rng: random.Random, a: list, b: list) -> list:
    out, i, j = [], 0, 0
    while i < len(a) or j < len(b):
        if j == len(b) or (i < len(a) and rng.random() < 0.5):
            out.append(a[i])
            i += 1
        else:
            out.append(b[j])
            j += 1
    return out


def _time(fn, repeat: int) -> float:
    samples = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        samples.append(time.perf_counter() - t0)
    return statistics.median(samples)


def run_encoded(jobs, backend: str) -> list:
    return [_kernels.decompose(p, words, m, strict, backend) is not None for p, words, m, strict in jobs]


def run_events(jobs, backend: str) -> list:
    return [shuffle_decompose(p, words, m, strict=strict, backend=backend) is not None for p, words, m, strict in jobs]


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--depth", type=int, default=14, help="path depth for the mesh workload")
    ap.add_argument("--random", type=int, default=300, help="number of random encoded jobs")
    args = ap.parse_args(argv)

    backends = _kernels.available_backends()
    print(f"backends: {', '.join(backends)} (default {_kernels.BACKEND})")
    workloads = [
        (f"mesh Gc vs Ga,Gb (D={args.depth})", mesh_workload(args.depth), run_events),
        (f"random encoded words (n={args.random})", random_workload(7, args.random), run_encoded),
    ]
    print(f"{'workload':<36}{'jobs':>6}" + "".join(f"{b:>12}" for b in backends) + f"{'speedup':>10}")
    for title, jobs, runner in workloads:
        answers = {b: runner(jobs, b) for b in backends}
        if len({tuple(a) for a in answers.values()}) != 1:
            raise SystemExit(f"{title}: backends disagree")
        times = {b: _time(lambda b=b: runner(jobs, b), args.repeat) for b in backends}
        speed = f"{times['python'] / times['cython']:>9.1f}x" if "cython" in times else f"{'n/a':>10}"
        print(f"{title:<36}{len(jobs):>6}" + "".join(f"{times[b] * 1e3:>10.1f}ms" for b in backends) + speed)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
