#!/usr/bin/env python3
"""Compare the compiled kernels against the pure-Python fallback.

Times the two hot loops on synthetic inputs: CoNLL-U harvesting and
association weighting. Run from the repo root after `pip install -e .`:

    python benchmarks/bench_kernels.py [--sentences 20000] [--edges 2000000]
"""

import argparse
import random
import time

import numpy as np

from eventfit import kernels


def synth_corpus_lines(n_sentences: int, seed: int = 5) -> list[str]:
    rng = random.Random(seed)
    agents = [f"agent{i}" for i in range(40)]
    verbs = [f"verb{i}" for i in range(25)]
    objects = [f"thing{i}" for i in range(60)]
    preps = ["with", "on", "during", "in"]
    lines: list[str] = []
    for _ in range(n_sentences):
        a, v, o = rng.choice(agents), rng.choice(verbs), rng.choice(objects)
        lines += [
            "1\tThe\tthe\tDET\tDT\t_\t2\tdet\t_\t_\n",
            f"2\t{a}\t{a}\tNOUN\tNN\t_\t3\tnsubj\t_\t_\n",
            f"3\t{v}s\t{v}\tVERB\tVBZ\t_\t0\troot\t_\t_\n",
            "4\tthe\tthe\tDET\tDT\t_\t5\tdet\t_\t_\n",
            f"5\t{o}\t{o}\tNOUN\tNN\t_\t3\tobj\t_\t_\n",
        ]
        if rng.random() < 0.5:
            p, n = rng.choice(preps), rng.choice(objects)
            lines += [
                f"6\t{p}\t{p}\tADP\tIN\t_\t8\tcase\t_\t_\n",
                "7\tthe\tthe\tDET\tDT\t_\t8\tdet\t_\t_\n",
                f"8\t{n}\t{n}\tNOUN\tNN\t_\t3\tobl\t_\t_\n",
                "9\t.\t.\tPUNCT\t.\t_\t3\tpunct\t_\t_\n",
            ]
        else:
            lines.append("6\t.\t.\tPUNCT\t.\t_\t3\tpunct\t_\t_\n")
        lines.append("\n")
    return lines


def bench_harvest(lines: list[str], repeats: int = 3) -> dict[str, float]:
    harvest = frozenset({"nsubj", "obj", "iobj", "obl", "nmod", "amod"})
    verb_upos = frozenset({"VERB"})
    timings = {}
    reference = None
    for name, impl in sorted(kernels.backends().items()):
        best = float("inf")
        for _ in range(repeats):
            node, edge, event, totals = {}, {}, {}, {}
            start = time.perf_counter()
            impl.harvest_lines(lines, harvest, 3, verb_upos, node, edge, event, totals)
            best = min(best, time.perf_counter() - start)
            result = (node, edge, event, totals)
        if reference is None:
            reference = result
        elif result != reference:
            raise AssertionError(f"{name} kernel disagrees with reference output")
        timings[name] = best
    return timings


def bench_assoc(n_edges: int, repeats: int = 3, seed: int = 9) -> dict[str, float]:
    rng = np.random.default_rng(seed)
    counts = rng.integers(1, 60, n_edges).astype(np.float64)
    heads = counts + rng.integers(0, 50, n_edges)
    deps = counts + rng.integers(0, 50, n_edges)
    totals = heads + deps + rng.integers(1, 200, n_edges)
    timings = {}
    reference = None
    for name, impl in sorted(kernels.backends().items()):
        best = float("inf")
        for _ in range(repeats):
            start = time.perf_counter()
            pmi, lmi = impl.assoc_scores(counts, heads, deps, totals)
            best = min(best, time.perf_counter() - start)
        if reference is None:
            reference = (pmi, lmi)
        else:
            assert np.array_equal(pmi, reference[0]) and np.array_equal(lmi, reference[1])
        timings[name] = best
    return timings


def report(title: str, timings: dict[str, float], unit_count: int, unit: str) -> None:
    print(f"\n{title}")
    baseline = timings.get("pure")
    for name in sorted(timings):
        rate = unit_count / timings[name] / 1e6
        speedup = "" if name == "pure" or baseline is None else \
            f"  ({baseline / timings[name]:.2f}x vs pure)"
        print(f"  {name:<8} {timings[name]*1000:9.1f} ms   {rate:7.2f} M{unit}/s{speedup}")


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sentences", type=int, default=20000)
    parser.add_argument("--edges", type=int, default=2_000_000)
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    print(f"available kernel backends: {sorted(kernels.backends())}")
    if "native" not in kernels.backends():
        print("note: compiled extension not built; timing the pure fallback only")

    lines = synth_corpus_lines(args.sentences)
    report(f"harvest_lines ({args.sentences} sentences, {len(lines)} lines)",
           bench_harvest(lines, args.repeats), len(lines), "lines")

    report(f"assoc_scores ({args.edges} edges)",
           bench_assoc(args.edges, args.repeats), args.edges, "edges")


if __name__ == "__main__":
    main()
