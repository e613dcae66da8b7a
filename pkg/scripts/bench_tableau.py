#!/usr/bin/env python3
"""Tableau measurement throughput microbenchmark.

Documented floor: >= 1e4 single-qubit Pauli measurements per second at
n = 1000.  Two workloads: a cluster state (sparse rows, the typical case
for this package) and a CNOT-scrambled state (dense rows, worst case).

Usage: python scripts/bench_tableau.py [--n 1000] [--shots 20000]
"""
import argparse
import time

from mbqc.graphs import LatticeSpec, build_lattice
from mbqc.rng import OutcomeSource, make_rng
from mbqc.tableau import graph_state_tableau


def bench(t, shots, rng):
    src = OutcomeSource(rng=rng)
    qubits = rng.integers(0, t.n, size=shots)
    bases = rng.integers(0, 3, size=shots)
    names = "XYZ"
    t0 = time.perf_counter()
    for q, b in zip(qubits, bases):
        t.measure_pauli(names[b], int(q), src)
    return shots / (time.perf_counter() - t0)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=1000)
    ap.add_argument("--shots", type=int, default=20000)
    ap.add_argument("--seed", type=int, default=42)
    args = ap.parse_args()

    rows = max(1, round(args.n ** 0.5 * 0.8))
    cols = max(1, args.n // rows)
    n = rows * cols
    rng = make_rng(args.seed)

    t = graph_state_tableau(build_lattice(LatticeSpec("grid2d", [rows, cols])))
    rate = bench(t, args.shots, rng)
    print(f"cluster state   n={n}: {rate:>10,.0f} measurements/s")

    t = graph_state_tableau(build_lattice(LatticeSpec("grid2d", [rows, cols])))
    for _ in range(2 * n):
        a, b = rng.integers(0, n, size=2)
        if a != b:
            t.apply_clifford("CNOT", [int(a), int(b)])
    rate = bench(t, args.shots // 2, rng)
    print(f"scrambled state n={n}: {rate:>10,.0f} measurements/s")


if __name__ == "__main__":
    main()
