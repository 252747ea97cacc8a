#!/usr/bin/env python3
"""Benchmark the jitted sampling kernel against the pure-numpy fallback.

The two paths share one function body (kernels.py applies numba.njit to it
unless ANNEALMON_PURE_NUMPY is set), so outputs must be bit-identical; this
script times both on a chimera-sized combined program and verifies that.

Usage: python benchmarks/bench_kernels.py [--m 4] [--reads 100] [--sweeps 10]
"""

import argparse
import time

import numpy as np

from annealmon.embedding import ChainStrengthPolicy, chimera_clique_embedding, embed_qubo
from annealmon.kernels import (
    _sample_batch_impl,
    compile_qubo,
    kernel_backend,
    sample_batch,
)
from annealmon.problems import IndicatorSpec, gen_er_graph, gen_indicator, mc_qubo
from annealmon.qubo import autoscale, combine_with_indicator
from annealmon.topology import chimera, idle_region


def build_program(m: int):
    hardware = chimera(m, 4)
    k = 4 * m
    emb = chimera_clique_embedding(hardware, k)
    problem = mc_qubo(gen_er_graph(k, 0.5, 7))
    hw_problem = embed_qubo(problem, emb, ChainStrengthPolicy("utc", prefactor=1.0))
    region = idle_region(hardware, emb.footprint)
    indicator = gen_indicator(IndicatorSpec("pi1", region, seed=11))
    combined = combine_with_indicator(hw_problem, indicator)
    scaled, _ = autoscale(combined.combined)
    return compile_qubo(scaled)


def run_path(fn, compiled, beta, sweeps, init_u, acc_u, repeats):
    best = float("inf")
    result = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        result = fn(compiled, beta, sweeps, init_u, acc_u)
        best = min(best, time.perf_counter() - t0)
    return result, best


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--m", type=int, default=4, help="chimera grid size")
    parser.add_argument("--reads", type=int, default=100)
    parser.add_argument("--sweeps", type=int, default=10)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    compiled = build_program(args.m)
    n = compiled.num_variables
    rng = np.random.default_rng(0)
    init_u = rng.random((args.reads, n))
    acc_u = rng.random((args.reads, args.sweeps * n))
    flips = args.reads * args.sweeps * n

    print(f"model: {n} variables, {compiled.pair_val.size} couplers")
    print(f"batch: {args.reads} reads x {args.sweeps} sweeps = {flips:,} flip attempts")
    print(f"active backend: {kernel_backend()}")

    # warm up the jit once so compilation is not timed
    sample_batch(compiled, 1.0, args.sweeps, init_u[:1], acc_u[:1])

    (states_a, energies_a), t_active = run_path(
        sample_batch, compiled, 1.0, args.sweeps, init_u, acc_u, args.repeats
    )

    def fallback(comp, beta, sweeps, iu, au):
        return _sample_batch_impl(
            comp.h, comp.indptr, comp.indices, comp.weights,
            comp.lin_pos, comp.lin_val, comp.pair_i, comp.pair_j, comp.pair_val,
            beta, iu, au,
        )

    (states_b, energies_b), t_plain = run_path(
        fallback, compiled, 1.0, args.sweeps, init_u, acc_u, args.repeats
    )

    identical = np.array_equal(states_a, states_b) and np.array_equal(energies_a, energies_b)
    print(f"{kernel_backend():>10}: {t_active * 1e3:9.2f} ms  ({flips / t_active / 1e6:8.1f} Mflip/s)")
    print(f"{'python':>10}: {t_plain * 1e3:9.2f} ms  ({flips / t_plain / 1e6:8.1f} Mflip/s)")
    print(f"speedup: {t_plain / t_active:.1f}x")
    print(f"outputs bit-identical: {identical}")
    return 0 if identical else 1


if __name__ == "__main__":
    raise SystemExit(main())
