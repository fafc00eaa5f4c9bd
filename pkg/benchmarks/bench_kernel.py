"""Benchmark the compiled sampling kernel against the pure-Python fallback.

Both backends consume the same random stream, so besides timing, the runs
are checked for bit-identical trajectories.

Usage: python benchmarks/bench_kernel.py [--quick]
"""

import argparse
import time

import numpy as np

from pbitsim import kernel
from pbitsim.coloring import plan_for
from pbitsim.hitting_set import encode_hitting_set, gen_hypergraph
from pbitsim.model import free_variables, full_clamp_mask
from pbitsim.solve import PtConfig, SaConfig, run_pt, run_sa
from pbitsim.spinglass import ErSpec, gen_er, ising_to_qubo


def time_case(fn):
    t0 = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - t0


def bench(name, runner, check=lambda a, b: np.array_equal(a.trajectory, b.trajectory)):
    rows = {}
    for backend in kernel.available_backends():
        kernel.use_backend(backend)
        rows[backend], rows[f"{backend}_s"] = time_case(runner)
    if "python" in rows and "compiled" in rows:
        agree = check(rows["compiled"], rows["python"])
        speedup = rows["python_s"] / rows["compiled_s"]
        print(f"{name:<42} compiled {rows['compiled_s']:8.3f}s   python {rows['python_s']:8.3f}s"
              f"   speedup {speedup:6.1f}x   identical={agree}")
    else:
        only = kernel.available_backends()[0]
        print(f"{name:<42} {only} {rows[f'{only}_s']:8.3f}s (single backend)")
    kernel.use_backend(kernel.available_backends()[0])


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--quick", action="store_true", help="smaller cases")
    args = parser.parse_args()
    scale = 0.1 if args.quick else 1.0

    # dense spin glass, singleton groups: drive cost dominated by row sums
    inst = gen_er(ErSpec(100, 1.0), seed=1)
    model = ising_to_qubo(inst)
    plan = plan_for(model)
    iters = int(20_000 * scale)
    cfg = SaConfig(beta_start=0.074, beta_end=0.74, steps=iters, iters_per_step=1, seed=7)
    bench(f"sa: spin glass N=100 p=1, {iters} iters",
          lambda: run_sa(model, plan, cfg))

    # higher-order hitting set: early-exit products over expanded terms
    h = gen_hypergraph(200, 80, 5, seed=2)
    hs_model = encode_hitting_set(h)
    hs_plan = plan_for(hs_model)
    hs_iters = int(20_000 * scale)
    hs_cfg = SaConfig(beta_start=0.01, beta_end=1.1, steps=100,
                      total_iters=hs_iters, seed=3)
    bench(f"sa: hitting set N=200 k=5, {hs_iters} iters",
          lambda: run_sa(hs_model, hs_plan, hs_cfg))

    # tempering with swaps
    pt_iters = int(3_000 * scale)
    pt_cfg = PtConfig(beta_start=1.0, beta_end=5.0, replicas=10, iters=pt_iters,
                      swap_interval=10, seed=5)
    bench(f"pt: spin glass N=100 p=1, {pt_iters} iters x 10 replicas",
          lambda: run_pt(model, plan, pt_cfg))

    # raw single-site sampling throughput
    small = ising_to_qubo(gen_er(ErSpec(12, 0.8), seed=9))
    arrays = small.flat_arrays()
    free = free_variables(full_clamp_mask(12))
    n_samples = int(1_000_000 * scale)

    def sample():
        g = np.random.default_rng(11)
        state = (g.random(12) < 0.5).astype(np.uint8)
        return kernel.gibbs_counts(*arrays, free, state, 1.0, n_samples, 10_000, g)

    bench(f"gibbs: N=12 single-site, {n_samples} samples",
          sample, check=np.array_equal)


if __name__ == "__main__":
    main()
