"""Compare the greedy allocator with exhaustive search on small random beliefs.

Prints the utility shortfall of the greedy schedule next to its certified gap
bound, for identity and capacity-log utilities.
"""
import argparse

import numpy as np

from ofdma_acknak.gsra import (SolverConfig, SsgDistribution, brute_force_allocate,
                               greedy_allocate)
from ofdma_acknak.mcs import UtilitySpec, capacity_table, qam_table


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--instances", type=int, default=200)
    ap.add_argument("--seed", type=int, default=0)
    ns = ap.parse_args()
    rng = np.random.default_rng(ns.seed)
    for kind in ("identity", "capacity-log"):
        util = UtilitySpec(kind)
        short, bounds, deg = [], [], 0
        for _ in range(ns.instances):
            N, K, S = (int(rng.integers(1, x + 1)) for x in (3, 2, 6))
            dist = SsgDistribution(rng.exponential(size=(N, K, S)), rng.dirichlet(np.ones(S), size=K))
            mcs = capacity_table() if kind == "capacity-log" else qam_table(int(rng.integers(1, 3)))
            cfg = SolverConfig(float(rng.uniform(0.5, 30.0)) * N, kappa_rel=1e-6)
            _, cert = greedy_allocate(dist, mcs, util, cfg)
            _, best = brute_force_allocate(dist, mcs, util, cfg)
            short.append(best - cert.utility)
            bounds.append(cert.bound)
            deg += cert.degenerate
        short, bounds = np.array(short), np.array(bounds)
        print(f"{kind}: max shortfall {short.max():.3e}, min {short.min():.3e}, "
              f"bound violations {(short > bounds + 1e-12).sum()}, degenerate {deg}/{ns.instances}")


if __name__ == "__main__":
    main()
