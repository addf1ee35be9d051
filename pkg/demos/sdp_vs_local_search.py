"""
Relaxation plus rounding versus plain local search
==================================================

On small random instances we can compare each solver against the exact
optimum found by exhaustive enumeration.
"""

import time

import numpy as np

from contrast_subgraph import GoqcInstance, SolverConfig, brute_force, solve

# %%
def random_instance(seed, n=12):
    rng = np.random.default_rng(seed)
    w = np.triu(rng.uniform(-1, 1, (n, n)), 1)
    return GoqcInstance(w + w.T, 0.0)


instances = [random_instance(s) for s in range(40)]
optima = [brute_force(inst)[0] for inst in instances]

# %%
for method in ("local-search", "sdp", "sdp+local-search"):
    for restarts in (1, 5, 20):
        t0 = time.perf_counter()
        values = [solve(inst, SolverConfig(method=method, restarts=restarts, rng_seed=i))[1]
                  for i, inst in enumerate(instances)]
        hits = sum(abs(v - o) <= 1e-9 for v, o in zip(values, optima))
        gap = np.mean([o - v for v, o in zip(values, optima)])
        print(f"{method:17s} restarts={restarts:2d}: optimal {hits}/40, mean gap {gap:.4f}, "
              f"{time.perf_counter() - t0:.2f} s")
