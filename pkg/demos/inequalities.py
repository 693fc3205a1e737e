"""
Lower bounds in one dimension
=============================

The chessboard bound compares a periodic set with stripes built from its own
widths and gaps.  For exponential kernels the same bound follows from
reflection positivity, and the power-law kernel is a superposition of
exponentials.  This script checks each link on random sets.
"""

import numpy as np

from stripelab import (
    ModelParams,
    ReflectionPair,
    chessboard_exp_margin,
    chessboard_margin,
    chessboard_margin_via_laplace,
    laplace_identity_residual,
    random_set,
    rp_margin,
)

params = ModelParams(d=2, p=5)
rng = np.random.default_rng(1)

sets = [random_set(rng, L=float(rng.uniform(1, 10))) for _ in range(200)]
margins = np.array([chessboard_margin(E, params) for E in sets])
print(f"chessboard margin over {len(sets)} sets: min {margins.min():.3e}, median {np.median(margins):.3e}")

# one set, three routes
E = sets[0]
print("\nset:", E.intervals.round(3).tolist(), "period", round(E.L, 3))
print(f"direct margin        {chessboard_margin(E, params): .10f}")
print(f"via exponentials     {chessboard_margin_via_laplace(E, params)[0]: .10f}")
print(f"Laplace residual     {laplace_identity_residual(E, params):.2e}")
for alpha in (0.5, 1.0, 4.0):
    print(f"exp margin, alpha={alpha:3.1f} {chessboard_exp_margin(E, alpha): .10f}")

# reflection positivity on random splittings of a segment
worst = np.inf
for _ in range(500):
    L1, L2 = rng.uniform(0.5, 3.0, 2)
    left = np.sort(rng.uniform(0, L1, 4)).reshape(-1, 2)
    right = np.sort(rng.uniform(L1, L1 + L2, 4)).reshape(-1, 2)
    worst = min(worst, rp_margin(ReflectionPair(left, right, L1, L1 + L2, float(rng.uniform(0.3, 3)))))
print(f"\nreflection positivity, 500 pairs: min margin {worst:.3e}")
