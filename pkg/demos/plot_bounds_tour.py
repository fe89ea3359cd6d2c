"""
Upper bounds on the injective norm
==================================

Finite moment bounds, the optimal moment order and their large-dimension
limits for Gaussian tensors.
"""

import numpy as np

from injnorm.bounds import asymptotic_bound, comparison_bounds, finite_bound_curve, optimal_k
from injnorm.ensembles import ModelSpec

# a real Gaussian tensor of order 3 in dimension 100, entries of variance 1/d
spec = ModelSpec("A", "real", (100, 100, 100))

# the bound as a function of the moment order k has a single minimum
ks = np.arange(1, 1001)
curve = np.exp(finite_bound_curve(spec, ks))
best = optimal_k(spec)
print(f"optimal k = {best.k_used}, bound = {best.value:.4f}")
print(f"k = 1 gives {curve[0]:.4f}, k = 1000 gives {curve[-1]:.4f}")

# as d grows the optimized bound approaches a closed-form limit
for d in (10, 100, 1000, 10000):
    v = optimal_k(ModelSpec("A", "real", (d,) * 3)).value
    print(f"d = {d:>5}: {v:.4f}")
print(f"limit:     {asymptotic_bound('A', 'real', 3).value:.4f}")

# comparison with other bounds in the limit d -> infinity
header = "p  " + "  ".join(f"{name:>17}" for name in comparison_bounds(3))
print(header)
for p in range(3, 9):
    rows = comparison_bounds(p)
    cells = ["---" if r.value is None else f"{r.value:.4f}" for r in rows.values()]
    print(f"{p}  " + "  ".join(f"{c:>17}" for c in cells))

# symmetric and bounded-rank ensembles have their own limits
print("symmetric, p = 5:", round(asymptotic_bound("S", p=5).value, 4))
print("bounded rank:", asymptotic_bound("B").value)
