"""
Certified lower bounds from local optimization
==============================================

Alternating maximization, projected gradient ascent and the symmetric
power method, checked against exact matrix answers.
"""

import numpy as np

from injnorm.ensembles import ModelSpec, SeedSpec, sample_model_a, sample_model_s
from injnorm.optimize import EstimatorConfig, eigen_oracle, matrix_oracle, multi_restart, symmetric_estimate
from injnorm.tensor import DenseTensor, frobenius_norm, rank_one_overlap

# for matrices the injective norm is the top singular value
M = sample_model_a(ModelSpec("A", "complex", (8, 8)), SeedSpec(1))
for method in ("als", "pga"):
    res = multi_restart(M, EstimatorConfig(method=method, restarts=10, seed=SeedSpec(2)))
    print(f"{method}: {res.value:.10f}  exact: {matrix_oracle(M):.10f}")

# every estimate comes with unit factors that certify it
T = sample_model_a(ModelSpec("A", "complex", (6, 6, 6)), SeedSpec(3))
res = multi_restart(T, EstimatorConfig(restarts=20, seed=SeedSpec(4)))
print("estimate", round(res.value, 6), "recomputed", round(abs(rank_one_overlap(T, res.factors)), 6))
print("restart spread", round(res.dispersion, 6), "Frobenius norm", round(frobenius_norm(T), 6))

# alternating maximization never decreases the objective
trace = np.array(res.trace)
print("smallest step in the trace:", np.diff(trace).min())

# symmetric tensors: one vector in every slot
A = np.random.default_rng(5).standard_normal((6, 6))
A = A + A.T
print("power method", symmetric_estimate(DenseTensor(A)).value, "eigenvalues", eigen_oracle(A))
S = sample_model_s(ModelSpec("S", "complex", (5, 5, 5)), SeedSpec(6))
sym = multi_restart(S, EstimatorConfig(restarts=10), symmetric=True)
gen = multi_restart(S, EstimatorConfig(restarts=10))
print(f"symmetric {sym.value:.6f} vs general {gen.value:.6f}")
