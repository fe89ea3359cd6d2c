"""
Monte Carlo check of the moment inequality
==========================================

The norm of any tensor is bounded by a prefactor times a sphere moment.
Here the inequality is tested on a mixed grid of random tensors, and a
deliberately halved prefactor is shown to be caught.
"""

from injnorm.ensembles import ModelSpec, SeedSpec, sample_model_a
from injnorm.montecarlo import run_verification, verification_grid, verify_deterministic_bound

# twelve cases cycling through the four ensembles
cases = verification_grid(12)
reports = run_verification(cases, n_samples=100_000, seed=SeedSpec(0))
for case, rep in zip(cases, reports):
    status = "pass" if rep.passed else "FAIL"
    print(f"{case.label():<28} {status}  log gap {rep.gap_log:.3f}")

# a wrong prefactor must fail on a fixed instance
T = sample_model_a(ModelSpec("A", "real", (3, 3)), SeedSpec(1))
good = verify_deterministic_bound(T, 3, 200_000, seed=SeedSpec(1))
bad = verify_deterministic_bound(T, 3, 200_000, seed=SeedSpec(1), prefactor_scale=0.5)
print("correct prefactor passes:", good.passed, " halved prefactor passes:", bad.passed)
