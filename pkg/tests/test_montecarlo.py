import math

import numpy as np
import pytest

from injnorm.bounds import prefactor_log
from injnorm.ensembles import ModelSpec, SeedSpec, sample_model_a, sample_model_s
from injnorm.montecarlo import (
    K_MAX_VERIFY,
    VerificationCase,
    expectation_sweep,
    moment_estimate,
    run_verification,
    verification_grid,
    verify_deterministic_bound,
)
from injnorm.optimize import EstimatorConfig
from injnorm.tensor import DenseTensor


class TestMomentEstimate:
    @pytest.mark.parametrize("field,variant", [("real", "real_asym"), ("complex", "complex_asym")])
    def test_basis_vector_exact(self, field, variant):
        # E|u_1|^(2k) on the sphere is the reciprocal prefactor
        t = np.zeros(5, dtype=complex if field == "complex" else float)
        t[0] = 1
        est = moment_estimate(DenseTensor(t, field), 3, 100_000, SeedSpec(1))
        exact = math.exp(-prefactor_log(variant, (5,), 3))
        assert abs(est.mean - exact) < 5 * est.stderr

    def test_order_one_equality(self):
        # p = 1: the deterministic inequality is an identity
        rng = np.random.default_rng(0)
        t = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        est = moment_estimate(DenseTensor(t), 2, 200_000, SeedSpec(2))
        lhs = np.linalg.norm(t) ** 4
        rhs = math.exp(prefactor_log("complex_asym", (4,), 2)) * est.mean
        assert rhs == pytest.approx(lhs, rel=6 * est.stderr / est.mean)

    def test_reproducible_and_batched(self):
        T = sample_model_a(ModelSpec("A", "complex", (3, 3)), SeedSpec(3))
        a = moment_estimate(T, 2, 120_001, SeedSpec(4))
        b = moment_estimate(T, 2, 120_001, SeedSpec(4))
        assert a == b
        assert a.samples == 120_001 and a.stderr > 0

    def test_symmetric_needs_cubic(self):
        with pytest.raises(ValueError):
            moment_estimate(DenseTensor(np.ones((2, 3))), 1, 10, SeedSpec(), symmetric=True)

    def test_invalid(self):
        T = DenseTensor(np.ones(2))
        with pytest.raises(ValueError):
            moment_estimate(T, 0, 10, SeedSpec())
        with pytest.raises(ValueError):
            moment_estimate(T, 1, 1, SeedSpec())


class TestVerify:
    def test_passes_on_model_a(self):
        T = sample_model_a(ModelSpec("A", "complex", (3, 3, 3)), SeedSpec(5))
        rep = verify_deterministic_bound(T, 3, 50_000, seed=SeedSpec(6))
        assert rep.passed and rep.gap_log > 0
        assert rep.variant == "complex_asym"
        assert rep.lhs_log == pytest.approx(6 * math.log(rep.estimate))
        d = rep.as_dict()
        assert d["pass"] is True and d["samples"] == 50_000

    def test_symmetric(self):
        T = sample_model_s(ModelSpec("S", "complex", (3, 3, 3)), SeedSpec(7))
        rep = verify_deterministic_bound(T, 2, 50_000, seed=SeedSpec(8), symmetric=True)
        assert rep.passed and rep.variant == "complex_sym"

    def test_negative_control(self):
        T = sample_model_a(ModelSpec("A", "real", (3, 3)), SeedSpec(1))
        good = verify_deterministic_bound(T, 3, 200_000, seed=SeedSpec(1))
        bad = verify_deterministic_bound(T, 3, 200_000, seed=SeedSpec(1), prefactor_scale=0.5)
        assert good.passed and not bad.passed
        assert good.gap_log - bad.gap_log == pytest.approx(math.log(2))

    def test_symmetric_requires_symmetric(self):
        T = sample_model_a(ModelSpec("A", "complex", (3, 3)), SeedSpec(2))
        with pytest.raises(ValueError):
            verify_deterministic_bound(T, 2, 100, symmetric=True)
        with pytest.raises(ValueError):
            verify_deterministic_bound(T, K_MAX_VERIFY + 1, 100)


class TestGrid:
    def test_shape(self):
        cases = verification_grid(50)
        assert len(cases) == 50
        fams = [(c.spec.family, c.spec.field) for c in cases[:4]]
        assert fams == [("A", "real"), ("A", "complex"), ("S", "complex"), ("S_tilde", "complex")]
        for c in cases:
            assert max(c.spec.dims) <= 4 and c.spec.p <= 3 and 1 <= c.k <= 4
            assert c.symmetric == (c.spec.family != "A")

    def test_reproducible(self):
        assert verification_grid(20, SeedSpec(3)) == verification_grid(20, SeedSpec(3))
        assert verification_grid(20, SeedSpec(3)) != verification_grid(20, SeedSpec(4))

    def test_label(self):
        assert VerificationCase(ModelSpec("A", "real", (2, 3)), 2, False).label() == "A-real-2x3-k2"

    def test_threads_identical(self):
        cases = verification_grid(6)
        a = run_verification(cases, n_samples=5_000, seed=SeedSpec(1), threads=1)
        b = run_verification(cases, n_samples=5_000, seed=SeedSpec(1), threads=3)
        assert [r.as_dict() for r in a] == [r.as_dict() for r in b]


class TestSweep:
    def test_threads_identical(self):
        spec = ModelSpec("A", "complex", (3, 3, 3))
        cfg = EstimatorConfig(restarts=2)
        a = expectation_sweep(spec, cfg, 5, SeedSpec(9), threads=1)
        b = expectation_sweep(spec, cfg, 5, SeedSpec(9), threads=4)
        assert a == b
        assert len(a.values) == 5
        assert a.mean == pytest.approx(np.mean(a.values))
        assert a.stderr == pytest.approx(np.std(a.values, ddof=1) / math.sqrt(5))

    def test_hs_normalized_at_most_one(self):
        spec = ModelSpec("A", "complex", (3, 3, 3))
        s = expectation_sweep(spec, EstimatorConfig(), 4, SeedSpec(1), normalize="hs")
        assert all(0 < v <= 1 + 1e-12 for v in s.values)

    def test_matrices_below_two(self):
        # square Gaussian matrices with entries of variance 1/d have E||T|| -> 2
        spec = ModelSpec("A", "real", (40, 40))
        s = expectation_sweep(spec, EstimatorConfig(), 5, SeedSpec(2))
        assert 1.8 < s.mean < 2.05

    def test_invalid(self):
        spec = ModelSpec("A", "real", (2, 2))
        with pytest.raises(ValueError):
            expectation_sweep(spec, EstimatorConfig(), 0, SeedSpec())
        with pytest.raises(ValueError):
            expectation_sweep(spec, EstimatorConfig(), 1, SeedSpec(), normalize="max")
