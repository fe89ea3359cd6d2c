import math

import numpy as np
import pytest

from injnorm.ensembles import ModelSpec, SeedSpec, sample_model_a, sample_model_s, sample_uniform_sphere
from injnorm.optimize import (
    EstimatorConfig,
    als_estimate,
    eigen_oracle,
    matrix_oracle,
    multi_restart,
    pga_estimate,
    symmetric_estimate,
)
from injnorm.tensor import DenseTensor, frobenius_norm, rank_one_overlap, symmetrize

GOLDEN = (1 + math.sqrt(5)) / 2


def complex_matrix(rng, n, m):
    return DenseTensor(rng.standard_normal((n, m)) + 1j * rng.standard_normal((n, m)))


def rank_one(vectors):
    out = vectors[0]
    for v in vectors[1:]:
        out = np.multiply.outer(out, v)
    return DenseTensor(out)


class TestConfig:
    def test_defaults(self):
        c = EstimatorConfig()
        assert c.iterations() == 500
        assert EstimatorConfig(method="pga").iterations() == 2000
        assert c.iterations("symmetric") == 2000
        assert EstimatorConfig(max_iters=7).iterations("symmetric") == 7

    @pytest.mark.parametrize(
        "kwargs",
        [{"method": "newton"}, {"max_iters": 0}, {"rel_tol": 0.0}, {"restarts": 0}, {"noise_decay": 1.0}],
    )
    def test_invalid(self, kwargs):
        with pytest.raises(ValueError):
            EstimatorConfig(**kwargs)


class TestOracles:
    def test_golden_ratio(self):
        T = DenseTensor(np.array([[1.0, 1.0], [1.0, 0.0]]))
        assert matrix_oracle(T) == pytest.approx(GOLDEN, rel=1e-14)
        assert eigen_oracle(T) == pytest.approx(GOLDEN, rel=1e-14)

    def test_matrix_oracle_vs_svd(self):
        rng = np.random.default_rng(0)
        for n, m in [(8, 8), (3, 7), (6, 2)]:
            T = complex_matrix(rng, n, m)
            assert matrix_oracle(T) == pytest.approx(np.linalg.svd(T.data, compute_uv=False)[0], rel=1e-12)

    def test_eigen_oracle_vs_eigvalsh(self):
        rng = np.random.default_rng(1)
        for _ in range(10):
            A = rng.standard_normal((6, 6))
            A = A + A.T
            assert eigen_oracle(A) == pytest.approx(np.max(np.abs(np.linalg.eigvalsh(A))), rel=1e-12)

    def test_invalid(self):
        with pytest.raises(ValueError):
            matrix_oracle(DenseTensor(np.zeros((2, 2, 2))))
        with pytest.raises(ValueError):
            eigen_oracle(np.array([[0.0, 1.0], [0.0, 0.0]]))


class TestALS:
    def test_golden_ratio(self):
        res = als_estimate(DenseTensor(np.array([[1.0, 1.0], [1.0, 0.0]])))
        assert res.value == pytest.approx(GOLDEN, rel=1e-12)

    def test_value_is_certified(self):
        rng = np.random.default_rng(2)
        T = DenseTensor(rng.standard_normal((3, 4, 5)))
        res = als_estimate(T, EstimatorConfig(seed=SeedSpec(1)))
        for x in res.factors:
            assert np.linalg.norm(x) == pytest.approx(1.0, rel=1e-12)
        assert abs(rank_one_overlap(T, res.factors)) == pytest.approx(res.value, rel=1e-12)
        assert res.value <= frobenius_norm(T) * (1 + 1e-12)

    def test_rank_one_exact(self):
        rng = np.random.default_rng(3)
        vs = [rng.standard_normal(d) + 1j * rng.standard_normal(d) for d in (3, 4, 2)]
        T = rank_one(vs)
        res = als_estimate(T, EstimatorConfig(seed=SeedSpec(2)))
        assert res.value == pytest.approx(np.prod([np.linalg.norm(v) for v in vs]), rel=1e-10)
        assert res.converged

    def test_trace_monotone(self):
        T = sample_model_a(ModelSpec("A", "complex", (4, 4, 4, 4)), SeedSpec(4))
        trace = np.array(als_estimate(T, EstimatorConfig(seed=SeedSpec(4))).trace)
        assert np.all(np.diff(trace) >= -1e-12)

    def test_order_one(self):
        t = np.array([3.0, 4.0j])
        assert als_estimate(DenseTensor(t)).value == pytest.approx(5.0)

    def test_zero_tensor(self):
        res = als_estimate(DenseTensor(np.zeros((3, 3))))
        assert res.value == 0.0

    def test_init_respected(self):
        T = DenseTensor(np.diag([2.0, 1.0]))
        init = [np.array([0.0, 1.0]), np.array([0.0, 1.0])]
        # started at a critical point of the smaller singular value, ALS stays there
        res = als_estimate(T, EstimatorConfig(max_iters=5), init=init)
        assert res.value == pytest.approx(1.0)


class TestPGA:
    def test_matrix_oracle(self):
        rng = np.random.default_rng(5)
        T = complex_matrix(rng, 5, 5)
        res = multi_restart(T, EstimatorConfig(method="pga", restarts=5, seed=SeedSpec(3)))
        assert res.value == pytest.approx(matrix_oracle(T), rel=1e-6)

    def test_never_exceeds_als_bound(self):
        T = sample_model_a(ModelSpec("A", "real", (3, 3, 3)), SeedSpec(6))
        pga = pga_estimate(T, EstimatorConfig(method="pga", seed=SeedSpec(1)))
        assert abs(rank_one_overlap(T, pga.factors)) == pytest.approx(pga.value, rel=1e-12)
        assert pga.value <= frobenius_norm(T)

    def test_real_factors_for_real_tensor(self):
        T = sample_model_a(ModelSpec("A", "real", (3, 3)), SeedSpec(7))
        res = pga_estimate(T, EstimatorConfig(method="pga", seed=SeedSpec(2)))
        assert all(not np.iscomplexobj(x) for x in res.factors)


class TestSymmetric:
    def test_eigen_oracle(self):
        rng = np.random.default_rng(8)
        for _ in range(10):
            A = rng.standard_normal((6, 6))
            A = A + A.T
            res = symmetric_estimate(DenseTensor(A), EstimatorConfig(seed=SeedSpec(1)))
            assert res.value == pytest.approx(eigen_oracle(A), abs=1e-8)

    def test_complex_symmetric_matrix_takagi(self):
        # for a complex symmetric matrix the symmetric maximum equals the top singular value
        rng = np.random.default_rng(9)
        M = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        M = M + M.T
        res = multi_restart(DenseTensor(M), EstimatorConfig(restarts=5, seed=SeedSpec(2)), symmetric=True)
        assert res.value == pytest.approx(np.linalg.svd(M, compute_uv=False)[0], rel=1e-7)

    def test_symmetric_rank_one(self):
        u = sample_uniform_sphere(4, "complex", SeedSpec(3))
        T = rank_one([u, u, u])
        res = multi_restart(T, EstimatorConfig(restarts=3), symmetric=True)
        assert res.value == pytest.approx(1.0, rel=1e-9)
        assert all(np.allclose(x, res.factors[0]) for x in res.factors)

    def test_trace_monotone(self):
        T = sample_model_s(ModelSpec("S", "complex", (4, 4, 4)), SeedSpec(5))
        trace = np.array(symmetric_estimate(T, EstimatorConfig(seed=SeedSpec(5))).trace)
        assert np.all(np.diff(trace) >= -1e-12)

    def test_below_general_estimate(self):
        T = symmetrize(sample_model_a(ModelSpec("A", "complex", (3, 3, 3)), SeedSpec(6)))
        sym = multi_restart(T, EstimatorConfig(restarts=5), symmetric=True).value
        gen = multi_restart(T, EstimatorConfig(restarts=5)).value
        assert sym <= gen * (1 + 1e-8)

    def test_requires_symmetric(self):
        with pytest.raises(ValueError):
            symmetric_estimate(DenseTensor(np.array([[0.0, 1.0], [0.0, 0.0]])))


class TestMultiRestart:
    def test_restart_values(self):
        T = sample_model_a(ModelSpec("A", "complex", (4, 4, 4)), SeedSpec(7))
        res = multi_restart(T, EstimatorConfig(restarts=6, seed=SeedSpec(1)))
        assert len(res.restart_values) == 6
        assert res.value == max(res.restart_values)
        assert res.dispersion >= 0

    def test_first_restart_is_single_run(self):
        T = sample_model_a(ModelSpec("A", "complex", (3, 3, 3)), SeedSpec(8))
        cfg = EstimatorConfig(seed=SeedSpec(4))
        assert multi_restart(T, cfg).value == als_estimate(T, cfg).value

    def test_threads_do_not_change_result(self):
        T = sample_model_a(ModelSpec("A", "complex", (4, 4, 4)), SeedSpec(9))
        cfg = EstimatorConfig(method="pga", restarts=4, seed=SeedSpec(2), max_iters=200)
        a = multi_restart(T, cfg, threads=1)
        b = multi_restart(T, cfg, threads=3)
        assert a.restart_values == b.restart_values
        for x, y in zip(a.factors, b.factors):
            np.testing.assert_array_equal(x, y)
