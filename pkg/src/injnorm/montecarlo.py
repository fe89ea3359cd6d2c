"""Monte Carlo moments over random product vectors and checks of the
deterministic moment inequality."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from .bounds import prefactor_log
from .ensembles import ModelSpec, SeedSpec, sample
from .optimize import EstimatorConfig, multi_restart
from .tensor import DenseTensor, frobenius_norm, is_symmetric

__all__ = [
    "MomentEstimate",
    "VerificationReport",
    "SweepSummary",
    "moment_estimate",
    "verify_deterministic_bound",
    "expectation_sweep",
    "VerificationCase",
    "verification_grid",
    "run_verification",
]

K_MAX_VERIFY = 16
_BATCH = 50_000


@dataclass(frozen=True)
class MomentEstimate:
    """Sample mean and standard error of ``|<T, u_1 (x) ... (x) u_p>|^(2k)``."""

    k: int
    samples: int
    mean: float
    stderr: float
    seed: SeedSpec


@dataclass(frozen=True)
class VerificationReport:
    """Outcome of one check of ``||T||^(2k) <= prefactor * E|<T, u>|^(2k)``.

    ``lhs_log = 2k ln(estimate)`` and
    ``rhs_log = prefactor_log + ln(mean + slack_sigmas * stderr)``.
    """

    lhs_log: float
    rhs_log: float
    slack_sigmas: float
    passed: bool
    k: int
    variant: str
    estimate: float
    moment: MomentEstimate

    @property
    def gap_log(self) -> float:
        return self.rhs_log - self.lhs_log

    def as_dict(self) -> dict:
        return {
            "variant": self.variant,
            "k": self.k,
            "estimate": self.estimate,
            "moment_mean": self.moment.mean,
            "moment_stderr": self.moment.stderr,
            "samples": self.moment.samples,
            "lhs_log": self.lhs_log,
            "rhs_log": self.rhs_log,
            "gap_log": self.gap_log,
            "slack_sigmas": self.slack_sigmas,
            "pass": self.passed,
        }


@dataclass(frozen=True)
class SweepSummary:
    """Per-realization estimates and their mean, standard error and mean restart spread."""

    mean: float
    stderr: float
    values: tuple[float, ...]
    dispersion: float


def _subscripts(p: int) -> str:
    letters = "abcdefghijklmnopqrstuvwxy"[:p]
    return letters + "," + ",".join("z" + c for c in letters) + "->z"


def _batch_powers(T: DenseTensor, k: int, n: int, rng: np.random.Generator, symmetric: bool) -> np.ndarray:
    conjT = T.data.conj() if T.field == "complex" else T.data
    kind_complex = T.field == "complex"
    if symmetric:
        U = _sphere(T.shape[0], kind_complex, n, rng)
        vecs = [U] * T.order
    else:
        vecs = [_sphere(d, kind_complex, n, rng) for d in T.shape]
    s = np.einsum(_subscripts(T.order), conjT, *vecs, optimize=True)
    return np.abs(s) ** (2 * k)


def _sphere(d: int, is_complex: bool, n: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.standard_normal((n, d))
    if is_complex:
        g = (g + 1j * rng.standard_normal((n, d))) / math.sqrt(2.0)
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def moment_estimate(T: DenseTensor, k: int, n_samples: int, seed: SeedSpec, symmetric: bool = False) -> MomentEstimate:
    """Estimate ``E|<T, u_1 (x) ... (x) u_p>|^(2k)`` with uniform sphere vectors.

    Vectors follow the field of ``T``. With ``symmetric=True`` one vector is
    used in every slot. Samples are drawn in fixed-size batches, batch ``b``
    from stream ``seed.spawn(b)``, and reduced in batch order.
    """
    if n_samples < 2:
        raise ValueError("need at least two samples")
    if k < 1:
        raise ValueError("k must be at least 1")
    if symmetric and not T.is_cubic:
        raise ValueError("symmetric moments need a cubic tensor")
    chunks = []
    done, b = 0, 0
    while done < n_samples:
        m = min(_BATCH, n_samples - done)
        chunks.append(_batch_powers(T, k, m, seed.spawn(b).generator(), symmetric))
        done += m
        b += 1
    vals = np.concatenate(chunks)
    mean = float(np.sum(vals) / n_samples)
    var = float(np.sum((vals - mean) ** 2) / (n_samples - 1))
    return MomentEstimate(k, n_samples, mean, math.sqrt(var / n_samples), seed)


def verify_deterministic_bound(
    T: DenseTensor,
    k: int,
    n_samples: int,
    slack_sigmas: float = 6.0,
    seed: SeedSpec | None = None,
    symmetric: bool = False,
    estimator: EstimatorConfig | None = None,
    prefactor_scale: float = 1.0,
) -> VerificationReport:
    """Check the moment inequality on one tensor.

    The left side uses a multi-restart ALS estimate of ``||T||_inj``, a
    lower bound, so a failure beyond Monte Carlo noise signals a bug.

    Parameters
    ----------
    T : DenseTensor
    k : int
        Moment order, at most 16.
    n_samples : int
    slack_sigmas : float
        Standard errors added to the moment estimate.
    seed : SeedSpec, optional
        Seeds the moment samples (``spawn(0)``) and the estimator (``spawn(1)``).
    symmetric : bool
        Use the symmetric inequality; ``T`` must be symmetric.
    estimator : EstimatorConfig, optional
        Defaults to ALS with 10 restarts.
    prefactor_scale : float
        Multiplies the prefactor; values below one give a negative control.
    """
    if not 1 <= k <= K_MAX_VERIFY:
        raise ValueError(f"k must lie in [1, {K_MAX_VERIFY}]")
    seed = seed or SeedSpec()
    if symmetric:
        if not is_symmetric(T, 1e-9):
            raise ValueError("symmetric verification needs a symmetric tensor")
        variant = "complex_sym" if T.field == "complex" else None
        if variant is None:
            raise ValueError("the symmetric inequality is stated for complex tensors")
    else:
        variant = "real_asym" if T.field == "real" else "complex_asym"
    estimator = estimator or EstimatorConfig(restarts=10)
    est = multi_restart(T, replace(estimator, seed=seed.spawn(1))).value
    mom = moment_estimate(T, k, n_samples, seed.spawn(0), symmetric=symmetric)
    lhs = 2 * k * math.log(est) if est > 0 else -math.inf
    upper = mom.mean + slack_sigmas * mom.stderr
    rhs = prefactor_log(variant, T.shape, k) + math.log(prefactor_scale) + (math.log(upper) if upper > 0 else -math.inf)
    return VerificationReport(lhs, rhs, slack_sigmas, bool(lhs <= rhs), k, variant, est, mom)


def expectation_sweep(
    spec: ModelSpec,
    config: EstimatorConfig,
    realizations: int,
    seed: SeedSpec,
    threads: int = 1,
    normalize: str = "none",
    transform: Callable[[DenseTensor], DenseTensor] | None = None,
) -> SweepSummary:
    """Average multi-restart estimates over freshly sampled tensors.

    Realization ``r`` samples from ``seed.spawn(r).spawn(0)`` and runs the
    estimator from ``seed.spawn(r).spawn(1)``. Results are collected in
    realization order, so ``threads`` never changes the output.

    Parameters
    ----------
    normalize : {"none", "hs"}
        ``"hs"`` divides each sample by its Frobenius norm first.
    """
    if realizations < 1:
        raise ValueError("realizations must be at least 1")
    if normalize not in ("none", "hs"):
        raise ValueError(f"unknown normalization {normalize!r}")

    def one(r: int):
        s = seed.spawn(r)
        T = sample(spec, s.spawn(0))
        if transform is not None:
            T = transform(T)
        if normalize == "hs":
            n = frobenius_norm(T)
            T = DenseTensor(T.data / n, T.field) if n > 0 else T
        res = multi_restart(T, replace(config, seed=s.spawn(1)))
        return res.value, res.dispersion

    if threads > 1 and realizations > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            out = list(pool.map(one, range(realizations)))
    else:
        out = [one(r) for r in range(realizations)]
    values = np.array([v for v, _ in out])
    mean = float(np.sum(values) / values.size)
    stderr = float(np.std(values, ddof=1) / math.sqrt(values.size)) if values.size > 1 else 0.0
    dispersion = float(np.mean([d for _, d in out]))
    return SweepSummary(mean, stderr, tuple(float(v) for v in values), dispersion)


@dataclass(frozen=True)
class VerificationCase:
    """One entry of a verification grid."""

    spec: ModelSpec
    k: int
    symmetric: bool

    def label(self) -> str:
        dims = "x".join(map(str, self.spec.dims))
        return f"{self.spec.family}-{self.spec.field}-{dims}-k{self.k}"


def verification_grid(instances: int = 50, seed: SeedSpec | None = None) -> list[VerificationCase]:
    """Mixed grid over the four families with ``d <= 4``, ``p <= 3``, ``k <= 4``.

    Families cycle through real Model A, complex Model A, Model S and the
    symmetrized Model A; shapes and orders are drawn from ``seed``.
    """
    rng = (seed or SeedSpec(2024)).generator()
    cases = []
    for i in range(instances):
        k = int(rng.integers(1, 5))
        fam = i % 4
        if fam < 2:
            p = int(rng.integers(1, 4))
            dims = tuple(int(d) for d in rng.integers(2, 5, size=p))
            field = "real" if fam == 0 else "complex"
            cases.append(VerificationCase(ModelSpec("A", field, dims), k, False))
        else:
            p = int(rng.integers(2, 4))
            d = int(rng.integers(2, 5))
            family = "S" if fam == 2 else "S_tilde"
            cases.append(VerificationCase(ModelSpec(family, "complex", (d,) * p), k, True))
    return cases


def run_verification(
    cases: list[VerificationCase],
    n_samples: int = 200_000,
    slack_sigmas: float = 6.0,
    seed: SeedSpec | None = None,
    threads: int = 1,
    prefactor_scale: float = 1.0,
) -> list[VerificationReport]:
    """Sample each case from ``seed.spawn(i)`` and verify it; order is preserved."""
    seed = seed or SeedSpec()

    def one(i: int) -> VerificationReport:
        case = cases[i]
        s = seed.spawn(i)
        T = sample(case.spec, s.spawn(0))
        return verify_deterministic_bound(
            T, case.k, n_samples, slack_sigmas, s.spawn(1), symmetric=case.symmetric, prefactor_scale=prefactor_scale
        )

    if threads > 1 and len(cases) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(one, range(len(cases))))
    return [one(i) for i in range(len(cases))]
