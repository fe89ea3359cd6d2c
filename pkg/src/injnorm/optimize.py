"""Lower-bound estimators for the injective norm.

Every estimate is ``|<T, x_1 (x) ... (x) x_p>|`` for explicit unit factors,
hence a certified lower bound on ``||T||_inj``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .ensembles import SeedSpec, draw_entries, sample_uniform_sphere
from .tensor import DenseTensor, frobenius_norm, is_symmetric, partial_contraction, rank_one_overlap

__all__ = [
    "EstimatorConfig",
    "EstimateResult",
    "als_estimate",
    "pga_estimate",
    "symmetric_estimate",
    "multi_restart",
    "matrix_oracle",
    "eigen_oracle",
]

_DEFAULT_ITERS = {"als": 500, "pga": 2000, "symmetric": 2000}


@dataclass(frozen=True)
class EstimatorConfig:
    """Knobs shared by the estimators.

    ``max_iters=None`` selects the method default: 500 sweeps for ALS and
    2000 iterations for gradient ascent and the symmetric power method.
    """

    method: str = "als"
    max_iters: int | None = None
    rel_tol: float = 1e-10
    restarts: int = 1
    step_size: float = 0.1
    noise_initial: float = 0.05
    noise_decay: float = 0.97
    seed: SeedSpec = field(default_factory=SeedSpec)

    def __post_init__(self):
        if self.method not in ("als", "pga"):
            raise ValueError(f"unknown method {self.method!r}")
        if self.max_iters is not None and self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be positive")
        if self.restarts < 1:
            raise ValueError("restarts must be at least 1")
        if not 0 < self.noise_decay < 1:
            raise ValueError("noise_decay must lie in (0, 1)")

    def iterations(self, kind: str | None = None) -> int:
        return self.max_iters if self.max_iters is not None else _DEFAULT_ITERS[kind or self.method]


@dataclass(frozen=True)
class EstimateResult:
    """Outcome of an estimator run.

    Attributes
    ----------
    value : float
        ``|<T, factors>|``.
    factors : tuple of ndarray
        Unit vectors achieving ``value``; the symmetric estimator repeats
        one vector ``p`` times.
    iterations_used : int
    converged : bool
    restart_values : tuple of float
        Best value of each restart.
    trace : tuple of float
        Objective after every update of the winning run.
    """

    value: float
    factors: tuple[np.ndarray, ...]
    iterations_used: int
    converged: bool
    restart_values: tuple[float, ...]
    trace: tuple[float, ...] = ()

    @property
    def dispersion(self) -> float:
        """Spread ``max - min`` of the restart values."""
        return max(self.restart_values) - min(self.restart_values)


def _zero_result(T: DenseTensor, rng: np.random.Generator) -> EstimateResult:
    X = tuple(sample_uniform_sphere(d, T.field, rng) for d in T.shape)
    return EstimateResult(0.0, X, 0, True, (0.0,), (0.0,))


def _finish(T, X, iters, converged, trace) -> EstimateResult:
    value = abs(rank_one_overlap(T, X))
    return EstimateResult(value, tuple(np.array(x) for x in X), iters, converged, (value,), tuple(trace))


def als_estimate(T: DenseTensor, config: EstimatorConfig | None = None, init=None) -> EstimateResult:
    """Alternating maximization over one factor at a time.

    Slot ``i`` is replaced by ``conj(w) / ||w||`` with ``w`` the contraction
    of ``conj(T)`` against the other factors, which is the exact maximizer
    of the modulus over that slot, so the objective never decreases.

    Parameters
    ----------
    T : DenseTensor
    config : EstimatorConfig, optional
    init : sequence of ndarray, optional
        Starting factors; drawn uniformly from the spheres when omitted.
    """
    config = config or EstimatorConfig()
    rng = config.seed.generator()
    if frobenius_norm(T) == 0.0:
        return _zero_result(T, rng)
    X = [np.asarray(x) for x in init] if init is not None else [sample_uniform_sphere(d, T.field, rng) for d in T.shape]
    obj = abs(rank_one_overlap(T, X))
    trace = [obj]
    converged = False
    sweeps = 0
    for sweeps in range(1, config.iterations("als") + 1):
        start = obj
        for i in range(T.order):
            w = partial_contraction(T, X, i)
            nw = float(np.linalg.norm(w))
            if nw == 0.0:
                X[i] = sample_uniform_sphere(T.shape[i], T.field, rng)
                obj = abs(rank_one_overlap(T, X))
            else:
                X[i] = w.conj() / nw
                obj = nw
            trace.append(obj)
        if obj - start <= config.rel_tol * obj:
            converged = True
            break
    return _finish(T, X, sweeps, converged, trace)


def pga_estimate(T: DenseTensor, config: EstimatorConfig | None = None, init=None) -> EstimateResult:
    """Noisy projected gradient ascent on the product of spheres.

    Each slot moves along the phase-aligned gradient ``conj(w) s / |s|`` of
    ``|s|``, ``s = <T, X>``, plus Gaussian noise of size
    ``noise_initial * noise_decay**t``, and is then renormalized. The best
    iterate seen is returned. Stops once the noise has decayed below
    ``sqrt(rel_tol)`` and an iteration improves by less than ``rel_tol``.
    """
    config = config or EstimatorConfig(method="pga")
    rng = config.seed.generator()
    if frobenius_norm(T) == 0.0:
        return _zero_result(T, rng)
    X = [np.asarray(x) for x in init] if init is not None else [sample_uniform_sphere(d, T.field, rng) for d in T.shape]
    kind = "gaussian_real" if T.field == "real" else "gaussian_complex"
    obj = abs(rank_one_overlap(T, X))
    best_obj, best_X = obj, list(X)
    trace = [obj]
    converged = False
    quiet = math.sqrt(config.rel_tol)
    it = 0
    for it in range(1, config.iterations("pga") + 1):
        sigma = config.noise_initial * config.noise_decay ** (it - 1)
        start = obj
        for i in range(T.order):
            w = partial_contraction(T, X, i)
            s = complex(w @ X[i])
            phase = s / abs(s) if s != 0 else 1.0
            g = w.conj() * phase
            if T.field == "real":
                g = g.real
            x = X[i] + config.step_size * g + sigma * draw_entries(kind, T.shape[i], rng)
            nx = float(np.linalg.norm(x))
            X[i] = x / nx if nx > 0 else sample_uniform_sphere(T.shape[i], T.field, rng)
        obj = abs(rank_one_overlap(T, X))
        trace.append(obj)
        if obj > best_obj:
            best_obj, best_X = obj, list(X)
        if sigma <= quiet and abs(obj - start) <= config.rel_tol * obj:
            converged = True
            break
    return _finish(T, best_X, it, converged, trace)


def _sym_value(B: DenseTensor, x: np.ndarray) -> complex | float:
    return rank_one_overlap(B, [x] * B.order)


def _sym_chain(B: DenseTensor, x: np.ndarray, sign: int | None, config: EstimatorConfig, rng) -> tuple:
    """One monotone ascent run.

    ``sign=None`` ascends ``|f|``; ``sign=+1`` or ``-1`` ascends ``sign * f``
    for a real ``f``.
    """
    d, p = B.shape[0], B.order

    def objective(y):
        f = _sym_value(B, y)
        return abs(f) if sign is None else sign * float(np.real(f))

    obj = objective(x)
    trace = [obj]
    converged = False
    prev_gain = 0.0
    it = 0
    for it in range(1, config.iterations("symmetric") + 1):
        w = partial_contraction(B, [x] * p, 0)
        nw = float(np.linalg.norm(w))
        if nw == 0.0:
            x = sample_uniform_sphere(d, B.field, rng)
            obj = objective(x)
            trace.append(obj)
            continue
        if sign is None:
            s = complex(w @ x)
            g = w.conj() * (s / abs(s) if s != 0 else 1.0) / nw
            if B.field == "real":
                g = g.real
            power = w.conj() / nw
        else:
            g = sign * w / nw
            power = g
        candidates = [power, g + x]
        best, best_obj = None, -math.inf
        for c in candidates:
            c = c / np.linalg.norm(c)
            co = objective(c)
            if co > best_obj:
                best, best_obj = c, co
        if best_obj < obj:
            # backtrack along the ascent direction
            best = None
            tau = 1.0
            while tau > 1e-12:
                c = x + tau * g
                c = c / np.linalg.norm(c)
                co = objective(c)
                if co > obj:
                    best, best_obj = c, co
                    break
                tau *= 0.5
            if best is None:
                converged = True
                break
        gain = best_obj - obj
        x, obj = best, best_obj
        trace.append(obj)
        # geometric extrapolation of the improvement still to come
        ratio = gain / prev_gain if prev_gain > 0 else 1.0
        remaining = gain if ratio >= 1 else gain * ratio / (1 - ratio)
        if gain == 0.0 or (ratio < 1 and remaining <= config.rel_tol * abs(obj)):
            converged = True
            break
        prev_gain = gain
    return x, it, converged, trace


def symmetric_estimate(B: DenseTensor, config: EstimatorConfig | None = None, init=None) -> EstimateResult:
    """Symmetric higher-order power method with a monotone safeguard.

    Each iteration compares the power step ``x <- conj(w) / ||w||`` with the
    shifted step ``x <- normalize(g + x)``, ``g`` the unit phase-aligned
    gradient, and keeps the better one when it does not lower the
    objective; otherwise a backtracking step along ``g`` is taken. If no
    step improves, ``x`` is stationary and the run stops. Otherwise the run
    stops once the improvement still expected, extrapolated geometrically
    from the last two gains, falls below ``rel_tol`` times the objective.

    For real tensors of even order, ``f`` and ``-f`` have separate basins,
    so both ``f`` and ``-f`` are ascended from the same start and the better
    run is kept.
    """
    config = config or EstimatorConfig()
    if not is_symmetric(B, 1e-9):
        raise ValueError("symmetric_estimate requires a symmetric tensor")
    rng = config.seed.generator()
    d, p = B.shape[0], B.order
    if frobenius_norm(B) == 0.0:
        x = sample_uniform_sphere(d, B.field, rng)
        return EstimateResult(0.0, (x,) * p, 0, True, (0.0,), (0.0,))
    x0 = np.asarray(init) if init is not None else sample_uniform_sphere(d, B.field, rng)
    signs = (1, -1) if (B.field == "real" and p % 2 == 0) else (None,)
    runs = [_sym_chain(B, x0, sg, config, rng) for sg in signs]
    values = [abs(_sym_value(B, r[0])) for r in runs]
    x, it, converged, trace = runs[int(np.argmax(values))]
    value = max(values)
    return EstimateResult(value, (np.array(x),) * p, it, converged, (value,), tuple(trace))


def _restart_seed(seed: SeedSpec, r: int) -> SeedSpec:
    return seed if r == 0 else seed.spawn(r)


def multi_restart(T: DenseTensor, config: EstimatorConfig | None = None, symmetric: bool = False, threads: int = 1) -> EstimateResult:
    """Best of ``config.restarts`` independent runs.

    Restart 0 uses ``config.seed`` itself, so one restart reproduces a
    single run exactly. Restart ``r >= 1`` uses ``config.seed.spawn(r)``.
    Results do not depend on ``threads``.
    """
    config = config or EstimatorConfig()
    if symmetric:
        run = symmetric_estimate
    else:
        run = als_estimate if config.method == "als" else pga_estimate
    configs = [replace(config, seed=_restart_seed(config.seed, r)) for r in range(config.restarts)]
    if threads > 1 and len(configs) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda c: run(T, c), configs))
    else:
        results = [run(T, c) for c in configs]
    values = tuple(r.value for r in results)
    best = results[int(np.argmax(values))]
    return replace(best, restart_values=values)


def _top_eigenpair_psd(G: np.ndarray) -> np.ndarray:
    """Unit top eigenvector of a Hermitian PSD matrix by repeated squaring."""
    scale = np.linalg.norm(G)
    M = G / scale
    for _ in range(64):
        M = M @ M
        nm = np.linalg.norm(M)
        if nm == 0:
            break
        M = M / nm
    v = M[:, int(np.argmax(np.linalg.norm(M, axis=0)))]
    v = v / np.linalg.norm(v)
    for _ in range(3):
        v = G @ v
        v = v / np.linalg.norm(v)
    return v


def matrix_oracle(T: DenseTensor) -> float:
    """Top singular value of an order-2 tensor, the exact injective norm."""
    if T.order != 2:
        raise ValueError("matrix_oracle requires an order-2 tensor")
    A = T.data
    if not np.any(A):
        return 0.0
    v = _top_eigenpair_psd(A.conj().T @ A)
    return float(np.linalg.norm(A @ v))


def eigen_oracle(A) -> float:
    """Largest ``|eigenvalue|`` of a Hermitian matrix."""
    A = np.asarray(A.data if isinstance(A, DenseTensor) else A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("eigen_oracle requires a square matrix")
    if not np.allclose(A, A.conj().T, rtol=0.0, atol=1e-12 * max(1.0, np.abs(A).max())):
        raise ValueError("eigen_oracle requires a Hermitian matrix")
    if not np.any(A):
        return 0.0
    v = _top_eigenpair_psd(A @ A)
    return float(np.linalg.norm(A @ v))
