"""Closed-form upper bounds on the expected injective norm.

Every finite bound has the shape
``E||T|| <= (prefactor * moment)^(1/(2k))`` where ``prefactor`` comes from
the deterministic inequality
``||T||^(2k) <= prefactor * E_u |<T, u_1 (x) ... (x) u_p>|^(2k)`` and
``moment`` bounds the expectation for a given ensemble. All quantities are
carried as logarithms.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations
from typing import Sequence

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.special import gammaln, logsumexp

from .ensembles import ModelSpec
from .specialfn import lambert_w, log_binomial, log_double_factorial_odd

__all__ = [
    "KAC_RICE_REFERENCE",
    "BoundResult",
    "CompositionTable",
    "ComparisonEntry",
    "prefactor_log",
    "prefactor_variant",
    "moment_log_upper",
    "composition_table",
    "composition_sum_log",
    "finite_bound",
    "finite_bound_curve",
    "coarse_k_upper",
    "lambert_k_upper",
    "optimal_k",
    "psi",
    "alpha0",
    "phi",
    "asymptotic_bound",
    "sudakov_fernique_bound",
    "aden_ali_bound",
    "boedihardjo_bound",
    "friedland_kemp_bound",
    "comparison_bounds",
]

K_CAP = 100_000

# d -> infinity, Gaussian entries; reference values, not computed here
KAC_RICE_REFERENCE = {3: 2.87, 4: 3.59, 5: 4.22, 6: 4.80, 7: 5.33, 8: 5.83}


@dataclass(frozen=True)
class BoundResult:
    """A bound value with provenance.

    Attributes
    ----------
    log_value, value : float
    k_used : int or None
        Moment order of a finite bound.
    kind : {"finite_moment", "asymptotic", "comparison"}
    evaluations : int
        Number of bound-function evaluations spent.
    alpha : float or None
        Minimizing alpha of an asymptotic bound.
    """

    log_value: float
    value: float
    k_used: int | None
    kind: str
    evaluations: int = 1
    alpha: float | None = None


@dataclass(frozen=True)
class CompositionTable:
    """``log_S[j] = ln sum_{a in N^R, |a| = j} prod_s (a_s!)^(p-2)`` for ``j <= k_max``."""

    R: int
    k_max: int
    p: int
    log_S: np.ndarray = field(repr=False)


# ----------------------------------------------------------------------------
# prefactors and moments


def prefactor_log(variant: str, dims: Sequence[int], k) -> float | np.ndarray:
    """Log prefactor of the deterministic moment inequality.

    Parameters
    ----------
    variant : {"real_asym", "complex_asym", "complex_sym"}
    dims : sequence of int
        Cubic for ``"complex_sym"``.
    k : int or array of int
        Moment order(s), ``k >= 1``.
    """
    dims = [int(d) for d in dims]
    k_arr = np.asarray(k)
    if np.any(k_arr < 1):
        raise ValueError("k must be at least 1")
    if variant == "real_asym":
        kf = k_arr.astype(float)
        out = sum(
            kf * math.log(2.0) + gammaln(d / 2 + kf) - log_double_factorial_odd(k_arr) - gammaln(d / 2)
            for d in dims
        )
    elif variant == "complex_asym":
        out = sum(log_binomial(d + k_arr - 1, k_arr) for d in dims)
    elif variant == "complex_sym":
        if len(set(dims)) != 1:
            raise ValueError("complex_sym requires cubic dims")
        p = len(dims)
        out = log_binomial(dims[0] + p * k_arr - 1, p * k_arr)
    else:
        raise ValueError(f"unknown variant {variant!r}")
    out = np.asarray(out, dtype=float)
    return float(out) if out.ndim == 0 else out


def prefactor_variant(spec: ModelSpec) -> str:
    """Deterministic inequality matching an ensemble."""
    if spec.family == "A":
        return "real_asym" if spec.field == "real" else "complex_asym"
    if spec.family in ("S", "S_tilde"):
        return "complex_sym"
    return "complex_asym"


@lru_cache(maxsize=64)
def composition_table(R: int, k_max: int, p: int) -> CompositionTable:
    """Tabulate composition sums by the recurrence over parts.

    ``S_r(j) = sum_{m=0}^{j} (m!)^(p-2) S_{r-1}(j-m)``, evaluated in log space.
    """
    if R < 1 or k_max < 0:
        raise ValueError("need R >= 1 and k_max >= 0")
    if p < 3:
        raise ValueError("composition sums are defined here for p >= 3")
    w = (p - 2) * gammaln(np.arange(k_max + 1) + 1.0)
    S = w.copy()
    for _ in range(R - 1):
        S = np.array([logsumexp(w[: j + 1] + S[j::-1]) for j in range(k_max + 1)])
    S.setflags(write=False)
    return CompositionTable(R, k_max, p, S)


def composition_sum_log(R: int, k: int, p: int) -> float:
    """``ln sum_{a in N^R, |a| = k} prod_s (a_s!)^(p-2)``."""
    return float(composition_table(R, k, p).log_S[k])


def moment_log_upper(spec: ModelSpec, k) -> float | np.ndarray:
    """Log upper bound on ``E|<T, u_1 (x) ... (x) u_p>|^(2k)`` for unit ``u_i``."""
    k_arr = np.asarray(k)
    if np.any(k_arr < 1):
        raise ValueError("k must be at least 1")
    kf = k_arr.astype(float)
    p = spec.p
    if spec.family == "A":
        log_prod = sum(math.log(d) for d in spec.dims)
        head = log_double_factorial_odd(k_arr) if spec.field == "real" else gammaln(kf + 1)
        out = head - kf * log_prod / p
    elif spec.family in ("S", "S_tilde"):
        out = gammaln(kf + 1) - kf * math.log(spec.d)
    else:
        table = composition_table(spec.rank, int(k_arr.max()), p)
        out = 2 * gammaln(kf + 1) + table.log_S[k_arr] - p * kf * math.log(spec.d)
    out = np.asarray(out, dtype=float)
    return float(out) if out.ndim == 0 else out


def _finite_log(spec: ModelSpec, k) -> float | np.ndarray:
    k_arr = np.asarray(k)
    out = (prefactor_log(prefactor_variant(spec), spec.dims, k_arr) + moment_log_upper(spec, k_arr)) / (2 * k_arr)
    return out


def finite_bound(spec: ModelSpec, k: int) -> BoundResult:
    """Upper bound on ``E||T||_inj`` at moment order ``k``."""
    k = int(k)
    lv = float(_finite_log(spec, k))
    return BoundResult(lv, math.exp(lv), k, "finite_moment", 1)


def finite_bound_curve(spec: ModelSpec, ks) -> np.ndarray:
    """Log finite bound for an array of moment orders."""
    return np.asarray(_finite_log(spec, np.asarray(ks, dtype=np.int64)), dtype=float)


# ----------------------------------------------------------------------------
# optimal moment order


def coarse_k_upper(d: int, p: int) -> int:
    """``ceil(2 p d ln(p d)) + 1``."""
    return max(1, math.ceil(2 * p * d * math.log(p * d)) + 1)


def lambert_k_upper(d: int, p: int) -> float | None:
    """Tighter range ``w_+`` for the complex cubic case, or None outside its hypothesis."""
    s = p * (d - 1) - 1.5
    if s < 1.5:
        return None
    x = -math.exp((s - 1) / (2 + s)) / (2 + s)
    return -(2 + s) * lambert_w("lower", x)


def _bisect_argmin(f, lo: int, hi: int) -> int:
    """First ``k`` in ``[lo, hi]`` with ``f(k+1) >= f(k)``; ``hi`` if none."""
    while lo < hi:
        mid = (lo + hi) // 2
        if f(mid + 1) >= f(mid):
            hi = mid
        else:
            lo = mid + 1
    return lo


def optimal_k(spec: ModelSpec) -> BoundResult:
    """Minimize the finite bound over the moment order.

    Complex Model A with cubic dims, ``d >= 2`` and ``p >= 3`` uses a
    bisection on the sign of the forward difference, whose validity rests on
    unimodality in ``k``. Every other case scans the coarse range
    exhaustively, doubling it while the bound still decreases at the edge.
    """
    d, p = spec.d, spec.p
    k_hi = coarse_k_upper(d, p)
    if spec.family == "A" and spec.field == "complex" and spec.dims.count(d) == p and d >= 2 and p >= 3:
        w_plus = lambert_k_upper(d, p)
        if w_plus is not None:
            k_hi = min(k_hi, math.ceil(w_plus))
        cache: dict[int, float] = {}

        def f(k: int) -> float:
            if k not in cache:
                cache[k] = float(_finite_log(spec, k))
            return cache[k]

        k_star = _bisect_argmin(f, 1, k_hi)
        lv = f(k_star)
        return BoundResult(lv, math.exp(lv), k_star, "finite_moment", len(cache))

    evaluations = 0
    lo = 1
    best_k, best_lv = 1, math.inf
    while True:
        ks = np.arange(lo, k_hi + 1)
        vals = finite_bound_curve(spec, ks)
        evaluations += ks.size
        i = int(np.argmin(vals))
        if vals[i] < best_lv:
            best_k, best_lv = int(ks[i]), float(vals[i])
        tail = vals[-3:]
        still_falling = tail.size == 3 and tail[2] < tail[1] < tail[0]
        if not still_falling:
            break
        if k_hi >= K_CAP:
            warnings.warn(f"optimal k search hit the cap k = {K_CAP}", RuntimeWarning, stacklevel=2)
            break
        lo, k_hi = k_hi + 1, min(2 * k_hi, K_CAP)
    return BoundResult(best_lv, math.exp(best_lv), best_k, "finite_moment", evaluations)


# ----------------------------------------------------------------------------
# asymptotic bounds


def _check_alpha_eta(alpha: float, eta: Sequence[float]) -> np.ndarray:
    eta = np.asarray(eta, dtype=float)
    if not alpha > 0 or np.any(eta <= 0):
        raise ValueError("alpha and eta must be positive")
    return eta


def psi(field: str, alpha: float, eta: Sequence[float]) -> float:
    """The asymptotic moment-bound function for aspect ratios ``eta``.

    ``eta = (eta_2, ..., eta_p)`` so ``p = len(eta) + 1``. For the complex
    field the function is

    ``e^(-1/2) (prod eta)^(-1/(2p)) [(1+a)^(1+a)/a^(1+a)]^(1/2)
    prod_i [(1+a eta_i)^(1+a eta_i)/(a eta_i)^(a eta_i)]^(1/2)``

    and the real field replaces ``a`` by ``a/2``. Evaluated in log space.
    """
    eta = _check_alpha_eta(alpha, eta)
    p = eta.size + 1
    if field == "complex":
        a = alpha
    elif field == "real":
        a = alpha / 2.0
    else:
        raise ValueError(f"unknown field {field!r}")
    b = a * eta
    log_val = (
        -0.5
        - np.sum(np.log(eta)) / (2 * p)
        + 0.5 * (1 + a) * math.log1p(1 / a)
        + 0.5 * np.sum(np.log1p(b) + b * np.log1p(1 / b))
    )
    return math.exp(log_val)


def _bisect_root(g, lo: float, hi: float) -> float:
    """Root of an increasing function by bisection to floating-point resolution."""
    glo = g(lo)
    for _ in range(400):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        gm = g(mid)
        if gm == 0.0:
            return mid
        if (gm < 0) == (glo < 0):
            lo, glo = mid, gm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def alpha0(kind: str, p: float) -> float:
    """Positive root of the optimality equation.

    ``"complex"``: ``a ln(1 + 1/a) = 1/p``; ``"real"``: ``a ln(1 + 2/a) = 2/p``;
    ``"symmetric"``: ``a ln(1 + p/a) = 1``.
    """
    if p < 2:
        raise ValueError("p must be at least 2")
    if kind == "complex":
        g = lambda a: a * math.log1p(1 / a) - 1 / p
    elif kind == "real":
        g = lambda a: a * math.log1p(2 / a) - 2 / p
    elif kind == "symmetric":
        g = lambda a: a * math.log1p(p / a) - 1
    else:
        raise ValueError(f"unknown kind {kind!r}")
    return _bisect_root(g, 1e-12, max(10.0, 10.0 * p))


def phi(alpha: float, p: float) -> float:
    """``p^(-p/2) e^(-1/2) a^(-(a+1)/2) (p+a)^((p+a)/2)``, evaluated in log space."""
    if not alpha > 0 or p < 2:
        raise ValueError("need alpha > 0 and p >= 2")
    log_val = -0.5 + 0.5 * (p * math.log1p(alpha / p) + alpha * math.log1p(p / alpha) - math.log(alpha))
    return math.exp(log_val)


def asymptotic_bound(family: str, field: str = "complex", p: int | None = None, eta: Sequence[float] | None = None) -> BoundResult:
    """Limit of the optimized bound as the dimensions grow.

    Parameters
    ----------
    family : {"A", "S", "S_tilde", "B"}
    field : {"real", "complex"}
        Used by family ``"A"`` only.
    p : int, optional
        Tensor order; required except for family ``"B"``.
    eta : sequence of float, optional
        Aspect ratios ``d_i / d_1`` for ``i >= 2``. Non-cubic ratios are
        minimized numerically over ``log alpha``.
    """
    if family == "B":
        return BoundResult(0.0, 1.0, None, "asymptotic", 1)
    if p is None or p < 2:
        raise ValueError("asymptotic bounds need p >= 2")
    if family in ("S", "S_tilde"):
        a = alpha0("symmetric", p)
        v = phi(a, p)
        return BoundResult(math.log(v), v, None, "asymptotic", 1, a)
    if family != "A":
        raise ValueError(f"unknown family {family!r}")
    if eta is None:
        eta = (1.0,) * (p - 1)
    eta = tuple(float(e) for e in eta)
    if len(eta) != p - 1:
        raise ValueError(f"eta must have p - 1 = {p - 1} entries")
    if all(e == 1.0 for e in eta):
        a = alpha0(field, p)
        v = psi(field, a, eta)
        return BoundResult(math.log(v), v, None, "asymptotic", 1, a)
    return _minimize_psi(field, eta, alpha0(field, p))


def _minimize_psi(field: str, eta: tuple[float, ...], seed_alpha: float) -> BoundResult:
    t0 = math.log(seed_alpha)
    obj = lambda t: math.log(psi(field, math.exp(t), eta))
    res = minimize_scalar(obj, bounds=(t0 - 20.0, t0 + 20.0), method="bounded", options={"xatol": 1e-12})
    a = math.exp(res.x)
    v = psi(field, a, eta)
    return BoundResult(math.log(v), v, None, "asymptotic", int(res.nfev) + 1, a)


# ----------------------------------------------------------------------------
# comparison bounds


@dataclass(frozen=True)
class ComparisonEntry:
    """One cell of the comparison table; ``value`` is None when inapplicable."""

    name: str
    value: float | None
    note: str = ""

    @property
    def applicable(self) -> bool:
        return self.value is not None


def sudakov_fernique_bound(dims: Sequence[int]) -> float:
    """``sum_j sqrt(d_j) / (prod d)^(1/(2p))`` for Gaussian real Model A."""
    p = len(dims)
    log_norm = sum(math.log(d) for d in dims) / (2 * p)
    return sum(math.sqrt(d) for d in dims) * math.exp(-log_norm)


def aden_ali_bound(dims: Sequence[int]) -> float:
    """PAC-Bayesian bound for rigidly sub-Gaussian real Model A.

    ``(prod d)^(-1/(2p)) sqrt(p (sum d_i + p max_{2<=l<=p} (sum_{|I|=p-l} d_hat(I))^(1/l)))``
    where ``d_hat(I)`` is the product of the dimensions outside ``I``.
    """
    dims = [int(d) for d in dims]
    p = len(dims)
    if p < 2:
        raise ValueError("need p >= 2")
    best = 0.0
    for ell in range(2, p + 1):
        # subsets of size l are complements of the |I| = p - l subsets
        total = sum(math.prod(c) for c in combinations(dims, ell))
        best = max(best, total ** (1.0 / ell))
    log_norm = sum(math.log(d) for d in dims) / (2 * p)
    return math.exp(-log_norm) * math.sqrt(p * (sum(dims) + p * best))


def boedihardjo_bound(d: float, p: int, C: float = 1.0) -> float:
    """``sqrt(2) p^(3/2) + C p^3 (ln d)^2 / sqrt(d)``; ``d = inf`` gives the limit."""
    if C < 1:
        raise ValueError("C must be at least 1")
    head = math.sqrt(2.0) * p**1.5
    if math.isinf(d):
        return head
    return head + C * p**3 * math.log(d) ** 2 / math.sqrt(d)


def friedland_kemp_bound(d: int, p: int, epsilon: float = 0.0, improved: bool = False) -> float:
    """High-probability bound on the injective norm of a normalized symmetric state.

    ``(1+eps) sqrt(2(d+1)) sqrt((d-1)! (d-1) ln p / p^(d-1))``; with
    ``improved=True`` the ``sqrt(2(d+1))`` factor is dropped, giving the
    matching expectation bound of the moment method. Both hold as ``p`` grows
    with ``d`` fixed.
    """
    if d < 2 or p < 2:
        raise ValueError("need d >= 2 and p >= 2")
    log_core = 0.5 * (math.lgamma(d) + math.log(d - 1) + math.log(math.log(p)) - (d - 1) * math.log(p))
    if not improved:
        log_core += 0.5 * math.log(2 * (d + 1))
    return (1 + epsilon) * math.exp(log_core)


def comparison_bounds(p: int, d: int | None = None, gaussian: bool = True, epsilon: float = 0.0, C: float = 1.0) -> dict[str, ComparisonEntry]:
    """Bounds on ``E||T||_inj`` for cubic real Model A from several methods.

    Parameters
    ----------
    p : int
    d : int or None
        Common dimension; None means the limit ``d -> inf``.
    gaussian : bool
        Gaussian entries. When False only the bounds valid for every
        rigidly sub-Gaussian law are reported.
    epsilon, C : float
        Free parameters of the Friedland-Kemp and Boedihardjo bounds.
    """
    rows: dict[str, ComparisonEntry] = {}
    kr = KAC_RICE_REFERENCE.get(p) if (d is None and gaussian) else None
    rows["kac-rice-ref"] = ComparisonEntry("kac-rice-ref", kr, "reference, not computed")
    if d is None:
        moment = asymptotic_bound("A", "real", p).value
    else:
        moment = optimal_k(ModelSpec("A", "real", (d,) * p)).value
    rows["moment"] = ComparisonEntry("moment", moment)
    sf = (float(p) if d is None else sudakov_fernique_bound((d,) * p)) if gaussian else None
    rows["sudakov-fernique"] = ComparisonEntry("sudakov-fernique", sf)
    # the cubic value does not depend on d
    rows["aden-ali"] = ComparisonEntry("aden-ali", aden_ali_bound((max(d or p, 2),) * p))
    bo = boedihardjo_bound(math.inf if d is None else d, p, C) if gaussian else None
    rows["boedihardjo"] = ComparisonEntry("boedihardjo", bo, f"parameterized C={C:g}")
    fk = friedland_kemp_bound(d, p, epsilon) if (gaussian and d is not None and d >= 2) else None
    rows["friedland-kemp"] = ComparisonEntry(
        "friedland-kemp", fk, "normalized symmetric state, d fixed and p large"
    )
    return rows
