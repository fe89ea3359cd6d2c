"""Log-space special functions used by the bound formulas.

Thin, domain-checked wrappers around :mod:`scipy.special`. Every
factorial-like quantity is carried as a logarithm so that moment orders in
the thousands never overflow.
"""

from __future__ import annotations

import math
from typing import Iterable

import numpy as np
from scipy import special

__all__ = [
    "log_gamma",
    "log_double_factorial_odd",
    "log_binomial",
    "lambert_w",
    "log_sum_exp",
]

_INV_E = math.exp(-1.0)


def log_gamma(x):
    """Return ``ln Gamma(x)`` for positive ``x`` (scalar or array)."""
    arr = np.asarray(x, dtype=float)
    if np.any(arr <= 0) or np.any(~np.isfinite(arr)):
        raise ValueError("log_gamma requires finite x > 0")
    out = special.gammaln(arr)
    return float(out) if out.ndim == 0 else out


def log_double_factorial_odd(k):
    """Return ``ln (2k-1)!!``, with ``(-1)!! = 1``.

    Computed as ``ln Gamma(2k+1) - k ln 2 - ln Gamma(k+1)``.
    """
    arr = np.asarray(k)
    if np.any(arr < 0):
        raise ValueError("k must be nonnegative")
    arr = arr.astype(float)
    out = special.gammaln(2 * arr + 1) - arr * math.log(2.0) - special.gammaln(arr + 1)
    return float(out) if out.ndim == 0 else out


def log_binomial(n, k):
    """Return ``ln C(n, k)`` for integers ``0 <= k <= n``."""
    n_arr = np.asarray(n)
    k_arr = np.asarray(k)
    if np.any(k_arr < 0) or np.any(k_arr > n_arr):
        raise ValueError("log_binomial requires 0 <= k <= n")
    n_arr = n_arr.astype(float)
    k_arr = k_arr.astype(float)
    out = (
        special.gammaln(n_arr + 1)
        - special.gammaln(k_arr + 1)
        - special.gammaln(n_arr - k_arr + 1)
    )
    return float(out) if out.ndim == 0 else out


def lambert_w(branch: str, x: float) -> float:
    """Real branches of the Lambert W function.

    Parameters
    ----------
    branch : {"principal", "lower"}
        ``"principal"`` is W_0 on ``[-1/e, inf)``; ``"lower"`` is W_{-1} on
        ``[-1/e, 0)`` and returns values ``<= -1``.
    x : float
        Argument.

    Returns
    -------
    float
        ``w`` with ``w * exp(w) = x``.

    Notes
    -----
    SciPy's evaluation, or a series about the branch point when ``x`` is
    within ``1e-3/e`` of ``-1/e``, is followed by Halley polishing steps.
    """
    x = float(x)
    if branch not in ("principal", "lower"):
        raise ValueError(f"unknown branch {branch!r}")
    # float(-1/e) sits a hair below the true branch point
    if x < -_INV_E - 4e-16 or not math.isfinite(x):
        raise ValueError("lambert_w argument below -1/e")
    if branch == "lower" and x >= 0:
        raise ValueError("lower branch requires x < 0")
    if x <= -_INV_E + 1e-15:
        return -1.0
    if x == 0.0:
        return 0.0
    q = math.e * x + 1.0
    if q < 1e-3:
        # series about the branch point; SciPy loses accuracy there
        r = math.sqrt(2.0 * q) * (1.0 if branch == "principal" else -1.0)
        w = -1.0 + r * (1.0 + r * (-1.0 / 3.0 + r * (11.0 / 72.0 + r * (-43.0 / 540.0))))
    else:
        w = float(special.lambertw(x, 0 if branch == "principal" else -1).real)
    for _ in range(3):
        ew = math.exp(w)
        f = w * ew - x
        if f == 0.0 or w == -1.0:
            break
        wp1 = w + 1.0
        step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1))
        w_new = w - step
        if abs(w_new * math.exp(w_new) - x) >= abs(f):
            break
        w = w_new
    return w


def log_sum_exp(values: Iterable[float]) -> float:
    """Overflow-free ``ln sum(exp(values))``."""
    arr = np.asarray(list(values) if not isinstance(values, np.ndarray) else values, dtype=float)
    if arr.size == 0:
        raise ValueError("log_sum_exp of an empty sequence")
    return float(special.logsumexp(arr))
