"""Dense order-p tensors and the Hermitian pairing used throughout.

Convention: the first argument of every pairing is conjugated, so
``<T, x_1 (x) ... (x) x_p> = sum_I conj(T_I) prod_m x_m[I_m]``.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from typing import Sequence

import numpy as np

__all__ = [
    "MAX_ENTRIES",
    "DenseTensor",
    "rank_one_overlap",
    "partial_contraction",
    "frobenius_norm",
    "symmetrize",
    "is_symmetric",
    "ravel_index",
    "unravel_index",
    "sorted_index_keys",
    "save_text",
    "load_text",
]

MAX_ENTRIES = 2**28


def _check_capacity(shape: Sequence[int]) -> None:
    if len(shape) == 0 or any(int(d) < 1 for d in shape):
        raise ValueError(f"invalid shape {tuple(shape)}")
    if math.prod(int(d) for d in shape) > MAX_ENTRIES:
        raise MemoryError(f"tensor of shape {tuple(shape)} exceeds {MAX_ENTRIES} entries")


@dataclass(frozen=True, eq=False)
class DenseTensor:
    """Immutable dense tensor over the reals or the complex numbers.

    Parameters
    ----------
    data : array_like
        Entries, stored with shape ``(d_1, ..., d_p)`` in row-major order.
    field : {"real", "complex"}, optional
        Scalar field. Inferred from the dtype of ``data`` when omitted.
    """

    data: np.ndarray
    field: str

    def __init__(self, data, field: str | None = None):
        arr = np.asarray(data)
        if field is None:
            field = "complex" if np.iscomplexobj(arr) else "real"
        if field not in ("real", "complex"):
            raise ValueError(f"unknown field {field!r}")
        if field == "real":
            if np.iscomplexobj(arr):
                raise ValueError("complex data for a real tensor")
            arr = np.array(arr, dtype=np.float64, order="C")
        else:
            arr = np.array(arr, dtype=np.complex128, order="C")
        if arr.ndim == 0:
            raise ValueError("tensor order must be at least 1")
        _check_capacity(arr.shape)
        if not np.all(np.isfinite(arr)):
            raise ValueError("tensor entries must be finite")
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)
        object.__setattr__(self, "field", field)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def order(self) -> int:
        return self.data.ndim

    @property
    def is_cubic(self) -> bool:
        return len(set(self.shape)) == 1

    def flat(self) -> np.ndarray:
        """Row-major flat view of the entries."""
        return self.data.reshape(-1)

    def __array__(self, dtype=None, copy=None):
        return self.data if dtype is None else self.data.astype(dtype)

    def __repr__(self) -> str:
        return f"DenseTensor(field={self.field!r}, shape={self.shape})"


def _as_factors(T: DenseTensor, X: Sequence[np.ndarray]) -> list[np.ndarray]:
    if len(X) != T.order:
        raise ValueError(f"expected {T.order} factors, got {len(X)}")
    dtype = np.float64 if T.field == "real" else np.complex128
    out = []
    for m, x in enumerate(X):
        x = np.asarray(x)
        if T.field == "real" and np.iscomplexobj(x):
            raise ValueError("complex factor for a real tensor")
        if x.shape != (T.shape[m],):
            raise ValueError(f"factor {m} has shape {x.shape}, expected ({T.shape[m]},)")
        out.append(x.astype(dtype, copy=False))
    return out


def rank_one_overlap(T: DenseTensor, X: Sequence[np.ndarray]) -> complex | float:
    """Hermitian pairing of ``T`` with the product tensor ``x_1 (x) ... (x) x_p``."""
    X = _as_factors(T, X)
    v = T.data.conj() if T.field == "complex" else T.data
    for x in reversed(X):
        v = v @ x
    return v.item()


def partial_contraction(T: DenseTensor, X: Sequence[np.ndarray], slot: int) -> np.ndarray:
    """Contract ``conj(T)`` against every factor except ``X[slot]``.

    ``slot`` is zero-based. The result ``w`` satisfies
    ``rank_one_overlap(T, X) == w @ X[slot]``.
    """
    X = _as_factors(T, X)
    if not 0 <= slot < T.order:
        raise IndexError(f"slot {slot} out of range for order {T.order}")
    v = T.data.conj() if T.field == "complex" else T.data
    # trailing slots first, then leading ones via the first axis
    for m in range(T.order - 1, slot, -1):
        v = v @ X[m]
    for m in range(slot):
        v = np.tensordot(X[m], v, axes=(0, 0))
    return np.array(v, copy=True)


def frobenius_norm(T: DenseTensor) -> float:
    return float(np.linalg.norm(T.flat()))


def ravel_index(index: Sequence[int], shape: Sequence[int]) -> int:
    """Row-major flat position of a multi-index."""
    return int(np.ravel_multi_index(tuple(index), tuple(shape)))


def unravel_index(flat: int, shape: Sequence[int]) -> tuple[int, ...]:
    return tuple(int(i) for i in np.unravel_index(flat, tuple(shape)))


def sorted_index_keys(d: int, p: int) -> np.ndarray:
    """Flat index of the sorted representative of every entry of a cubic tensor.

    Returns an integer array of length ``d**p``; entry ``j`` is the flat index
    of ``sorted(unravel(j))``.
    """
    shape = (d,) * p
    idx = np.indices(shape).reshape(p, -1)
    idx.sort(axis=0)
    return np.ravel_multi_index(tuple(idx), shape)


def _require_cubic(T: DenseTensor) -> int:
    if not T.is_cubic:
        raise ValueError(f"operation requires a cubic tensor, got shape {T.shape}")
    return T.shape[0]


def symmetrize(T: DenseTensor) -> DenseTensor:
    """Project onto the symmetric subspace by averaging each permutation orbit."""
    d = _require_cubic(T)
    keys = sorted_index_keys(d, T.order)
    flat = T.flat()
    counts = np.bincount(keys, minlength=flat.size)
    sums = np.bincount(keys, weights=flat.real, minlength=flat.size)
    if T.field == "complex":
        sums = sums + 1j * np.bincount(keys, weights=flat.imag, minlength=flat.size)
    out = sums[keys] / counts[keys]
    return DenseTensor(out.reshape(T.shape), T.field)


def is_symmetric(T: DenseTensor, tol: float = 0.0) -> bool:
    d = _require_cubic(T)
    flat = T.flat()
    keys = sorted_index_keys(d, T.order)
    return bool(np.all(np.abs(flat - flat[keys]) <= tol))


def save_text(T: DenseTensor, path: str | os.PathLike) -> None:
    """Write ``T`` in the plain text format.

    The header is ``field p d_1 ... d_p``; each following line holds one entry
    in row-major order, as ``re`` or ``re im``.
    """
    lines = [" ".join([T.field, str(T.order), *map(str, T.shape)])]
    if T.field == "real":
        lines.extend(repr(float(v)) for v in T.flat())
    else:
        lines.extend(f"{float(v.real)!r} {float(v.imag)!r}" for v in T.flat())
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def load_text(path: str | os.PathLike) -> DenseTensor:
    with open(path, encoding="ascii") as fh:
        header = fh.readline().split()
        if len(header) < 3:
            raise ValueError("malformed tensor header")
        field, p = header[0], int(header[1])
        shape = tuple(int(t) for t in header[2:])
        if field not in ("real", "complex") or len(shape) != p:
            raise ValueError("malformed tensor header")
        _check_capacity(shape)
        ncol = 1 if field == "real" else 2
        body = np.loadtxt(fh, dtype=float, ndmin=2)
    n = math.prod(shape)
    if body.shape != (n, ncol):
        raise ValueError(f"expected {n} entries with {ncol} column(s)")
    data = body[:, 0] if field == "real" else body[:, 0] + 1j * body[:, 1]
    return DenseTensor(data.reshape(shape), field)
