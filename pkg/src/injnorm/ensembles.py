"""Seeded samplers for the random tensor models.

Randomness comes from NumPy's counter-based Philox generator keyed by the
pair ``(master_seed, stream_id)``; child streams are derived by hashing,
so parallel tasks never share generator state.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np
from scipy.special import gammaln

from .tensor import DenseTensor, sorted_index_keys, symmetrize

__all__ = [
    "DIST_KINDS",
    "FAMILIES",
    "EntryDistribution",
    "ModelSpec",
    "SeedSpec",
    "draw_entries",
    "sample_model_a",
    "sample_model_s",
    "sample_model_s_tilde",
    "sample_model_b",
    "sample",
    "sample_uniform_sphere",
    "parse_model_flags",
]

_MASK64 = (1 << 64) - 1

REAL_KINDS = ("gaussian_real", "rademacher", "uniform_sym")
COMPLEX_KINDS = ("gaussian_complex", "steinhaus")
DIST_KINDS = REAL_KINDS + COMPLEX_KINDS
FAMILIES = ("A", "S", "S_tilde", "B")


@dataclass(frozen=True)
class SeedSpec:
    """Key of an independent random stream."""

    master_seed: int = 0
    stream_id: int = 0

    def __post_init__(self):
        object.__setattr__(self, "master_seed", int(self.master_seed) & _MASK64)
        object.__setattr__(self, "stream_id", int(self.stream_id) & _MASK64)

    def generator(self) -> np.random.Generator:
        key = self.master_seed | (self.stream_id << 64)
        return np.random.Generator(np.random.Philox(key=key))

    def spawn(self, index: int) -> "SeedSpec":
        """Child stream number ``index``; distinct indices give distinct keys."""
        h = hashlib.blake2b(
            f"{self.stream_id}:{int(index)}".encode(), digest_size=8
        ).digest()
        return SeedSpec(self.master_seed, int.from_bytes(h, "little"))


@dataclass(frozen=True)
class EntryDistribution:
    """Entry law; ``scale`` is the standard deviation of ``|entry|``."""

    kind: str = "gaussian_real"
    scale: float = 1.0

    def __post_init__(self):
        if self.kind not in DIST_KINDS:
            raise ValueError(f"unknown distribution {self.kind!r}")
        if not self.scale > 0:
            raise ValueError("scale must be positive")

    @property
    def field(self) -> str:
        return "real" if self.kind in REAL_KINDS else "complex"


def draw_entries(kind: str, size, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    """Draw i.i.d. entries with ``E|X|^2 = scale**2``."""
    if kind == "gaussian_real":
        out = rng.standard_normal(size)
    elif kind == "rademacher":
        out = rng.integers(0, 2, size=size) * 2.0 - 1.0
    elif kind == "uniform_sym":
        r3 = math.sqrt(3.0)
        out = rng.uniform(-r3, r3, size=size)
    elif kind == "gaussian_complex":
        g = rng.standard_normal((2,) + tuple(np.atleast_1d(size)))
        out = (g[0] + 1j * g[1]) / math.sqrt(2.0)
    elif kind == "steinhaus":
        out = np.exp(2j * math.pi * rng.random(size))
    else:
        raise ValueError(f"unknown distribution {kind!r}")
    return out * scale


@dataclass(frozen=True)
class ModelSpec:
    """Random tensor ensemble.

    Parameters
    ----------
    family : {"A", "S", "S_tilde", "B"}
    field : {"real", "complex"}
    dims : tuple of int
    rank : int, optional
        Number of rank-one terms, family ``"B"`` only.
    dist : EntryDistribution, optional
        Only ``kind`` is used; each sampler sets the scale itself. Defaults
        to the Gaussian law of the field.
    """

    family: str
    field: str
    dims: tuple[int, ...]
    rank: int = 1
    dist: EntryDistribution | None = None

    def __post_init__(self):
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        if self.dist is None:
            kind = "gaussian_real" if self.field == "real" else "gaussian_complex"
            object.__setattr__(self, "dist", EntryDistribution(kind))
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        if self.field not in ("real", "complex"):
            raise ValueError(f"unknown field {self.field!r}")
        if len(self.dims) == 0 or any(d < 1 for d in self.dims):
            raise ValueError(f"invalid dims {self.dims}")
        if self.family != "A":
            if self.field != "complex":
                raise ValueError(f"family {self.family} is complex only")
            if len(set(self.dims)) != 1:
                raise ValueError(f"family {self.family} requires cubic dims")
        if self.family == "B" and self.rank < 1:
            raise ValueError("rank must be at least 1")
        if self.dist.field != self.field:
            raise ValueError(f"distribution {self.dist.kind} does not match field {self.field}")

    @property
    def p(self) -> int:
        return len(self.dims)

    @property
    def d(self) -> int:
        """Common dimension of a cubic spec (largest dimension otherwise)."""
        return max(self.dims)


def _require(spec: ModelSpec, family: str) -> None:
    if spec.family != family:
        raise ValueError(f"expected family {family}, got {spec.family}")


def sample_model_a(spec: ModelSpec, seed: SeedSpec) -> DenseTensor:
    """I.i.d. entries with variance ``1 / (d_1 ... d_p)^(1/p)``."""
    _require(spec, "A")
    scale = math.exp(-sum(math.log(d) for d in spec.dims) / (2 * spec.p))
    data = draw_entries(spec.dist.kind, spec.dims, seed.generator(), scale)
    return DenseTensor(data, spec.field)


def _log_stabilizer(d: int, p: int, keys: np.ndarray) -> np.ndarray:
    """``ln(m_1! ... m_k!)`` for the sorted multi-index behind each flat key."""
    idx = np.stack(np.unravel_index(keys, (d,) * p))
    out = np.zeros(keys.shape[0])
    for v in range(d):
        out += gammaln((idx == v).sum(axis=0) + 1.0)
    return out


def sample_model_s(spec: ModelSpec, seed: SeedSpec) -> DenseTensor:
    """Symmetric tensor with one draw per sorted multi-index.

    The entry at a multi-index with multiplicities ``m_1, ..., m_k`` is
    ``sqrt(m_1! ... m_k! / p!) * gamma`` where ``Var gamma = 1/d``.
    """
    _require(spec, "S")
    d, p = spec.d, spec.p
    keys = sorted_index_keys(d, p)
    reps, inverse = np.unique(keys, return_inverse=True)
    gamma = draw_entries(spec.dist.kind, reps.size, seed.generator(), 1.0 / math.sqrt(d))
    scale = np.exp(0.5 * (_log_stabilizer(d, p, reps) - math.lgamma(p + 1)))
    data = (gamma * scale)[inverse]
    return DenseTensor(data.reshape(spec.dims), "complex")


def sample_model_s_tilde(spec: ModelSpec, seed: SeedSpec) -> DenseTensor:
    """Symmetrization of a Model A sample with the same entry law."""
    _require(spec, "S_tilde")
    return symmetrize(sample_model_a(replace(spec, family="A"), seed))


def sample_model_b(spec: ModelSpec, seed: SeedSpec) -> tuple[DenseTensor, np.ndarray]:
    """Sum of ``R`` random rank-one tensors.

    Returns
    -------
    tensor : DenseTensor
    factors : ndarray, shape (R, p, d)
        ``factors[i, m]`` is the vector in slot ``m`` of term ``i``.
    """
    _require(spec, "B")
    d, p, R = spec.d, spec.p, spec.rank
    factors = draw_entries(spec.dist.kind, (R, p, d), seed.generator(), 1.0 / math.sqrt(d))
    factors = factors.astype(np.complex128)
    data = np.zeros(spec.dims, dtype=np.complex128)
    for i in range(R):
        term = factors[i, 0]
        for m in range(1, p):
            term = np.multiply.outer(term, factors[i, m])
        data += term
    return DenseTensor(data, "complex"), factors


def sample(spec: ModelSpec, seed: SeedSpec) -> DenseTensor:
    """Draw one tensor from any family (factors of family B are dropped)."""
    if spec.family == "A":
        return sample_model_a(spec, seed)
    if spec.family == "S":
        return sample_model_s(spec, seed)
    if spec.family == "S_tilde":
        return sample_model_s_tilde(spec, seed)
    return sample_model_b(spec, seed)[0]


def sample_uniform_sphere(d: int, field: str, seed: SeedSpec | np.random.Generator, size: int | None = None) -> np.ndarray:
    """Uniform unit vector(s) in ``R^d`` or ``C^d``.

    With ``size`` given, returns an array of shape ``(size, d)``.
    """
    if d < 1:
        raise ValueError("dimension must be at least 1")
    rng = seed.generator() if isinstance(seed, SeedSpec) else seed
    shape = (d,) if size is None else (size, d)
    kind = "gaussian_real" if field == "real" else "gaussian_complex"
    g = draw_entries(kind, shape, rng)
    return g / np.linalg.norm(g, axis=-1, keepdims=True)


_CLI_MODELS = {
    "a-real": ("A", "real"),
    "a-complex": ("A", "complex"),
    "sym": ("S", "complex"),
    "sym-tilde": ("S_tilde", "complex"),
    "bounded-rank": ("B", "complex"),
}
_CLI_DISTS = {
    ("gauss", "real"): "gaussian_real",
    ("gauss", "complex"): "gaussian_complex",
    ("rademacher", "real"): "rademacher",
    ("uniform", "real"): "uniform_sym",
    ("steinhaus", "complex"): "steinhaus",
}


def parse_model_flags(model: str, dims: Sequence[int], dist: str = "gauss", rank: int = 1) -> ModelSpec:
    """Build a :class:`ModelSpec` from command-line style names."""
    if model not in _CLI_MODELS:
        raise ValueError(f"unknown model {model!r}")
    family, field = _CLI_MODELS[model]
    try:
        kind = _CLI_DISTS[(dist, field)]
    except KeyError:
        raise ValueError(f"distribution {dist!r} is not available for model {model!r}") from None
    return ModelSpec(family, field, tuple(dims), rank, EntryDistribution(kind))
