"""Kernel functions, Gram matrices, median-heuristic bandwidths and centering."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from . import _backend

KINDS = ("linear", "polynomial", "rbf", "laplacian", "rational_quadratic")
_KIND_CODE = {k: i for i, k in enumerate(KINDS)}
_ALIASES = {"poly": "polynomial", "rq": "rational_quadratic", "gaussian": "rbf"}
SCALE_FREE = ("linear", "polynomial")

MEDIAN = "median"
Bandwidth = Union[float, str]


class KernelError(ValueError):
    pass


@dataclass(frozen=True)
class KernelSpec:
    """Which kernel to evaluate and with which parameters.

    ``bandwidth`` is either a fixed positive gamma or the string
    ``"median"`` for the median heuristic. Linear and polynomial kernels
    ignore it.
    """

    kind: str = "rbf"
    degree: int = 2
    coef0: float = 1.0
    bandwidth: Bandwidth = MEDIAN
    rq_alpha: float = 1.0

    def __post_init__(self):
        kind = _ALIASES.get(self.kind.lower(), self.kind.lower())
        if kind not in _KIND_CODE:
            raise KernelError(f"unknown kernel kind {self.kind!r}; expected one of {KINDS}")
        object.__setattr__(self, "kind", kind)
        if kind == "polynomial" and (int(self.degree) != self.degree or self.degree < 1):
            raise KernelError(f"polynomial degree must be an integer >= 1, got {self.degree}")
        object.__setattr__(self, "degree", int(self.degree))
        if isinstance(self.bandwidth, str):
            if self.bandwidth != MEDIAN:
                raise KernelError(f"bandwidth must be a positive number or {MEDIAN!r}")
        elif not (math.isfinite(self.bandwidth) and self.bandwidth > 0):
            raise KernelError(f"fixed bandwidth must be > 0, got {self.bandwidth}")
        if not (math.isfinite(self.rq_alpha) and self.rq_alpha > 0):
            raise KernelError(f"rq_alpha must be > 0, got {self.rq_alpha}")

    @property
    def code(self) -> int:
        return _KIND_CODE[self.kind]

    @property
    def uses_bandwidth(self) -> bool:
        return self.kind not in SCALE_FREE

    def with_bandwidth(self, gamma: float) -> "KernelSpec":
        return KernelSpec(self.kind, self.degree, self.coef0, float(gamma), self.rq_alpha)


@dataclass
class GramMatrix:
    data: np.ndarray
    centered: bool
    kernel: KernelSpec
    gamma: float = 1.0

    @property
    def size(self) -> int:
        return self.data.shape[0]


@dataclass
class CrossGramMatrix:
    data: np.ndarray
    kernel: KernelSpec
    gamma: float = 1.0


def as_batch(z, min_rows: int = 1, name: str = "batch") -> np.ndarray:
    """Validate an embedding batch: 2-D, finite, at least ``min_rows`` rows."""
    z = np.asarray(z, dtype=np.float64)
    if z.ndim != 2:
        raise KernelError(f"{name} must be a 2-D (b, p) array, got shape {z.shape}")
    if z.shape[0] < min_rows:
        raise KernelError(f"{name} needs at least {min_rows} rows, got {z.shape[0]}")
    if z.shape[1] < 1:
        raise KernelError(f"{name} has zero columns")
    if not np.all(np.isfinite(z)):
        raise KernelError(f"{name} contains non-finite entries")
    return z


def kernel_eval(spec: KernelSpec, u, v, gamma: float) -> float:
    """Evaluate k(u, v) for one pair of vectors with an already-resolved gamma."""
    if not (math.isfinite(gamma) and gamma > 0):
        raise KernelError(f"gamma must be a positive finite number, got {gamma}")
    u = [float(x) for x in u]
    v = [float(x) for x in v]
    if len(u) != len(v):
        raise KernelError(f"vector lengths differ: {len(u)} vs {len(v)}")
    if not all(math.isfinite(x) for x in u + v):
        raise KernelError("non-finite input to kernel_eval")
    kind = spec.kind
    if kind in SCALE_FREE:
        dot = math.fsum(a * b for a, b in zip(u, v))
        return dot if kind == "linear" else (dot + spec.coef0) ** spec.degree
    if kind == "laplacian":
        return math.exp(-gamma * math.fsum(abs(a - b) for a, b in zip(u, v)))
    sq = math.fsum((a - b) ** 2 for a, b in zip(u, v))
    if kind == "rbf":
        return math.exp(-gamma * sq)
    return (1.0 + gamma * sq / (2.0 * spec.rq_alpha)) ** (-spec.rq_alpha)


def pairwise_distances(z: np.ndarray, metric: str = "sqeuclidean") -> np.ndarray:
    """Condensed vector of the b(b-1)/2 pairwise distances (i < j)."""
    i, j = np.triu_indices(z.shape[0], k=1)
    diff = z[i] - z[j]
    if metric == "sqeuclidean":
        return (diff * diff).sum(axis=1)
    if metric == "cityblock":
        return np.abs(diff).sum(axis=1)
    raise KernelError(f"unknown metric {metric!r}")


def resolve_bandwidth(spec: KernelSpec, batch) -> float:
    """Return the gamma to use for ``batch``.

    Median heuristic: 1 / (2 median d^2) for RBF and rational quadratic,
    1 / median d_1 for Laplacian; 1.0 when the median is zero.
    """
    z = as_batch(batch, min_rows=2)
    if not spec.uses_bandwidth:
        return 1.0
    if spec.bandwidth != MEDIAN:
        return float(spec.bandwidth)
    if spec.kind == "laplacian":
        m = float(np.median(pairwise_distances(z, "cityblock")))
        return 1.0 / m if m > 0 else 1.0
    m = float(np.median(pairwise_distances(z, "sqeuclidean")))
    return 1.0 / (2.0 * m) if m > 0 else 1.0


def _pairwise(spec, a, b, gamma, symmetric):
    return _backend.pairwise(
        np.ascontiguousarray(a), np.ascontiguousarray(b), spec.code, float(gamma),
        spec.degree, float(spec.coef0), float(spec.rq_alpha), symmetric,
    )


def gram(spec: KernelSpec, batch, gamma: float | None = None) -> GramMatrix:
    """Uncentered Gram matrix K[i, j] = k(z_i, z_j).

    ``gamma`` overrides bandwidth resolution; callers that share one
    bandwidth across several Grams pass it explicitly.
    """
    z = as_batch(batch)
    if gamma is None:
        gamma = resolve_bandwidth(spec, z)
    return GramMatrix(_pairwise(spec, z, z, gamma, True), False, spec, float(gamma))


def shared_bandwidth(spec: KernelSpec, batch_a, batch_b) -> float:
    """Bandwidth resolved once from the row-concatenation of two views."""
    return resolve_bandwidth(spec, np.vstack([batch_a, batch_b]))


def cross_gram(spec: KernelSpec, batch_a, batch_b, gamma: float | None = None) -> CrossGramMatrix:
    """Cross-view Gram C[i, j] = k(z_i, z'_j)."""
    a = as_batch(batch_a, name="batch_a")
    b = as_batch(batch_b, name="batch_b")
    if a.shape != b.shape:
        raise KernelError(f"cross_gram shape mismatch: {a.shape} vs {b.shape}")
    if gamma is None:
        gamma = shared_bandwidth(spec, a, b)
    return CrossGramMatrix(_pairwise(spec, a, b, gamma, False), spec, float(gamma))


def center_array(k: np.ndarray) -> np.ndarray:
    """H K H with H = I - 11^T/b, via row/column/grand means."""
    row = k.mean(axis=1, keepdims=True)
    col = k.mean(axis=0, keepdims=True)
    out = k - row - col + k.mean()
    # restore exact symmetry lost to rounding in the two mean vectors
    if k.shape[0] == k.shape[1] and np.array_equal(k, k.T):
        out = np.triu(out) + np.triu(out, 1).T
    return out


def double_center(g: GramMatrix) -> GramMatrix:
    if g.centered:
        raise KernelError("Gram matrix is already centered")
    if g.data.ndim != 2 or g.data.shape[0] != g.data.shape[1]:
        raise KernelError(f"double_center needs a square matrix, got {g.data.shape}")
    return GramMatrix(center_array(g.data), True, g.kernel, g.gamma)


def centered_gram(spec: KernelSpec, batch, gamma: float | None = None) -> GramMatrix:
    return double_center(gram(spec, batch, gamma))
