"""Dense symmetric eigendecomposition (cyclic Jacobi) and matrix norms."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _backend

TOL = 1e-12
MAX_SWEEPS = 100


class EigenError(ArithmeticError):
    pass


@dataclass
class EigenDecomposition:
    eigenvalues: np.ndarray  # descending
    eigenvectors: np.ndarray  # column i pairs with eigenvalues[i]
    sweeps: int = 0


def symmetric_eig(a, tol: float = TOL, max_sweeps: int = MAX_SWEEPS, impl=None) -> EigenDecomposition:
    """Full spectrum of a real symmetric matrix, sorted descending.

    Converged when the off-diagonal Frobenius norm falls to ``tol`` times
    the initial Frobenius norm. Each eigenvector is signed so that its
    largest-magnitude component is positive.
    """
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise EigenError(f"expected a non-empty square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise EigenError("matrix has non-finite entries")
    scale = max(1.0, float(np.abs(a).max()))
    if np.abs(a - a.T).max() > 1e-9 * scale:
        raise EigenError("matrix is not symmetric")
    w, v, sweeps = _backend.jacobi_eig(np.ascontiguousarray(a), tol, max_sweeps, impl=impl)
    if sweeps < 0:
        raise EigenError(f"Jacobi iteration did not converge in {max_sweeps} sweeps")
    order = np.argsort(-w, kind="stable")
    w, v = w[order], v[:, order]
    flip = v[np.argmax(np.abs(v), axis=0), np.arange(v.shape[1])] < 0
    v[:, flip] *= -1.0
    return EigenDecomposition(w, v, sweeps)


def frobenius_sq(a) -> float:
    a = np.asarray(a, dtype=np.float64)
    return float((a * a).sum())


def trace(a) -> float:
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"trace needs a square matrix, got shape {a.shape}")
    return float(np.trace(a))
