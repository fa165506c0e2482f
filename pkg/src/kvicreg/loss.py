"""Kernel VICReg loss terms, the Euclidean VICReg baseline, and their gradients.

All kernel terms work on Gram matrices of one batch of embeddings. The
variance and covariance terms use the double-centered Gram K^ = H K H;
the invariance term uses the trace distance between the two views.

Gradients are assembled in two stages: first dL/dK for every Gram
matrix a term touches, then the chain rule through the kernel entries
(``kernel_chain``). Median-heuristic bandwidths are held fixed while
differentiating.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .kernels import (
    KernelError,
    KernelSpec,
    as_batch,
    center_array,
    cross_gram,
    gram,
    resolve_bandwidth,
    shared_bandwidth,
)
from .linalg import EigenDecomposition, symmetric_eig

N_TOP = 8
COVARIANCE_VARIANTS = ("sqrt", "squared")


class LossError(ArithmeticError):
    pass


@dataclass(frozen=True)
class LossWeights:
    alpha: float = 0.5
    beta: float = 2.0
    zeta: float = 3.0
    gamma_thresh: float = 1.0
    epsilon: float = 1e-6

    def __post_init__(self):
        for name in ("alpha", "beta", "zeta", "gamma_thresh", "epsilon"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value}")
        for name in ("alpha", "beta", "zeta"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0, got {getattr(self, name)}")
        if self.gamma_thresh <= 0:
            raise ValueError(f"gamma_thresh must be > 0, got {self.gamma_thresh}")
        if self.epsilon <= 0:
            raise ValueError(f"epsilon must be > 0, got {self.epsilon}")


@dataclass
class LossReport:
    total: float
    invariance: float
    variance_x: float
    variance_xp: float
    covariance_x: float
    covariance_xp: float
    top_eigenvalues: np.ndarray = field(default_factory=lambda: np.zeros(N_TOP))

    def recombine(self, w: LossWeights) -> float:
        return (w.alpha * self.invariance
                + w.beta * (self.variance_x + self.variance_xp)
                + w.zeta * (self.covariance_x + self.covariance_xp))


@dataclass
class LossGradients:
    grad_x: np.ndarray
    grad_xp: np.ndarray


@dataclass(frozen=True)
class Bandwidths:
    """Resolved gammas: shared cross-view one for invariance, one per view otherwise."""

    invariance: float
    x: float
    xp: float


def loss_bandwidths(spec: KernelSpec, zx, zxp) -> Bandwidths:
    return Bandwidths(shared_bandwidth(spec, zx, zxp),
                      resolve_bandwidth(spec, zx),
                      resolve_bandwidth(spec, zxp))


def _pair(zx, zxp):
    zx = as_batch(zx, name="zx")
    zxp = as_batch(zxp, name="zxp")
    if zx.shape != zxp.shape:
        raise KernelError(f"view shapes differ: {zx.shape} vs {zxp.shape}")
    return zx, zxp


def _top(eigenvalues):
    out = np.zeros(N_TOP)
    k = min(N_TOP, eigenvalues.size)
    out[:k] = eigenvalues[:k]
    return out


# -- kernel terms -------------------------------------------------------------

def kernel_invariance(spec: KernelSpec, zx, zxp, gamma: float | None = None) -> float:
    """(1/b) tr(K(x,x) + K(x',x') - 2 K(x,x')) with one shared bandwidth."""
    zx, zxp = _pair(zx, zxp)
    if gamma is None:
        gamma = shared_bandwidth(spec, zx, zxp)
    b = zx.shape[0]
    kxx = gram(spec, zx, gamma).data
    kpp = gram(spec, zxp, gamma).data
    kxp = cross_gram(spec, zx, zxp, gamma).data
    return float((np.trace(kxx) + np.trace(kpp) - 2.0 * np.trace(kxp)) / b)


def _variance_value(eigenvalues, b, w):
    lam = np.maximum(eigenvalues, 0.0)
    hinge = np.maximum(0.0, w.gamma_thresh - np.sqrt(lam / b + w.epsilon))
    return float((hinge * hinge).sum() / b)


def _variance_dkhat(eig: EigenDecomposition, b, w):
    """dL_var/dK^ = sum_i f'(lambda_i) v_i v_i^T."""
    lam = eig.eigenvalues
    s = np.sqrt(np.maximum(lam, 0.0) / b + w.epsilon)
    gap = w.gamma_thresh - s
    fprime = np.where((gap > 0) & (lam > 0), -gap / (b * b * s), 0.0)
    v = eig.eigenvectors
    return (v * fprime) @ v.T


def _covariance_value(khat, variant):
    b = khat.shape[0]
    off = khat - np.diag(np.diag(khat))
    mass = float((off * off).sum())
    if variant == "sqrt":
        return math.sqrt(max(mass, 0.0)) / b
    if variant == "squared":
        return mass / (b * b)
    raise ValueError(f"unknown covariance variant {variant!r}")


def _covariance_dkhat(khat, value, variant):
    b = khat.shape[0]
    off = khat - np.diag(np.diag(khat))
    if variant == "squared":
        return 2.0 * off / (b * b)
    if value <= 0.0:
        return np.zeros_like(khat)
    return off / (b * b * value)


def kernel_variance(spec: KernelSpec, z, w: LossWeights, gamma: float | None = None) -> float:
    """(1/b) sum_i [gamma_thresh - sqrt(lambda_i/b + eps)]_+^2 over the centered spectrum."""
    z = as_batch(z, min_rows=2)
    khat = center_array(gram(spec, z, gamma).data)
    return _variance_value(symmetric_eig(khat).eigenvalues, z.shape[0], w)


def kernel_covariance(spec: KernelSpec, z, gamma: float | None = None, variant: str = "sqrt") -> float:
    """Hilbert-Schmidt covariance penalty from the off-diagonal mass of K^."""
    z = as_batch(z, min_rows=2)
    return _covariance_value(center_array(gram(spec, z, gamma).data), variant)


# -- chain rule through kernel entries -----------------------------------------

def kernel_chain(spec: KernelSpec, gamma: float, a, b, k_ab, weights):
    """Return r with r[i] = sum_j weights[i, j] * d k(a_i, b_j) / d a_i.

    ``k_ab`` is the matrix of k(a_i, b_j) already evaluated with ``gamma``.
    """
    kind = spec.kind
    if kind == "linear":
        return weights @ b
    if kind == "polynomial":
        dots = a @ b.T
        m = weights * (spec.degree * (dots + spec.coef0) ** (spec.degree - 1))
        return m @ b
    if kind == "laplacian":
        m = weights * (-gamma * k_ab)
        signs = np.sign(a[:, None, :] - b[None, :, :])
        return np.einsum("ij,ijk->ik", m, signs)
    if kind == "rbf":
        m = weights * (-2.0 * gamma * k_ab)
    else:
        m = weights * (-gamma * k_ab ** (1.0 + 1.0 / spec.rq_alpha))
    return m.sum(axis=1)[:, None] * a - m @ b


def _view_terms(spec, z, gamma, w, variant, want_grad):
    """Variance, covariance and their dL/dK (already weighted by beta, zeta) for one view."""
    b = z.shape[0]
    k = gram(spec, z, gamma).data
    khat = center_array(k)
    eig = symmetric_eig(khat)
    var = _variance_value(eig.eigenvalues, b, w)
    cov = _covariance_value(khat, variant)
    dk = None
    if want_grad:
        dkhat = np.zeros_like(khat)
        if w.beta:
            dkhat += w.beta * _variance_dkhat(eig, b, w)
        if w.zeta:
            dkhat += w.zeta * _covariance_dkhat(khat, cov, variant)
        dk = center_array(dkhat)
    return var, cov, eig, k, dk


def _kernel_loss(spec, zx, zxp, w, variant, bandwidths, want_grad):
    zx, zxp = _pair(zx, zxp)
    if zx.shape[0] < 2:
        raise KernelError("kernel VICReg needs at least 2 rows per view")
    if variant not in COVARIANCE_VARIANTS:
        raise ValueError(f"unknown covariance variant {variant!r}")
    bw = bandwidths or loss_bandwidths(spec, zx, zxp)
    b = zx.shape[0]

    var_x, cov_x, eig_x, kx, dkx = _view_terms(spec, zx, bw.x, w, variant, want_grad)
    var_p, cov_p, _, kp, dkp = _view_terms(spec, zxp, bw.xp, w, variant, want_grad)

    g = bw.invariance
    kxx_inv = kx if g == bw.x else gram(spec, zx, g).data
    kpp_inv = kp if g == bw.xp else gram(spec, zxp, g).data
    kxp = cross_gram(spec, zx, zxp, g).data
    inv = float((np.trace(kxx_inv) + np.trace(kpp_inv) - 2.0 * np.trace(kxp)) / b)

    report = LossReport(0.0, inv, var_x, var_p, cov_x, cov_p, _top(eig_x.eigenvalues))
    report.total = report.recombine(w)
    if not want_grad:
        return report, None

    grad_x = kernel_chain(spec, bw.x, zx, zx, kx, 2.0 * dkx)
    grad_p = kernel_chain(spec, bw.xp, zxp, zxp, kp, 2.0 * dkp)
    if w.alpha:
        eye = np.eye(b) * (w.alpha / b)
        grad_x = grad_x + kernel_chain(spec, g, zx, zx, kxx_inv, 2.0 * eye)
        grad_p = grad_p + kernel_chain(spec, g, zxp, zxp, kpp_inv, 2.0 * eye)
        grad_x = grad_x + kernel_chain(spec, g, zx, zxp, kxp, -2.0 * eye)
        grad_p = grad_p + kernel_chain(spec, g, zxp, zx, kxp.T, -2.0 * eye)
    if not (np.all(np.isfinite(grad_x)) and np.all(np.isfinite(grad_p))):
        raise LossError("non-finite entries in kernel VICReg gradient")
    return report, LossGradients(grad_x, grad_p)


def kernel_vicreg_loss(spec: KernelSpec, zx, zxp, w: LossWeights, variant: str = "sqrt",
                       bandwidths: Bandwidths | None = None) -> LossReport:
    return _kernel_loss(spec, zx, zxp, w, variant, bandwidths, False)[0]


def kernel_vicreg_grad(spec: KernelSpec, zx, zxp, w: LossWeights, variant: str = "sqrt",
                       bandwidths: Bandwidths | None = None) -> LossGradients:
    return _kernel_loss(spec, zx, zxp, w, variant, bandwidths, True)[1]


def kernel_vicreg_loss_and_grad(spec: KernelSpec, zx, zxp, w: LossWeights, variant: str = "sqrt",
                                bandwidths: Bandwidths | None = None):
    """Loss report and gradients from a single pass over the Gram matrices."""
    return _kernel_loss(spec, zx, zxp, w, variant, bandwidths, True)


# -- Euclidean VICReg baseline --------------------------------------------------

def euclidean_invariance(zx, zxp) -> float:
    zx, zxp = _pair(zx, zxp)
    d = zx - zxp
    return float((d * d).sum() / zx.shape[0])


def euclidean_variance(z, w: LossWeights) -> float:
    z = as_batch(z, min_rows=2)
    std = np.sqrt(z.var(axis=0) + w.epsilon)
    hinge = np.maximum(0.0, w.gamma_thresh - std)
    return float((hinge * hinge).mean())


def _covariance_matrix(z):
    zc = z - z.mean(axis=0)
    return zc, zc.T @ zc / (z.shape[0] - 1)


def euclidean_covariance(z) -> float:
    z = as_batch(z, min_rows=2)
    _, c = _covariance_matrix(z)
    off = c - np.diag(np.diag(c))
    return float((off * off).sum() / z.shape[1])


def _euclidean_view_grad(z, w):
    b, p = z.shape
    zc, c = _covariance_matrix(z)
    std = np.sqrt(z.var(axis=0) + w.epsilon)
    gap = w.gamma_thresh - std
    dvar = np.where(gap > 0, -gap / (p * std), 0.0)  # dL_var / dVar_j
    grad = w.beta * zc * (2.0 / b) * dvar
    off = c - np.diag(np.diag(c))
    grad = grad + w.zeta * (4.0 / (p * (b - 1))) * zc @ off
    return grad


def _spectrum_of(z):
    khat = center_array(gram(KernelSpec("linear"), z).data)
    return symmetric_eig(khat).eigenvalues


def euclidean_vicreg_loss(zx, zxp, w: LossWeights) -> LossReport:
    zx, zxp = _pair(zx, zxp)
    report = LossReport(
        0.0,
        euclidean_invariance(zx, zxp),
        euclidean_variance(zx, w),
        euclidean_variance(zxp, w),
        euclidean_covariance(zx),
        euclidean_covariance(zxp),
        _top(_spectrum_of(zx)),
    )
    report.total = report.recombine(w)
    return report


def euclidean_vicreg_grad(zx, zxp, w: LossWeights) -> LossGradients:
    zx, zxp = _pair(zx, zxp)
    if zx.shape[0] < 2:
        raise KernelError("VICReg needs at least 2 rows per view")
    b = zx.shape[0]
    d = (2.0 * w.alpha / b) * (zx - zxp)
    return LossGradients(d + _euclidean_view_grad(zx, w), -d + _euclidean_view_grad(zxp, w))


def euclidean_vicreg_loss_and_grad(zx, zxp, w: LossWeights):
    return euclidean_vicreg_loss(zx, zxp, w), euclidean_vicreg_grad(zx, zxp, w)
