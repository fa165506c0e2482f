"""Finite-difference check of the analytic Kernel VICReg gradients."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import TABLE_WEIGHTS
from .kernels import KINDS, KernelSpec, center_array, gram
from .linalg import symmetric_eig
from .loss import LossWeights, kernel_vicreg_grad, kernel_vicreg_loss, loss_bandwidths

STEP = 1e-5
FLOOR = 1e-8
SCALE_FLOOR = 1e-2


def relative_error(analytic, numeric) -> float:
    """max_i |a_i - n_i| / max(|a_i|, |n_i|, 0.01 * max_j |n_j|, 1e-8).

    Entries smaller than 1% of the largest one are judged against that 1%
    level: their finite-difference estimate carries the same absolute
    roundoff as the large entries.
    """
    a = np.asarray(analytic)
    n = np.asarray(numeric)
    if not a.size:
        return 0.0
    floor = max(FLOOR, SCALE_FLOOR * float(np.abs(n).max()))
    denom = np.maximum(np.maximum(np.abs(a), np.abs(n)), floor)
    return float((np.abs(a - n) / denom).max())


def central_difference(f, z, h: float = STEP):
    g = np.zeros_like(z)
    for i in np.ndindex(z.shape):
        orig = z[i]
        z[i] = orig + h
        up = f(z)
        z[i] = orig - h
        down = f(z)
        z[i] = orig
        g[i] = (up - down) / (2.0 * h)
    return g


def near_boundary(spec, zx, zxp, w, bandwidths, h: float = STEP) -> bool:
    """True when a +-h perturbation could cross a kink of the loss.

    Kinks: the variance hinge, eigenvalues entering the clamp at zero,
    the sqrt of a vanishing covariance, and (Laplacian) coordinate ties.
    """
    b = zx.shape[0]
    for z, g in ((zx, bandwidths.x), (zxp, bandwidths.xp)):
        khat = center_array(gram(spec, z, g).data)
        lam = symmetric_eig(khat).eigenvalues
        s = np.sqrt(np.maximum(lam, 0.0) / b + w.epsilon)
        if np.any(np.abs(w.gamma_thresh - s) < 1e-3):
            return True
        top = max(abs(lam[0]), 1e-300)
        live = lam[lam > 1e-8 * top]
        if live.size > 1 and np.min(-np.diff(live)) < 1e-6 * top:
            return True
        off = khat - np.diag(np.diag(khat))
        if (off * off).sum() < 1e-12:
            return True
    if spec.kind == "laplacian":
        for a, c in ((zx, zx), (zxp, zxp), (zx, zxp)):
            gaps = np.abs(a[:, None, :] - c[None, :, :])
            if a is c:
                gaps = gaps[~np.eye(a.shape[0], dtype=bool)]
            if gaps.min() < 100 * h:
                return True
    return False


@dataclass
class KernelCheck:
    kernel: str
    max_rel_error: float
    trials: int
    resampled: int


def check_kernel(kind: str, trials: int, rng, h: float = STEP, max_resample: int = 100) -> KernelCheck:
    spec = KernelSpec(kind, rq_alpha=1.5 if kind == "rational_quadratic" else 1.0)
    alpha, beta, zeta = TABLE_WEIGHTS[spec.kind]
    w = LossWeights(alpha, beta, zeta, gamma_thresh=1.0, epsilon=1e-6)
    worst, resampled, done = 0.0, 0, 0
    while done < trials:
        b = int(rng.integers(3, 9))
        p = int(rng.integers(2, 6))
        zx = rng.normal(size=(b, p))
        zxp = zx + 0.5 * rng.normal(size=(b, p))
        bw = loss_bandwidths(spec, zx, zxp)
        if near_boundary(spec, zx, zxp, w, bw, h):
            resampled += 1
            if resampled > max_resample * trials:
                raise RuntimeError(f"{kind}: could not draw a point away from loss kinks")
            continue
        grads = kernel_vicreg_grad(spec, zx, zxp, w, bandwidths=bw)
        num_x = central_difference(lambda z: kernel_vicreg_loss(spec, z, zxp, w, bandwidths=bw).total, zx.copy(), h)
        num_p = central_difference(lambda z: kernel_vicreg_loss(spec, zx, z, w, bandwidths=bw).total, zxp.copy(), h)
        worst = max(worst, relative_error(grads.grad_x, num_x), relative_error(grads.grad_xp, num_p))
        done += 1
    return KernelCheck(spec.kind, worst, trials, resampled)


def run_gradcheck(kernels=KINDS, trials: int = 10, tolerance: float = 1e-4, seed: int = 0):
    """Return (passed, [KernelCheck, ...]); passed iff every error <= tolerance."""
    rng = np.random.default_rng(seed)
    results = [check_kernel(k, trials, rng) for k in kernels]
    passed = all(r.max_rel_error <= tolerance for r in results)
    return passed, results
