"""Pure-numpy versions of the compiled kernels in ``_ckernels.pyx``.

Same call signatures and return conventions, so ``_backend`` can swap
one for the other at import time.
"""

import numpy as np

LINEAR, POLYNOMIAL, RBF, LAPLACIAN, RATIONAL_QUADRATIC = range(5)


def _block(a, b, kind, gamma, degree, coef0, rq_alpha):
    if kind in (LINEAR, POLYNOMIAL):
        # elementwise product + sum keeps every entry's reduction order
        # independent of the block shape (BLAS matmul does not)
        dots = (a[:, None, :] * b[None, :, :]).sum(axis=-1)
        if kind == LINEAR:
            return dots
        return (dots + coef0) ** degree
    diff = a[:, None, :] - b[None, :, :]
    if kind == LAPLACIAN:
        return np.exp(-gamma * np.abs(diff).sum(axis=-1))
    sq = (diff * diff).sum(axis=-1)
    if kind == RBF:
        return np.exp(-gamma * sq)
    return (1.0 + gamma * sq / (2.0 * rq_alpha)) ** (-rq_alpha)


def pairwise(a, b, kind, gamma, degree, coef0, rq_alpha, symmetric, threads=1):
    a = np.ascontiguousarray(a, dtype=np.float64)
    b = np.ascontiguousarray(b, dtype=np.float64)
    args = (kind, gamma, degree, coef0, rq_alpha)
    n = a.shape[0]
    if threads > 1 and n >= 2 * threads:
        from concurrent.futures import ThreadPoolExecutor

        edges = np.linspace(0, n, threads + 1).astype(int)
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = pool.map(lambda lo_hi: _block(a[lo_hi[0]:lo_hi[1]], b, *args),
                             zip(edges[:-1], edges[1:]))
            out = np.concatenate(list(parts), axis=0)
    else:
        out = _block(a, b, *args)
    if symmetric:
        upper = np.triu(out)
        out = upper + np.triu(out, 1).T
    return out


def _round_robin(n):
    """Disjoint (p, q) pairings covering every pair once per sweep."""
    m = n + (n % 2)
    players = list(range(m))
    rounds = []
    for _ in range(m - 1):
        ps, qs = [], []
        for k in range(m // 2):
            p, q = players[k], players[m - 1 - k]
            if p < n and q < n:
                ps.append(min(p, q))
                qs.append(max(p, q))
        rounds.append((np.array(ps, dtype=np.intp), np.array(qs, dtype=np.intp)))
        players = [players[0], players[-1]] + players[1:-1]
    return rounds


def jacobi_eig(a_in, tol, max_sweeps):
    """Parallel-order Jacobi: each round applies n/2 disjoint rotations at once."""
    a = np.array(a_in, dtype=np.float64, copy=True)
    n = a.shape[0]
    v = np.eye(n)
    target = tol * np.sqrt((a * a).sum())
    rounds = _round_robin(n)
    offdiag = ~np.eye(n, dtype=bool)
    for sweep in range(max_sweeps + 1):
        off = np.sqrt((a[offdiag] ** 2).sum())
        if off <= target:
            return np.diag(a).copy(), v, sweep
        if sweep == max_sweeps:
            break
        for ps, qs in rounds:
            if ps.size == 0:
                continue
            apq = a[ps, qs]
            live = apq != 0.0
            if not live.any():
                continue
            ps, qs, apq = ps[live], qs[live], apq[live]
            theta = (a[qs, qs] - a[ps, ps]) / (2.0 * apq)
            t = np.where(theta >= 0.0, 1.0, -1.0) / (np.abs(theta) + np.hypot(theta, 1.0))
            c = 1.0 / np.sqrt(t * t + 1.0)
            s = t * c
            cp, cq = a[:, ps], a[:, qs]
            a[:, ps] = c * cp - s * cq
            a[:, qs] = s * cp + c * cq
            rp, rq = a[ps, :], a[qs, :]
            a[ps, :] = c[:, None] * rp - s[:, None] * rq
            a[qs, :] = s[:, None] * rp + c[:, None] * rq
            a[ps, qs] = 0.0
            a[qs, ps] = 0.0
            vp, vq = v[:, ps], v[:, qs]
            v[:, ps] = c * vp - s * vq
            v[:, qs] = s * vp + c * vq
    return np.diag(a).copy(), v, -1
