"""Pick the compiled core when it is importable, else the numpy fallback.

Set ``KVICREG_PURE_PYTHON=1`` to force the fallback (used by the test
suite and the benchmark to exercise both paths).
"""

import logging
import os

logger = logging.getLogger(__name__)

from . import _pykernels

if os.environ.get("KVICREG_PURE_PYTHON", "") not in ("", "0"):
    _impl = _pykernels
    NAME = "python"
else:
    try:
        from . import _ckernels as _impl

        NAME = "cython"
    except ImportError:  # extension not built
        logger.debug("compiled core unavailable, using numpy fallback")
        _impl = _pykernels
        NAME = "python"


def worker_threads():
    try:
        return max(1, int(os.environ.get("KVICREG_THREADS", "1")))
    except ValueError:
        return 1


def pairwise(a, b, kind, gamma, degree, coef0, rq_alpha, symmetric, impl=None):
    impl = impl or _impl
    if impl is _pykernels:
        return _pykernels.pairwise(a, b, kind, gamma, degree, coef0, rq_alpha,
                                   symmetric, threads=worker_threads())
    return impl.pairwise(a, b, kind, gamma, degree, coef0, rq_alpha, symmetric)


def jacobi_eig(a, tol, max_sweeps, impl=None):
    return (impl or _impl).jacobi_eig(a, tol, max_sweeps)


def implementations():
    """All importable implementations, keyed by name."""
    out = {"python": _pykernels}
    try:
        from . import _ckernels

        out["cython"] = _ckernels
    except ImportError:
        pass
    return out
