"""Time the compiled core against the numpy fallback.

    python3 benchmarks/bench_backends.py [--sizes 32,64,128] [--repeat 5]
"""

import argparse
import timeit

import numpy as np

from kvicreg import _backend, _pykernels
from kvicreg.kernels import KernelSpec, center_array


def gram_call(impl, z, spec):
    return lambda: _backend.pairwise(z, z, spec.code, 0.5, spec.degree, spec.coef0, spec.rq_alpha, True, impl=impl)


def eig_call(impl, a):
    return lambda: _backend.jacobi_eig(a, 1e-12, 100, impl=impl)


def best_ms(fn, repeat):
    return 1e3 * min(timeit.repeat(fn, number=1, repeat=repeat))


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", default="32,64,128")
    parser.add_argument("--dim", type=int, default=16)
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    impls = _backend.implementations()
    if "cython" not in impls:
        print("compiled core not built; only the fallback is timed")
    rng = np.random.default_rng(0)
    names = sorted(impls)
    print(f"{'op':<16}{'b':>5}" + "".join(f"{n + ' ms':>14}" for n in names) + f"{'speedup':>10}")
    for b in (int(s) for s in args.sizes.split(",")):
        z = rng.normal(size=(b, args.dim))
        for kind in ("rbf", "laplacian"):
            spec = KernelSpec(kind)
            t = {n: best_ms(gram_call(impls[n], z, spec), args.repeat) for n in names}
            ratio = t["python"] / t["cython"] if "cython" in t else float("nan")
            print(f"{'gram ' + kind:<16}{b:>5}" + "".join(f"{t[n]:>14.3f}" for n in names) + f"{ratio:>10.1f}")
        k = center_array(_pykernels.pairwise(z, z, KernelSpec("rbf").code, 0.05, 2, 1.0, 1.0, True))
        t = {n: best_ms(eig_call(impls[n], k), args.repeat) for n in names}
        ratio = t["python"] / t["cython"] if "cython" in t else float("nan")
        print(f"{'jacobi eig':<16}{b:>5}" + "".join(f"{t[n]:>14.3f}" for n in names) + f"{ratio:>10.1f}")


if __name__ == "__main__":
    main()
