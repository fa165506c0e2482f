import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from kvicreg.kernels import (
    KINDS,
    KernelError,
    KernelSpec,
    center_array,
    cross_gram,
    double_center,
    gram,
    kernel_eval,
    resolve_bandwidth,
)
from kvicreg.linalg import symmetric_eig

ALL_SPECS = [KernelSpec(k) for k in KINDS]


def test_kernel_eval_linear():
    assert kernel_eval(KernelSpec("linear"), (1, 2), (3, 4), 1.0) == 11


def test_kernel_eval_rbf_same_point():
    assert kernel_eval(KernelSpec("rbf"), (0.3, -2.0), (0.3, -2.0), 0.5) == 1.0


def test_kernel_eval_laplacian():
    # ||u - v||_1 = 2
    assert kernel_eval(KernelSpec("laplacian"), (0, 0), (1, 1), 1.0) == pytest.approx(math.exp(-2.0), abs=1e-15)
    assert kernel_eval(KernelSpec("laplacian"), (0, 0), (1, 1), 1.0) == pytest.approx(0.135335, abs=1e-6)


def test_kernel_eval_polynomial_and_rq():
    assert kernel_eval(KernelSpec("polynomial", degree=3, coef0=2.0), (1, 1), (1, 2), 1.0) == 125.0
    # d^2 = 4, gamma = 0.5, alpha = 2: (1 + 0.5*4/4)^-2 = 1/2.25
    rq = KernelSpec("rational_quadratic", rq_alpha=2.0)
    assert kernel_eval(rq, (0, 0), (2, 0), 0.5) == pytest.approx(1 / 2.25, rel=1e-15)


@pytest.mark.parametrize("bad", [0.0, -1.0, math.nan])
def test_kernel_eval_rejects_bad_gamma(bad):
    with pytest.raises(KernelError):
        kernel_eval(KernelSpec("rbf"), (0,), (1,), bad)


def test_kernel_eval_rejects_non_finite():
    with pytest.raises(KernelError):
        kernel_eval(KernelSpec("linear"), (math.inf, 0), (1, 1), 1.0)


def test_kernelspec_validation():
    with pytest.raises(KernelError):
        KernelSpec("polynomial", degree=0)
    with pytest.raises(KernelError):
        KernelSpec("rbf", bandwidth=-1.0)
    with pytest.raises(KernelError):
        KernelSpec("rational_quadratic", rq_alpha=0.0)
    with pytest.raises(KernelError):
        KernelSpec("sigmoid")
    assert KernelSpec("rq").kind == "rational_quadratic"


def test_resolve_bandwidth_fixed_passthrough(rng):
    assert resolve_bandwidth(KernelSpec("rbf", bandwidth=0.7), rng.normal(size=(5, 3))) == 0.7


def test_resolve_bandwidth_zero_median_fallback():
    z = np.array([[1.0, 2.0], [1.0, 2.0]])
    for kind in ("rbf", "laplacian", "rational_quadratic"):
        assert resolve_bandwidth(KernelSpec(kind), z) == 1.0


def test_resolve_bandwidth_median_brute_force(rng):
    z = rng.normal(size=(4, 3))
    sq = []
    l1 = []
    for i in range(4):
        for j in range(i + 1, 4):
            sq.append(sum((z[i, k] - z[j, k]) ** 2 for k in range(3)))
            l1.append(sum(abs(z[i, k] - z[j, k]) for k in range(3)))
    assert len(sq) == 6
    sq.sort()
    l1.sort()
    assert resolve_bandwidth(KernelSpec("rbf"), z) == pytest.approx(1 / (2 * (sq[2] + sq[3]) / 2), rel=1e-14)
    assert resolve_bandwidth(KernelSpec("laplacian"), z) == pytest.approx(1 / ((l1[2] + l1[3]) / 2), rel=1e-14)


def test_resolve_bandwidth_scale_free_kernels(rng):
    z = rng.normal(size=(5, 2))
    assert resolve_bandwidth(KernelSpec("linear"), z) == 1.0
    assert resolve_bandwidth(KernelSpec("polynomial"), z) == 1.0


def test_resolve_bandwidth_needs_two_rows():
    with pytest.raises(KernelError):
        resolve_bandwidth(KernelSpec("rbf", bandwidth=1.0), np.zeros((1, 3)))


@pytest.mark.parametrize("c", [0.1, 3.0, 17.0])
def test_resolve_bandwidth_scale_covariant(rng, c):
    z = rng.normal(size=(9, 4))
    g = resolve_bandwidth(KernelSpec("rbf"), z)
    assert resolve_bandwidth(KernelSpec("rbf"), c * z) == pytest.approx(g / c**2, rel=1e-12)


def test_gram_linear_orthonormal_rows():
    g = gram(KernelSpec("linear"), np.eye(2))
    np.testing.assert_array_equal(g.data, np.eye(2))
    assert not g.centered


def test_gram_rbf_unit_diagonal(rng):
    g = gram(KernelSpec("rbf"), rng.normal(size=(7, 3)))
    np.testing.assert_array_equal(np.diag(g.data), np.ones(7))


def test_gram_polynomial_by_hand():
    g = gram(KernelSpec("polynomial", degree=2, coef0=1.0), np.eye(2))
    np.testing.assert_array_equal(g.data, [[4.0, 1.0], [1.0, 4.0]])


@pytest.mark.parametrize("spec", ALL_SPECS, ids=KINDS)
def test_gram_matches_scalar_kernel_eval(rng, spec):
    z = rng.normal(size=(6, 3))
    g = gram(spec, z)
    for i in range(6):
        for j in range(6):
            assert g.data[i, j] == pytest.approx(kernel_eval(spec, z[i], z[j], g.gamma), rel=1e-12, abs=1e-14)


@pytest.mark.parametrize("spec", ALL_SPECS, ids=KINDS)
def test_gram_exactly_symmetric(rng, spec):
    g = gram(spec, rng.normal(size=(11, 5)))
    assert np.array_equal(g.data, g.data.T)


def test_cross_gram_cases(rng):
    z = rng.normal(size=(5, 3))
    spec = KernelSpec("rbf")
    g = gram(spec, z)
    np.testing.assert_allclose(cross_gram(spec, z, z, g.gamma).data, g.data, rtol=1e-15, atol=0)
    np.testing.assert_array_equal(cross_gram(KernelSpec("linear"), [[1.0, 0.0]], [[0.0, 1.0]]).data, [[0.0]])
    c = cross_gram(KernelSpec("rbf", bandwidth=1.0), [[0.0]], [[1.0]])
    assert c.data[0, 0] == pytest.approx(math.exp(-1.0), rel=1e-15)


def test_cross_gram_shared_bandwidth(rng):
    a, b = rng.normal(size=(4, 2)), 3 * rng.normal(size=(4, 2))
    spec = KernelSpec("rbf")
    assert cross_gram(spec, a, b).gamma == resolve_bandwidth(spec, np.vstack([a, b]))


def test_cross_gram_shape_mismatch(rng):
    with pytest.raises(KernelError):
        cross_gram(KernelSpec("linear"), rng.normal(size=(3, 2)), rng.normal(size=(4, 2)))


def test_double_center_cases(rng):
    ones = double_center(gram(KernelSpec("linear"), np.ones((3, 1))))
    np.testing.assert_array_equal(ones.data, np.zeros((3, 3)))
    two = double_center(gram(KernelSpec("linear"), np.sqrt(2.0) * np.eye(2)))
    np.testing.assert_allclose(two.data, [[1.0, -1.0], [-1.0, 1.0]], atol=1e-15)
    assert two.centered
    with pytest.raises(KernelError):
        double_center(two)


@pytest.mark.parametrize("spec", ALL_SPECS, ids=KINDS)
def test_double_center_equals_hkh(rng, spec):
    g = gram(spec, rng.normal(size=(8, 3)))
    h = np.eye(8) - np.ones((8, 8)) / 8
    c = double_center(g).data
    np.testing.assert_allclose(c, h @ g.data @ h, atol=1e-12 * np.abs(g.data).max())
    assert np.array_equal(c, c.T)
    assert np.abs(c.sum(axis=1)).max() <= 1e-12 * 8 * np.abs(c).max()


@pytest.mark.parametrize("spec", ALL_SPECS, ids=KINDS)
def test_centering_idempotent(rng, spec):
    c = double_center(gram(spec, rng.normal(size=(10, 4)))).data
    again = center_array(c)  # bypasses the state flag
    assert np.abs(again - c).max() <= 1e-12 * np.abs(c).max()


def test_linear_centered_gram_factorization(rng):
    z = rng.normal(size=(9, 4)) + 5.0
    zt = z - z.mean(axis=0)
    c = double_center(gram(KernelSpec("linear"), z)).data
    np.testing.assert_allclose(c, zt @ zt.T, rtol=0, atol=1e-10 * np.abs(zt @ zt.T).max())


finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)


@settings(max_examples=60, deadline=None)
@given(z=arrays(np.float64, st.tuples(st.integers(2, 12), st.integers(1, 5)), elements=finite),
       kind=st.sampled_from(KINDS))
def test_centered_gram_is_numerically_psd(z, kind):
    c = double_center(gram(KernelSpec(kind), z)).data
    lam = symmetric_eig(c).eigenvalues
    assert lam[-1] >= -1e-8 * max(lam[0], 0.0) - 1e-12
