import gzip
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import idx_bytes
from kvicreg.data import (
    AugmentationSpec,
    Dataset,
    IdxFormatError,
    augment_pair,
    load_idx,
    make_blobs,
    make_circles,
    make_two_moons,
    read_dataset_csv,
    write_dataset_csv,
)

NONE = AugmentationSpec(0, 0, 0, 0)


def test_blobs_counts():
    ds = make_blobs(3, 10, 5, seed=1)
    assert ds.samples.shape == (30, 5)
    assert sorted(np.bincount(ds.labels)) == [10, 10, 10]


def test_blobs_spread_limit():
    ds = make_blobs(3, 10, 4, spread=1e-9, seed=2)
    for c in range(3):
        x = ds.samples[ds.labels == c]
        d = np.sqrt(((x[:, None] - x[None]) ** 2).sum(-1))
        assert d.max() < 1e-6


def test_blobs_deterministic_and_validated():
    assert np.array_equal(make_blobs(2, 5, 3, seed=9).samples, make_blobs(2, 5, 3, seed=9).samples)
    with pytest.raises(ValueError):
        make_blobs(0, 5, 3)


def test_moons_on_curve():
    ds = make_two_moons(50)
    outer, inner = ds.samples[ds.labels == 0], ds.samples[ds.labels == 1]
    assert np.abs(np.hypot(*outer.T) - 1).max() < 1e-12
    assert outer[:, 1].min() >= -1e-15
    assert np.abs(np.hypot(1 - inner[:, 0], 0.5 - inner[:, 1]) - 1).max() < 1e-12


def test_circles_on_curve_and_radii():
    clean = make_circles(40, radius_ratio=0.3)
    r = np.hypot(*clean.samples.T)
    assert np.abs(r[clean.labels == 0] - 1).max() < 1e-12
    assert np.abs(r[clean.labels == 1] - 0.3).max() < 1e-12
    noisy = make_circles(2000, noise_sigma=0.02, radius_ratio=0.5, seed=3)
    r = np.hypot(*noisy.samples.T)
    ratio = r[noisy.labels == 1].mean() / r[noisy.labels == 0].mean()
    assert ratio == pytest.approx(0.5, abs=3 * 0.02)


def test_identity_augmentation():
    ds = make_blobs(2, 5, 6, seed=0)
    v = augment_pair(ds, [0, 3, 7], NONE, 11)
    assert np.array_equal(v.view_a, ds.samples[[0, 3, 7]])
    assert np.array_equal(v.view_b, ds.samples[[0, 3, 7]])


def test_noise_moment():
    ds = Dataset(np.zeros((4000, 8)), np.zeros(4000))
    sigma = 0.3
    v = augment_pair(ds, np.arange(4000), AugmentationSpec(sigma, 0, 0, 0), 5)
    msd = float((v.view_a**2).mean())
    assert abs(msd - sigma**2) <= 0.1 * sigma**2


def test_mask_count_binomial():
    n, d, p = 2000, 10, 0.5
    ds = Dataset(np.ones((n, d)), np.zeros(n))
    v = augment_pair(ds, np.arange(n), AugmentationSpec(0, 0, 0, p), 6)
    zeros = int((v.view_a == 0).sum())
    sd = math.sqrt(n * d * p * (1 - p))
    assert abs(zeros - n * d * p) <= 4 * sd


def test_mask_prob_one_rejected():
    with pytest.raises(ValueError):
        AugmentationSpec(mask_prob=1.0)


def test_rotation_preserves_pair_norms():
    ds = make_blobs(2, 20, 6, seed=4)
    v = augment_pair(ds, np.arange(40), AugmentationSpec(0, 30, 0, 0), 1)
    pair_norm = lambda x: np.hypot(x[:, 0::2], x[:, 1::2])
    np.testing.assert_allclose(pair_norm(v.view_a), pair_norm(ds.samples), rtol=1e-13)


def test_augment_errors_and_determinism():
    ds = make_blobs(2, 5, 3, seed=0)
    with pytest.raises(IndexError):
        augment_pair(ds, [10], AugmentationSpec(), 0)
    a = augment_pair(ds, [1, 2, 2], AugmentationSpec(), (0, 1, 5))
    b = augment_pair(ds, [1, 2, 2], AugmentationSpec(), (0, 1, 5))
    assert np.array_equal(a.view_a, b.view_a) and np.array_equal(a.view_b, b.view_b)
    assert not np.array_equal(a.view_a, a.view_b)


FIXTURE = np.array([[[0, 255], [128, 64]], [[255, 0], [0, 0]]], dtype=np.uint8)


def test_idx_fixture(write_idx):
    ip, lp = write_idx(FIXTURE, [3, 7])
    ds = load_idx(ip, lp)
    np.testing.assert_array_equal(ds.samples, [[0, 1, 128 / 255, 64 / 255], [1, 0, 0, 0]])
    np.testing.assert_array_equal(ds.labels, [3, 7])


def test_idx_gzip(tmp_path):
    img, lab = idx_bytes(FIXTURE, [3, 7])
    (tmp_path / "i.gz").write_bytes(gzip.compress(img))
    (tmp_path / "l.gz").write_bytes(gzip.compress(lab))
    assert load_idx(tmp_path / "i.gz", tmp_path / "l.gz").labels.tolist() == [3, 7]


def test_idx_header_only_truncated(tmp_path, write_idx):
    ip, lp = write_idx(FIXTURE, [3, 7])
    ip.write_bytes(ip.read_bytes()[:16])
    with pytest.raises(IdxFormatError, match="truncated at offset 16") as err:
        load_idx(ip, lp)
    assert err.value.offset == 16


def test_idx_malformed_cases(write_idx):
    ip, lp = write_idx(FIXTURE, [3, 7])
    good_i, good_l = ip.read_bytes(), lp.read_bytes()
    cases = [
        (b"\0\0\x08\x01" + good_i[4:], good_l, 0),  # label magic on an image file
        (good_i, b"\0\0\x08\x03" + good_l[4:], 0),
        (good_i[:10], good_l, 10),
        (good_i, good_l[:9], 9),
    ]
    _, lp_one = write_idx(FIXTURE[:1], [3], name="one")
    for img, lab, offset in cases:
        ip.write_bytes(img)
        lp.write_bytes(lab)
        with pytest.raises(IdxFormatError, match="offset") as err:
            load_idx(ip, lp)
        assert err.value.offset == offset
    ip.write_bytes(good_i)
    with pytest.raises(IdxFormatError, match="offset 4"):
        load_idx(ip, lp_one)


@settings(max_examples=25, deadline=None)
@given(n=st.integers(1, 6), rows=st.integers(1, 4), cols=st.integers(1, 4), seed=st.integers(0, 99))
def test_idx_round_trip(tmp_path_factory, n, rows, cols, seed):
    rng = np.random.default_rng(seed)
    pix = rng.integers(0, 256, size=(n, rows, cols), dtype=np.uint8)
    labels = rng.integers(0, 10, size=n)
    d = tmp_path_factory.mktemp("idx")
    img, lab = idx_bytes(pix, labels)
    (d / "i").write_bytes(img)
    (d / "l").write_bytes(lab)
    ds = load_idx(d / "i", d / "l")
    np.testing.assert_array_equal(np.rint(ds.samples * 255).astype(np.uint8), pix.reshape(n, -1))
    np.testing.assert_array_equal(ds.labels, labels)


def test_csv_round_trip(tmp_path, rng):
    ds = Dataset(rng.normal(size=(7, 3)) * 1e5, [0, 1, 2, 0, 1, 2, 0])
    write_dataset_csv(ds, tmp_path / "d.csv")
    back = read_dataset_csv(tmp_path / "d.csv")
    assert np.array_equal(back.samples, ds.samples)
    assert np.array_equal(back.labels, ds.labels)
    (tmp_path / "bad.csv").write_text("x,f0\n0,1\n")
    with pytest.raises(ValueError):
        read_dataset_csv(tmp_path / "bad.csv")
