import struct

import numpy as np
import pytest

from kvicreg import _backend

ACCEPTANCE: list[tuple[str, bool, str]] = []


def record(name, passed, detail=""):
    ACCEPTANCE.append((name, bool(passed), detail))
    return passed


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed, detail in ACCEPTANCE:
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {name}  {detail}")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(params=sorted(_backend.implementations()))
def impl(request):
    return _backend.implementations()[request.param]


def idx_bytes(images: np.ndarray, labels) -> tuple[bytes, bytes]:
    """Test-only IDX writer: uint8 images (n, rows, cols) and labels."""
    images = np.asarray(images, dtype=np.uint8)
    n, rows, cols = images.shape
    img = struct.pack(">IIII", 0x00000803, n, rows, cols) + images.tobytes()
    lab = struct.pack(">II", 0x00000801, len(labels)) + bytes(int(v) for v in labels)
    return img, lab


@pytest.fixture
def write_idx(tmp_path):
    def _write(images, labels, name="set"):
        img, lab = idx_bytes(images, labels)
        ip, lp = tmp_path / f"{name}-images.idx", tmp_path / f"{name}-labels.idx"
        ip.write_bytes(img)
        lp.write_bytes(lab)
        return ip, lp

    return _write
