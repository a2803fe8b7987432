import numpy as np
import pytest

from raster2d.compiler import Pattern
from raster2d.render import pgm_bytes, read_pgm, render_pattern, to_gray


def test_single_spot_shape():
    img = render_pattern(Pattern(np.ones((1, 1))), pixel=0.5e-6)
    assert img.max() == pytest.approx(1.0, abs=1e-6)
    y, x = np.unravel_index(np.argmax(img), img.shape)
    row = img[y] / img[y].max()
    col = img[:, x] / img[:, x].max()
    # 1/e^2 diameters recover the spot widths
    assert (row >= np.exp(-2)).sum() * 0.5e-6 == pytest.approx(2 * 15e-6, abs=1e-6)
    assert (col >= np.exp(-2)).sum() * 0.5e-6 == pytest.approx(2 * 11.3e-6, abs=1e-6)


def test_layout_and_weights():
    w = np.zeros((3, 2))
    w[2, 1] = 0.5
    img = render_pattern(Pattern(w))
    y, x = np.unravel_index(np.argmax(img), img.shape)
    assert img.max() == pytest.approx(0.5, rel=1e-3)
    margin = 3 * 15e-6
    assert x * 1e-6 == pytest.approx(margin + 60e-6, abs=1e-6)
    assert y * 1e-6 == pytest.approx(margin + 30e-6, abs=1e-6)


def test_pgm_round_trip():
    gray = to_gray(render_pattern(Pattern(np.eye(3))))
    data = pgm_bytes(gray, ["hello"])
    back, comments = read_pgm(data)
    assert np.array_equal(back, gray)
    assert comments == ["hello"]
    assert data.startswith(b"P5\n")


def test_gray_scaling():
    assert to_gray(np.array([[0.0, 0.5, 1.0]])).tolist() == [[0, 128, 255]]
    assert to_gray(np.array([[0.0, 2.0]])).tolist() == [[0, 255]]
