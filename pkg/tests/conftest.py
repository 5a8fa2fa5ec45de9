import numpy as np
import pytest

from salfuse.image_io import bilinear_resize


def make_square_image(h, w, side, fg=255, bg=0, offset=None):
    """Solid background with a square of the given side, centered by default."""
    img = np.full((h, w, 3), bg, dtype=np.uint8)
    if offset is None:
        y0 = (h - side) // 2
        x0 = (w - side) // 2
    else:
        y0, x0 = offset
    img[y0:y0 + side, x0:x0 + side] = fg
    return img


def make_textured_image(h, w, seed=7, cells=(12, 16), noise=12.0):
    """Deterministic pseudo-natural image: smooth color blobs plus noise."""
    rng = np.random.default_rng(seed)
    base = rng.uniform(0.0, 255.0, (cells[0], cells[1], 3))
    img = bilinear_resize(base, h, w) + rng.normal(0.0, noise, (h, w, 3))
    return np.clip(img, 0, 255).astype(np.uint8)


@pytest.fixture
def textured_image():
    return make_textured_image(120, 160)
