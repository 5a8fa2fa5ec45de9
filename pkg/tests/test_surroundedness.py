import numpy as np
import pytest

from conftest import make_square_image, make_textured_image
from salfuse.errors import ContractError
from salfuse.image_io import rgb_to_lab
from salfuse.superpixel import segmentation_from_labels
from salfuse.surroundedness import bms_pixel_map, disk, pool_to_superpixels


def test_disk_is_symmetric():
    d = disk(3)
    assert d.shape == (7, 7)
    assert np.array_equal(d, d[::-1, :])
    assert np.array_equal(d, d[:, ::-1])
    assert d[3, 3]


def test_uniform_image_has_zero_surroundedness():
    lab = rgb_to_lab(np.full((40, 40, 3), 90, dtype=np.uint8))
    sb = bms_pixel_map(lab)
    assert np.array_equal(sb, np.zeros((40, 40)))


def test_centered_square_is_fully_surrounded():
    # black 50x50 with centered white 10x10: the white component never
    # touches the border, so it survives every Boolean map it appears in.
    img = make_square_image(50, 50, 10)
    sb = bms_pixel_map(rgb_to_lab(img), threshold_step=8.0, opening_radius=3)
    inside = sb[20:30, 20:30]
    # opening erodes at most the rim; the 4x4 core must be saturated
    assert np.all(sb[23:27, 23:27] == 1.0)
    assert np.all(inside[inside > 0] == 1.0)
    outside = sb.copy()
    outside[20:30, 20:30] = 0.0
    assert np.all(outside == 0.0)


def test_square_touching_edge_scores_zero():
    img = make_square_image(50, 50, 10, offset=(20, 0))
    sb = bms_pixel_map(rgb_to_lab(img))
    assert np.array_equal(sb, np.zeros((50, 50)))


def test_mirror_equivariance():
    for seed in (0, 1, 2):
        img = make_textured_image(40, 56, seed=seed, cells=(5, 7))
        lab = rgb_to_lab(img)
        sb = bms_pixel_map(lab)
        sb_mirrored = bms_pixel_map(lab[:, ::-1])
        assert np.array_equal(sb_mirrored, sb[:, ::-1])


def test_affine_channel_scaling_is_invariant():
    # positive affine map of all LAB channels rescales to the same [0, 255]
    lab = rgb_to_lab(make_textured_image(30, 40, seed=4, cells=(4, 5)))
    sb = bms_pixel_map(lab)
    sb_scaled = bms_pixel_map(lab * 1.7 + 3.0)
    assert np.array_equal(sb, sb_scaled)


def test_threshold_step_must_be_positive():
    with pytest.raises(ContractError):
        bms_pixel_map(np.zeros((4, 4, 3)), threshold_step=0.0)


def test_bounds_property(textured_image):
    sb = bms_pixel_map(rgb_to_lab(textured_image))
    assert sb.min() >= 0.0 and sb.max() <= 1.0


# ----------------------------------------------------------------- pooling

def grid_seg(h, w, rows, cols):
    labels = np.zeros((h, w), dtype=np.int32)
    for r in range(rows):
        for c in range(cols):
            labels[r * (h // rows):(r + 1) * (h // rows),
                   c * (w // cols):(c + 1) * (w // cols)] = r * cols + c
    return segmentation_from_labels(labels, np.zeros((h, w, 3)))


def test_pool_constant_map():
    seg = grid_seg(8, 8, 2, 2)
    sp = pool_to_superpixels(np.full((8, 8), 0.7), seg)
    assert np.allclose(sp.per_superpixel, 0.7)


def test_pool_is_arithmetic_mean():
    seg = grid_seg(4, 4, 1, 2)
    gray = np.zeros((4, 4))
    gray[:2, :2] = 1.0  # half the pixels of superpixel 0
    sp = pool_to_superpixels(gray, seg)
    assert sp.per_superpixel.tolist() == [0.5, 0.0]


def test_pool_dimension_mismatch():
    seg = grid_seg(8, 8, 2, 2)
    with pytest.raises(ContractError):
        pool_to_superpixels(np.zeros((4, 4)), seg)


def test_pool_bounded_by_pixel_max(textured_image):
    lab = rgb_to_lab(textured_image)
    sb = bms_pixel_map(lab)
    seg = grid_seg(120, 160, 4, 4)
    sp = pool_to_superpixels(sb, seg)
    assert sp.per_superpixel.min() >= 0.0
    assert sp.per_superpixel.max() <= sb.max() + 1e-12
