import numpy as np
import pytest
from scipy import ndimage

from conftest import make_textured_image
from salfuse.errors import ContractError
from salfuse.image_io import rgb_to_lab
from salfuse.superpixel import (border_superpixels, segmentation_from_labels,
                                slic_segment, write_labels_png)

S4 = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=bool)


def uniform_lab(h, w, value=50.0):
    lab = np.zeros((h, w, 3))
    lab[:, :, 0] = value
    return lab


def assert_valid_segmentation(seg):
    h, w = seg.labels.shape
    assert seg.count >= 2
    assert seg.labels.min() == 0 and seg.labels.max() == seg.count - 1
    assert seg.pixel_count.sum() == h * w
    # adjacency symmetric and irreflexive
    for i, nbrs in enumerate(seg.adjacency):
        assert i not in nbrs
        assert list(nbrs) == sorted(nbrs)
        for j in nbrs:
            assert i in seg.adjacency[j]
    # per-superpixel 4-connectivity
    for i in range(seg.count):
        _, ncomp = ndimage.label(seg.labels == i, structure=S4)
        assert ncomp == 1, f"superpixel {i} is disconnected"


def test_uniform_image_9_superpixels_grid():
    seg = slic_segment(uniform_lab(60, 60), target_k=9, compactness=10.0,
                       iterations=10)
    assert seg.count == 9
    assert_valid_segmentation(seg)
    assert np.all(seg.pixel_count >= 200)
    assert np.all(seg.pixel_count <= 600)
    # centroids approximate the 3x3 grid cell centers
    expected = {(x, y) for x in (10, 30, 50) for y in (10, 30, 50)}
    for cx, cy in seg.centroid:
        assert min((cx - ex) ** 2 + (cy - ey) ** 2
                   for ex, ey in expected) < 36.0


def test_half_black_half_white_vertical_split():
    img = np.zeros((60, 60, 3), dtype=np.uint8)
    img[:, 30:] = 255
    lab = rgb_to_lab(img)
    seg = slic_segment(lab, target_k=2, compactness=10.0, iterations=10)
    assert seg.count == 2
    assert_valid_segmentation(seg)
    l_values = sorted(seg.mean_lab[:, 0])
    assert l_values[1] - l_values[0] > 90.0
    # oracle: per-half means computed independently of the segmentation
    left_mean = lab[:, :30].reshape(-1, 3).mean(axis=0)
    right_mean = lab[:, 30:].reshape(-1, 3).mean(axis=0)
    got = seg.mean_lab[np.argsort(seg.mean_lab[:, 0])]
    assert np.allclose(got[0], left_mean, atol=1e-9)
    assert np.allclose(got[1], right_mean, atol=1e-9)


def test_target_k_out_of_range():
    lab = uniform_lab(10, 10)
    with pytest.raises(ContractError):
        slic_segment(lab, target_k=1)
    with pytest.raises(ContractError):
        slic_segment(lab, target_k=101)
    with pytest.raises(ContractError):
        slic_segment(lab, target_k=4, iterations=0)


def test_determinism():
    img = make_textured_image(80, 100, seed=3)
    lab = rgb_to_lab(img)
    a = slic_segment(lab, target_k=40)
    b = slic_segment(lab, target_k=40)
    assert np.array_equal(a.labels, b.labels)
    assert np.array_equal(a.mean_lab, b.mean_lab)


def test_count_near_target_on_natural_image():
    img = make_textured_image(240, 320, seed=9)
    seg = slic_segment(rgb_to_lab(img), target_k=200)
    assert_valid_segmentation(seg)
    assert abs(seg.count - 200) <= 0.3 * 200


def test_textured_image_valid(textured_image):
    seg = slic_segment(rgb_to_lab(textured_image), target_k=60)
    assert_valid_segmentation(seg)


# ------------------------------------------------------ border membership

def test_border_ring_included_interior_excluded():
    labels = np.ones((8, 8), dtype=np.int32)
    labels[0, :] = labels[-1, :] = labels[:, 0] = labels[:, -1] = 0
    seg = segmentation_from_labels(labels, np.zeros((8, 8, 3)))
    ids = border_superpixels(seg)
    assert 0 in ids
    assert 1 not in ids
    assert seg.is_border.tolist() == [True, False]


def test_border_of_3x3_grid_is_all_but_center():
    seg = slic_segment(uniform_lab(60, 60), target_k=9)
    assert seg.count == 9
    ids = border_superpixels(seg)
    assert len(ids) == 8
    # oracle: scan of edge rows/columns
    edge = set(np.concatenate([seg.labels[0, :], seg.labels[-1, :],
                               seg.labels[:, 0], seg.labels[:, -1]]).tolist())
    assert ids == edge
    (center,) = set(range(9)) - ids
    cx, cy = seg.centroid[center]
    assert abs(cx - 30) < 8 and abs(cy - 30) < 8


def test_segmentation_from_labels_validates():
    with pytest.raises(ContractError):
        segmentation_from_labels(np.array([[0, 2]], dtype=np.int32),
                                 np.zeros((1, 2, 3)))
    with pytest.raises(ContractError):
        segmentation_from_labels(np.zeros((2, 2), dtype=np.int32),
                                 np.zeros((3, 3, 3)))


def test_write_labels_png(tmp_path):
    seg = slic_segment(uniform_lab(30, 30), target_k=4)
    p = tmp_path / "labels.png"
    write_labels_png(seg, p)
    from PIL import Image
    with Image.open(p) as im:
        arr = np.asarray(im)
    assert np.array_equal(arr, seg.labels.astype(np.uint16))
