"""Boolean-map surroundedness: pixel map and superpixel pooling.

A pixel is "surrounded" when it belongs to a thresholded region that is
fully enclosed by its complement. Sweeping thresholds over each LAB
channel and removing border-connected components measures that degree.
"""

from dataclasses import dataclass

import cv2
import numpy as np

from .errors import ContractError
from .image_io import minmax_normalize


@dataclass
class SurroundednessMap:
    """Pixel-level map plus its per-superpixel means.

    pixel          -- (H, W) float64 in [0, 1]
    per_superpixel -- (N,) float64 in [0, 1]
    """

    pixel: np.ndarray
    per_superpixel: np.ndarray


def disk(radius):
    """Boolean disk structuring element: dy^2 + dx^2 <= radius^2."""
    r = int(radius)
    yy, xx = np.mgrid[-r:r + 1, -r:r + 1]
    return yy * yy + xx * xx <= r * r


def bms_pixel_map(lab, threshold_step=8.0, opening_radius=3):
    """Surroundedness map from Boolean threshold maps of the LAB channels.

    Each channel is rescaled to [0, 255]; for every threshold in
    {0, step, 2*step, ...} <= 255 the Boolean map (channel > threshold)
    and its complement are formed, 8-connected components touching the
    image border are removed, and the survivors are opened with a disk.
    The result is the mean of all attention maps, min-max normalized.
    """
    lab = np.asarray(lab, dtype=np.float64)
    if threshold_step <= 0:
        raise ContractError("threshold_step must be > 0")
    h, w = lab.shape[:2]
    kernel = disk(opening_radius).astype(np.uint8) if opening_radius > 0 else None
    thresholds = np.arange(0.0, 256.0, float(threshold_step))

    acc = np.zeros((h, w), dtype=np.float64)
    n_maps = 0
    for c in range(3):
        chan = lab[:, :, c]
        lo, hi = chan.min(), chan.max()
        if hi > lo:
            scaled = (chan - lo) * (255.0 / (hi - lo))
        else:
            scaled = np.zeros_like(chan)
        for theta in thresholds:
            bmap = (scaled > theta).astype(np.uint8)
            for att in (_inner_components(bmap), _inner_components(1 - bmap)):
                if kernel is not None and att.any():
                    att = _binary_open(att, kernel)
                acc += att
                n_maps += 1
    return minmax_normalize(acc / n_maps)


def _inner_components(mask):
    """Zero out every 8-connected component that touches the image border."""
    if not mask.any():
        return mask
    n, lbl = cv2.connectedComponents(mask, connectivity=8)
    edge = np.concatenate([lbl[0, :], lbl[-1, :], lbl[:, 0], lbl[:, -1]])
    keep = np.ones(n, dtype=np.uint8)
    keep[np.unique(edge)] = 0
    keep[0] = 0
    return keep[lbl]


def _binary_open(mask, kernel):
    """Morphological opening of a {0, 1} uint8 map, outside treated as 0."""
    eroded = cv2.erode(mask, kernel, borderType=cv2.BORDER_CONSTANT,
                       borderValue=0)
    return cv2.dilate(eroded, kernel, borderType=cv2.BORDER_CONSTANT,
                      borderValue=0)


def pool_to_superpixels(pixel_map, seg):
    """Average the pixel map over each superpixel's member pixels."""
    pixel_map = np.asarray(pixel_map, dtype=np.float64)
    if pixel_map.shape != seg.labels.shape:
        raise ContractError(
            f"map shape {pixel_map.shape} != labels shape {seg.labels.shape}")
    sums = np.bincount(seg.labels.ravel(), weights=pixel_map.ravel(),
                       minlength=seg.count)
    return SurroundednessMap(pixel=pixel_map,
                             per_superpixel=sums / seg.pixel_count)
