"""SLIC superpixel segmentation and per-superpixel statistics.

Superpixels are the atomic elements of the detector: every later stage
operates on their mean LAB colors, adjacency and border membership.
"""

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .errors import ContractError

_CONN4 = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=bool)


@dataclass
class Segmentation:
    """Superpixel decomposition of one image.

    labels      -- (H, W) int32, every pixel in [0, count)
    mean_lab    -- (count, 3) mean CIELAB color per superpixel
    centroid    -- (count, 2) mean (x, y) position per superpixel
    pixel_count -- (count,) member pixels per superpixel
    is_border   -- (count,) True if the superpixel touches the image edge
    adjacency   -- per-superpixel sorted neighbor ids (4-connected, lifted)
    """

    labels: np.ndarray
    count: int
    mean_lab: np.ndarray
    centroid: np.ndarray
    pixel_count: np.ndarray
    is_border: np.ndarray
    adjacency: list = field(repr=False)

    @property
    def height(self):
        return self.labels.shape[0]

    @property
    def width(self):
        return self.labels.shape[1]


def segmentation_from_labels(labels, lab):
    """Build a Segmentation (stats, adjacency, border flags) from a label map.

    ``labels`` must use every id in [0, max+1) at least once.
    """
    labels = np.ascontiguousarray(labels, dtype=np.int32)
    if labels.ndim != 2:
        raise ContractError(f"labels must be 2-D, got shape {labels.shape}")
    if lab.shape[:2] != labels.shape:
        raise ContractError(
            f"label map {labels.shape} does not match image {lab.shape[:2]}")
    n = int(labels.max()) + 1
    flat = labels.ravel()
    counts = np.bincount(flat, minlength=n)
    if (counts == 0).any():
        raise ContractError("label ids must be contiguous from 0")

    mean_lab = np.empty((n, 3))
    for c in range(3):
        mean_lab[:, c] = np.bincount(flat, weights=lab[:, :, c].ravel(),
                                     minlength=n) / counts
    h, w = labels.shape
    xs, ys = np.meshgrid(np.arange(w), np.arange(h))
    centroid = np.stack([
        np.bincount(flat, weights=xs.ravel(), minlength=n) / counts,
        np.bincount(flat, weights=ys.ravel(), minlength=n) / counts,
    ], axis=1)

    is_border = np.zeros(n, dtype=bool)
    is_border[_border_ids(labels)] = True

    adjacency = [set() for _ in range(n)]
    for a, b in _label_pairs(labels):
        adjacency[a].add(b)
        adjacency[b].add(a)
    adjacency = [sorted(s) for s in adjacency]

    return Segmentation(labels=labels, count=n, mean_lab=mean_lab,
                        centroid=centroid, pixel_count=counts,
                        is_border=is_border, adjacency=adjacency)


def _border_ids(labels):
    edge = np.concatenate([labels[0, :], labels[-1, :],
                           labels[:, 0], labels[:, -1]])
    return np.unique(edge)


def _label_pairs(labels):
    """Unique (lo, hi) pairs of distinct labels meeting across a 4-edge."""
    pairs = []
    for a, b in ((labels[:, :-1], labels[:, 1:]),
                 (labels[:-1, :], labels[1:, :])):
        diff = a != b
        if diff.any():
            lo = np.minimum(a[diff], b[diff])
            hi = np.maximum(a[diff], b[diff])
            pairs.append(np.stack([lo, hi], axis=1))
    if not pairs:
        return np.empty((0, 2), dtype=np.int64)
    return np.unique(np.concatenate(pairs, axis=0), axis=0)


def border_superpixels(seg):
    """Ids of superpixels whose pixels touch row 0/H-1 or column 0/W-1."""
    return set(int(i) for i in _border_ids(seg.labels))


def slic_segment(lab, target_k=200, compactness=10.0, iterations=10):
    """Segment a LAB image into roughly ``target_k`` connected superpixels.

    Cluster centers start on a grid with spacing s = sqrt(W*H/target_k),
    each perturbed to the lowest-gradient spot in its 3x3 neighborhood.
    Pixels are assigned within 2s x 2s windows under the distance
    d = sqrt(d_lab^2 + (compactness/s)^2 * d_xy^2), centers updated to the
    member means, and finally orphaned fragments are merged into the
    largest adjacent superpixel so every label is 4-connected. The final
    count may differ from ``target_k``.
    """
    lab = np.ascontiguousarray(lab, dtype=np.float64)
    h, w = lab.shape[:2]
    if not 2 <= target_k <= h * w:
        raise ContractError(f"target_k={target_k} out of range [2, {h * w}]")
    if iterations < 1:
        raise ContractError("iterations must be >= 1")
    if compactness <= 0:
        raise ContractError("compactness must be > 0")

    spacing = math.sqrt(w * h / target_k)
    centers = _init_centers(lab, target_k, spacing)
    k0 = centers.shape[0]

    # Contiguous per-channel planes keep the window math cheap.
    chan_l = np.ascontiguousarray(lab[:, :, 0])
    chan_a = np.ascontiguousarray(lab[:, :, 1])
    chan_b = np.ascontiguousarray(lab[:, :, 2])
    col = np.arange(w, dtype=np.float64)
    row = np.arange(h, dtype=np.float64)
    ratio2 = (compactness / spacing) ** 2
    reach = max(int(math.ceil(spacing)), 1)
    labels = np.zeros((h, w), dtype=np.int32)

    for _ in range(iterations):
        # Distances are compared squared; the minimizer matches
        # d = sqrt(d_lab^2 + (compactness/s)^2 d_xy^2) exactly.
        dist = np.full((h, w), np.inf)
        labels = np.full((h, w), -1, dtype=np.int32)
        for k in range(k0):
            cl, ca, cb, cx, cy = centers[k]
            x0 = max(int(cx) - reach, 0)
            x1 = min(int(cx) + reach + 1, w)
            y0 = max(int(cy) - reach, 0)
            y1 = min(int(cy) + reach + 1, h)
            if x0 >= x1 or y0 >= y1:
                continue
            d2 = (chan_l[y0:y1, x0:x1] - cl) ** 2
            d2 += (chan_a[y0:y1, x0:x1] - ca) ** 2
            d2 += (chan_b[y0:y1, x0:x1] - cb) ** 2
            d2 += (ratio2 * (col[x0:x1] - cx) ** 2)[None, :]
            d2 += (ratio2 * (row[y0:y1] - cy) ** 2)[:, None]
            win_dist = dist[y0:y1, x0:x1]
            win_lab = labels[y0:y1, x0:x1]
            better = d2 < win_dist
            win_dist[better] = d2[better]
            win_lab[better] = k
        _assign_leftovers(lab, labels, centers, ratio2, col, row)
        centers = _update_centers(lab, labels, centers, col, row)

    labels = _compact_labels(labels)
    labels = _merge_orphans(labels)
    labels = _ensure_min_count(labels)
    return segmentation_from_labels(labels, lab)


def _init_centers(lab, target_k, spacing):
    """Grid-initialized [L, a, b, x, y] centers, gradient-perturbed."""
    h, w = lab.shape[:2]
    nx = min(w, max(1, math.ceil(w / spacing)))
    ny = min(h, max(1, math.ceil(target_k / nx)))
    gx = np.floor((np.arange(nx) + 0.5) * w / nx).astype(int)
    gy = np.floor((np.arange(ny) + 0.5) * h / ny).astype(int)

    grad = _gradient_magnitude(lab)
    centers = np.empty((nx * ny, 5))
    i = 0
    for y in gy:
        for x in gx:
            px, py = _lowest_gradient_pos(grad, x, y)
            centers[i] = (lab[py, px, 0], lab[py, px, 1], lab[py, px, 2],
                          float(px), float(py))
            i += 1
    return centers


def _gradient_magnitude(lab):
    """Squared gradient magnitude summed over channels, edges clamped."""
    h, w = lab.shape[:2]
    xp = np.minimum(np.arange(w) + 1, w - 1)
    xm = np.maximum(np.arange(w) - 1, 0)
    yp = np.minimum(np.arange(h) + 1, h - 1)
    ym = np.maximum(np.arange(h) - 1, 0)
    dx = lab[:, xp, :] - lab[:, xm, :]
    dy = lab[yp, :, :] - lab[ym, :, :]
    return (dx ** 2).sum(axis=2) + (dy ** 2).sum(axis=2)


def _lowest_gradient_pos(grad, x, y):
    """Lowest-gradient pixel in the 3x3 neighborhood, row-major ties first."""
    h, w = grad.shape
    y0, y1 = max(y - 1, 0), min(y + 2, h)
    x0, x1 = max(x - 1, 0), min(x + 2, w)
    patch = grad[y0:y1, x0:x1]
    idx = int(np.argmin(patch))
    return x0 + idx % patch.shape[1], y0 + idx // patch.shape[1]


def _assign_leftovers(lab, labels, centers, ratio2, col, row):
    """Assign pixels no window reached to their globally nearest center."""
    un = labels < 0
    if not un.any():
        return
    yy, xx = np.nonzero(un)
    pl = lab[yy, xx]
    best_d = np.full(pl.shape[0], np.inf)
    best_k = np.zeros(pl.shape[0], dtype=np.int32)
    for k in range(centers.shape[0]):
        cl, ca, cb, cx, cy = centers[k]
        d2 = ((pl[:, 0] - cl) ** 2 + (pl[:, 1] - ca) ** 2
              + (pl[:, 2] - cb) ** 2
              + ratio2 * ((xx - cx) ** 2 + (yy - cy) ** 2))
        better = d2 < best_d
        best_d[better] = d2[better]
        best_k[better] = k
    labels[yy, xx] = best_k


def _update_centers(lab, labels, centers, col, row):
    k0 = centers.shape[0]
    h, w = labels.shape
    flat = labels.ravel()
    counts = np.bincount(flat, minlength=k0).astype(np.float64)
    new = centers.copy()
    xs = np.broadcast_to(col[None, :], (h, w))
    ys = np.broadcast_to(row[:, None], (h, w))
    feats = (lab[:, :, 0], lab[:, :, 1], lab[:, :, 2], xs, ys)
    nonzero = counts > 0
    for i, f in enumerate(feats):
        sums = np.bincount(flat, weights=f.ravel(), minlength=k0)
        new[nonzero, i] = sums[nonzero] / counts[nonzero]
    return new


def _compact_labels(labels):
    """Relabel so that used ids are exactly 0..N-1 (ascending original order)."""
    used = np.unique(labels)
    if used.size == labels.max() + 1 and used[0] == 0:
        return labels
    remap = np.zeros(labels.max() + 1, dtype=np.int32)
    remap[used] = np.arange(used.size, dtype=np.int32)
    return remap[labels]


def _merge_orphans(labels):
    """Merge disconnected label fragments into adjacent superpixels.

    For each label the largest 4-connected component keeps the id; every
    other fragment is merged into the adjacent superpixel with the largest
    current pixel count (ties to the lowest id). Fragments are only merged
    into regions already connected to their label's main component, so the
    result is 4-connected per label.
    """
    h, w = labels.shape
    n = int(labels.max()) + 1
    rooted = np.zeros((h, w), dtype=bool)
    orphans = []

    objects = ndimage.find_objects(labels + 1)
    for lab_id in range(n):
        sl = objects[lab_id]
        if sl is None:
            continue
        mask = labels[sl] == lab_id
        comp, ncomp = ndimage.label(mask, structure=_CONN4)
        if ncomp == 1:
            rooted[sl] |= mask
            continue
        yy, xx = np.nonzero(mask)
        cids = comp[yy, xx]
        flat_all = (yy + sl[0].start) * w + (xx + sl[1].start)
        order = np.argsort(cids, kind="stable")
        flat_all = flat_all[order]
        cids = cids[order]
        bounds = np.searchsorted(cids, np.arange(1, ncomp + 2))
        sizes = np.diff(bounds)
        main = int(np.argmax(sizes))
        for ci, flat in enumerate(np.split(flat_all, bounds[1:-1])):
            if ci == main:
                rooted.ravel()[flat] = True
            else:
                flat.sort()
                orphans.append((int(flat[0]), flat.tolist()))

    if not orphans:
        return labels

    # Flat Python lists: orphan fragments are numerous but tiny, and
    # per-pixel scalar access dominates this phase.
    lv = labels.ravel().tolist()
    rv = rooted.ravel().tolist()
    counts = np.bincount(labels.ravel(), minlength=n).tolist()
    pending = deque(f for _, f in sorted(orphans))
    while pending:
        progressed = False
        for _ in range(len(pending)):
            flat = pending.popleft()
            target = _merge_target(lv, rv, counts, flat, h, w)
            if target is None:
                pending.append(flat)
                continue
            counts[lv[flat[0]]] -= len(flat)
            counts[target] += len(flat)
            for i in flat:
                lv[i] = target
                rv[i] = True
            progressed = True
        if not progressed:
            raise AssertionError("orphan merge failed to make progress")
    return np.asarray(lv, dtype=np.int32).reshape(h, w)


def _merge_target(lv, rv, counts, flat, h, w):
    """Largest rooted adjacent superpixel of a fragment, ties to lowest id."""
    best = None
    best_count = -1
    size = h * w
    for i in flat:
        x = i % w
        for j in (i - w, i + w, i - 1 if x > 0 else -1,
                  i + 1 if x < w - 1 else -1):
            if 0 <= j < size and rv[j]:
                lbl = lv[j]
                c = counts[lbl]
                if c > best_count or (c == best_count and lbl < best):
                    best = lbl
                    best_count = c
    return best


def _ensure_min_count(labels):
    """Guarantee at least two superpixels (defensive split, rare)."""
    if labels.max() >= 1:
        return labels
    h, w = labels.shape
    labels = labels.copy()
    if w >= 2:
        labels[:, w // 2:] = 1
    else:
        labels[h // 2:, :] = 1
    return labels


def write_labels_png(seg, path):
    """Debug dump: superpixel ids as a 16-bit grayscale PNG."""
    from PIL import Image

    if seg.count > 65535:
        raise ContractError("too many superpixels for a 16-bit dump")
    Image.fromarray(seg.labels.astype(np.uint16)).save(path, format="PNG")
