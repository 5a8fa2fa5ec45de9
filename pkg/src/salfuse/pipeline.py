"""End-to-end detector: seed estimation, ranking maps, fusion, refinement.

Two parallel branches score every superpixel: the foreground branch seeds
on surroundedness, the background branch seeds on border color
distinctiveness and takes the complement of its ranking. The two maps are
fused by a second ranking over their above-mean elements and the result
is smoothed with geodesic-distance weights.
"""

import logging
import math
from dataclasses import dataclass, field, fields

import numpy as np

from .errors import ConfigError, ContractError, EmptySeedError
from .image_io import bilinear_resize, minmax_normalize, render_map, rgb_to_lab
from .ranking_graph import build_graph, geodesic_distances, make_seed_set, rank
from .superpixel import Segmentation, slic_segment
from .surroundedness import SurroundednessMap, bms_pixel_map, pool_to_superpixels

log = logging.getLogger(__name__)

# Diagonal of the 400x300 reference scale for the opening radius.
_REFERENCE_DIAGONAL = 500.0

_STAGES = ("foreground", "background", "combined", "final")


@dataclass
class SaliencyVector:
    """Per-superpixel saliency in [0, 1] for one pipeline stage."""

    values: np.ndarray
    stage: str

    def __post_init__(self):
        if self.stage not in _STAGES:
            raise ContractError(f"unknown stage {self.stage!r}")


@dataclass
class PipelineConfig:
    """All detector tunables with their defaults.

    The affinity weight uses the unsquared color distance as the exponent
    by default; "norm_sq" switches to the squared form. The background
    seed polarity "as_written" selects border elements far from the mean
    border color as strong seeds; "inverted" selects the typical ones.
    """

    target_k: int = 200
    compactness: float = 10.0
    iterations: int = 10
    threshold_step: float = 8.0
    opening_radius: int = 3
    working_resolution: int = 400
    sigma_sq: float = 0.1
    alpha: float = 0.99
    affinity_exponent: str = "norm"
    background_seed_polarity: str = "as_written"
    sigma_c_source: str = "edge_dc"

    def validate(self):
        checks = [
            (self.target_k >= 2, "target_k must be >= 2"),
            (self.compactness > 0, "compactness must be > 0"),
            (self.iterations >= 1, "iterations must be >= 1"),
            (self.threshold_step > 0, "threshold_step must be > 0"),
            (self.opening_radius >= 0, "opening_radius must be >= 0"),
            (self.working_resolution >= 1, "working_resolution must be >= 1"),
            (self.sigma_sq > 0, "sigma_sq must be > 0"),
            (0.0 < self.alpha < 1.0, "alpha must be in (0, 1)"),
            (self.affinity_exponent in ("norm", "norm_sq"),
             f"affinity_exponent must be 'norm' or 'norm_sq', "
             f"got {self.affinity_exponent!r}"),
            (self.background_seed_polarity in ("as_written", "inverted"),
             f"background_seed_polarity must be 'as_written' or 'inverted', "
             f"got {self.background_seed_polarity!r}"),
            (self.sigma_c_source in ("edge_dc", "geodesic_all_pairs"),
             f"sigma_c_source must be 'edge_dc' or 'geodesic_all_pairs', "
             f"got {self.sigma_c_source!r}"),
        ]
        for ok, message in checks:
            if not ok:
                raise ConfigError(message)
        return self

    @classmethod
    def field_names(cls):
        return [f.name for f in fields(cls)]


@dataclass
class DetectionResult:
    """Final pixel map plus every intermediate stage for inspection."""

    final_map: np.ndarray
    segmentation: Segmentation
    surroundedness: SurroundednessMap
    foreground: SaliencyVector
    background: SaliencyVector
    combined: SaliencyVector
    refined: SaliencyVector
    degenerate: bool = field(default=False)


def foreground_seeds(sp):
    """Seeds from surroundedness: strong above twice the mean, weak above it.

    Raises EmptySeedError when the surroundedness signal is identically
    zero (nothing is enclosed anywhere).
    """
    s = np.asarray(sp.per_superpixel, dtype=np.float64)
    if s.size < 2:
        raise ContractError("need at least 2 superpixels")
    if not (s > 0).any():
        raise EmptySeedError("surroundedness is identically zero")
    m = s.mean()
    strong = s >= 2.0 * m
    weak = (s >= m) & ~strong
    return make_seed_set(s.size, np.flatnonzero(strong), np.flatnonzero(weak))


def background_seeds(seg, polarity="as_written"):
    """Seeds among border superpixels by distance to the mean border color.

    "as_written" keeps the printed rule (strong = far from the mean
    border color); "inverted" takes strong = closer than the mean
    distance. With identical border colors "as_written" raises
    EmptySeedError and "inverted" selects every border element as strong.
    """
    if polarity not in ("as_written", "inverted"):
        raise ContractError(f"unknown polarity {polarity!r}")
    border = np.flatnonzero(seg.is_border)
    if border.size < 2:
        raise ContractError("need at least 2 border superpixels")
    colors = seg.mean_lab[border]
    cbar = colors.mean(axis=0)
    d = np.sqrt(((colors - cbar) ** 2).sum(axis=1))
    dbar = d.mean()
    if dbar == 0.0:
        if polarity == "as_written":
            raise EmptySeedError("all border superpixels share one color")
        return make_seed_set(seg.count, border, ())
    if polarity == "as_written":
        strong = d >= 2.0 * dbar
    else:
        strong = d < dbar
    weak = (d >= dbar) & (d < 2.0 * dbar)
    return make_seed_set(seg.count, border[strong], border[weak])


def saliency_from_seeds(g, seeds, complement=False):
    """Rank relevance to the seeds, min-max normalize, optionally take 1-x.

    complement=False gives a foreground map (high = relevant to seeds);
    complement=True gives a background map per S = 1 - g*.
    """
    vals = minmax_normalize(rank(g, seeds))
    if complement:
        vals = 1.0 - vals
    return SaliencyVector(values=vals,
                          stage="background" if complement else "foreground")


def combine_maps(fg, bg, g):
    """Fuse the branch maps by re-ranking their above-mean elements.

    All selected elements act as strong seeds. If both maps are constant
    the above-mean sets are empty; the fallback reuses the strong-seed
    rule (>= twice the mean) and, failing that too, returns a flat 0.5
    map with a warning.
    """
    fv = np.asarray(fg.values, dtype=np.float64)
    bv = np.asarray(bg.values, dtype=np.float64)
    if fv.shape != bv.shape or fv.shape != (g.n,):
        raise ContractError("map lengths do not match the graph")
    selected = (fv > fv.mean()) | (bv > bv.mean())
    if not selected.any():
        selected = (fv >= 2.0 * fv.mean()) | (bv >= 2.0 * bv.mean())
    if not selected.any():
        log.warning("combination seeds empty; emitting flat 0.5 map")
        return SaliencyVector(values=np.full(g.n, 0.5), stage="combined")
    seeds = make_seed_set(g.n, np.flatnonzero(selected), ())
    ranked = saliency_from_seeds(g, seeds, complement=False)
    return SaliencyVector(values=ranked.values, stage="combined")


def geodesic_refine(s_com, geo):
    """Smooth saliency with geodesic weights exp(-d_g^2 / (2 sigma_c^2)).

    Weights are row-normalized so each refined value is a convex
    combination; the output is min-max normalized. sigma_c = 0 degrades
    to the identity weighting.
    """
    v = np.asarray(s_com.values, dtype=np.float64)
    n = v.shape[0]
    if geo.dist.shape != (n, n):
        raise ContractError(
            f"distance matrix {geo.dist.shape} does not match {n} values")
    if geo.sigma_c > 0.0:
        delta = np.exp(-(geo.dist ** 2) / (2.0 * geo.sigma_c ** 2))
        delta /= delta.sum(axis=1, keepdims=True)
        v = delta @ v
    return SaliencyVector(values=minmax_normalize(v), stage="final")


def detect_stages(img, cfg=None):
    """Run the full detector and keep every intermediate stage.

    Seed-estimation failures are non-fatal: an empty foreground branch
    substitutes the background map and vice versa; if both branches fail
    the result is a degenerate all-zero map.
    """
    cfg = (cfg or PipelineConfig()).validate()
    lab = rgb_to_lab(img)
    seg = slic_segment(lab, cfg.target_k, cfg.compactness, cfg.iterations)
    sb = _surroundedness_pixels(lab, cfg)
    sp = pool_to_superpixels(sb, seg)
    graph = build_graph(seg, cfg.sigma_sq, cfg.alpha,
                        affinity_exponent=cfg.affinity_exponent)

    fg = bg = None
    try:
        fg = saliency_from_seeds(graph, foreground_seeds(sp), complement=False)
    except EmptySeedError as exc:
        log.info("foreground branch degenerate: %s", exc)
    try:
        bg = saliency_from_seeds(
            graph, background_seeds(seg, cfg.background_seed_polarity),
            complement=True)
    except EmptySeedError as exc:
        log.info("background branch degenerate: %s", exc)

    if fg is None and bg is None:
        zeros = np.zeros(seg.count)
        return DetectionResult(
            final_map=np.zeros(lab.shape[:2]),
            segmentation=seg,
            surroundedness=sp,
            foreground=SaliencyVector(zeros.copy(), "foreground"),
            background=SaliencyVector(zeros.copy(), "background"),
            combined=SaliencyVector(zeros.copy(), "combined"),
            refined=SaliencyVector(zeros.copy(), "final"),
            degenerate=True)
    if fg is None:
        fg = SaliencyVector(values=bg.values.copy(), stage="foreground")
    if bg is None:
        bg = SaliencyVector(values=fg.values.copy(), stage="background")

    com = combine_maps(fg, bg, graph)
    geo = geodesic_distances(graph, sigma_c_source=cfg.sigma_c_source)
    fin = geodesic_refine(com, geo)
    return DetectionResult(final_map=render_map(fin, seg), segmentation=seg,
                           surroundedness=sp, foreground=fg, background=bg,
                           combined=com, refined=fin)


def detect_full(img, cfg=None):
    """Detect the salient object in an RGB image; returns an (H, W) map."""
    return detect_stages(img, cfg).final_map


def _surroundedness_pixels(lab, cfg):
    """Pixel surroundedness at the working resolution, upsampled to native.

    The longest side is reduced to the working resolution (never
    enlarged) and the opening radius is scaled with the working image's
    diagonal relative to the 400x300 reference.
    """
    h, w = lab.shape[:2]
    longest = max(h, w)
    if longest > cfg.working_resolution:
        scale = cfg.working_resolution / longest
        wh = max(1, round(h * scale))
        ww = max(1, round(w * scale))
        small = bilinear_resize(lab, wh, ww)
    else:
        wh, ww = h, w
        small = lab
    if cfg.opening_radius > 0:
        radius = max(1, round(cfg.opening_radius
                              * math.hypot(wh, ww) / _REFERENCE_DIAGONAL))
    else:
        radius = 0
    sb = bms_pixel_map(small, cfg.threshold_step, radius)
    if (wh, ww) != (h, w):
        sb = np.clip(bilinear_resize(sb, h, w), 0.0, 1.0)
    return sb
