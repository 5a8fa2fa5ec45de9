"""Bottom-up salient object detection.

Pipeline: SLIC superpixels -> Boolean-map surroundedness (foreground
seeds) in parallel with border-color distinctiveness (background seeds)
-> manifold ranking per branch -> fused re-ranking -> geodesic-distance
refinement. Includes a benchmark harness (PR curve, F-measure, MAE, AUC)
and a CLI.
"""

from .errors import (ConfigError, ContractError, EmptySeedError, FormatError,
                     SalfuseError, SolverError, UndefinedAucError)
from .image_io import (bilinear_resize, load_image, load_mask,
                       minmax_normalize, quantize_u8, read_gray_png,
                       render_map, rgb_to_lab, write_gray_png)
from .superpixel import (Segmentation, border_superpixels,
                         segmentation_from_labels, slic_segment)
from .surroundedness import (SurroundednessMap, bms_pixel_map,
                             pool_to_superpixels)
from .ranking_graph import (AffinityGraph, GeodesicField, SeedSet,
                            build_graph, geodesic_distances, make_seed_set,
                            rank)
from .pipeline import (DetectionResult, PipelineConfig, SaliencyVector,
                       background_seeds, combine_maps, detect_full,
                       detect_stages, foreground_seeds, geodesic_refine,
                       saliency_from_seeds)
from .evaluation import (EvalReport, ImageMetrics, auc, binarize_adaptive,
                         mae, pr_at_thresholds, pr_f_measure, run_benchmark,
                         write_report_csvs)

__version__ = "0.1.0"

__all__ = [
    "AffinityGraph", "ConfigError", "ContractError", "DetectionResult",
    "EmptySeedError", "EvalReport", "FormatError", "GeodesicField",
    "ImageMetrics", "PipelineConfig", "SalfuseError", "SaliencyVector",
    "Segmentation", "SeedSet", "SolverError", "SurroundednessMap",
    "UndefinedAucError", "auc", "background_seeds", "bilinear_resize",
    "binarize_adaptive", "bms_pixel_map", "border_superpixels",
    "build_graph", "combine_maps", "detect_full", "detect_stages",
    "foreground_seeds", "geodesic_distances", "geodesic_refine",
    "load_image", "load_mask", "mae", "make_seed_set", "minmax_normalize",
    "pool_to_superpixels", "pr_at_thresholds", "pr_f_measure", "quantize_u8",
    "rank", "read_gray_png", "render_map", "rgb_to_lab", "run_benchmark",
    "saliency_from_seeds", "segmentation_from_labels", "slic_segment",
    "write_gray_png", "write_report_csvs",
]
