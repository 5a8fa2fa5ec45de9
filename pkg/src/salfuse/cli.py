"""Command-line surface: detect, batch and eval subcommands.

Configuration is a JSON document with one key per PipelineConfig field;
unknown keys are rejected so a typoed hyperparameter cannot silently
fall back to a default. The fully-resolved config is echoed next to the
outputs of every detection run.
"""

import argparse
import dataclasses
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .errors import ConfigError, ContractError, FormatError
from .image_io import load_image, render_map, write_gray_png
from .evaluation import run_benchmark
from .pipeline import PipelineConfig, detect_stages
from .superpixel import write_labels_png

log = logging.getLogger(__name__)

CONFIG_ENV_VAR = "SALIENCY_CONFIG"
_IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg")

EXIT_OK = 0
EXIT_IO = 1
EXIT_CONFIG = 2


def load_config(path=None):
    """Resolve the pipeline config from a JSON file, env var, or defaults."""
    if path is None:
        path = os.environ.get(CONFIG_ENV_VAR)
    if path is None:
        return PipelineConfig().validate()
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"config {path} must be a JSON object")
    known = PipelineConfig.field_names()
    unknown = sorted(set(doc) - set(known))
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")
    return PipelineConfig(**doc).validate()


def write_config_echo(cfg, path):
    """Write the fully-resolved config; feeding it back reproduces the run."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        json.dump(dataclasses.asdict(cfg), fh, indent=2, sort_keys=True)
        fh.write("\n")


def _dump_intermediates(result, dump_dir):
    dump_dir = Path(dump_dir)
    dump_dir.mkdir(parents=True, exist_ok=True)
    seg = result.segmentation
    write_gray_png(result.surroundedness.pixel, dump_dir / "sb.png")
    write_gray_png(render_map(result.surroundedness.per_superpixel, seg),
                   dump_dir / "sp.png")
    write_gray_png(render_map(result.foreground, seg), dump_dir / "fg.png")
    write_gray_png(render_map(result.background, seg), dump_dir / "bg.png")
    write_gray_png(render_map(result.combined, seg), dump_dir / "com.png")
    write_gray_png(result.final_map, dump_dir / "final.png")
    write_labels_png(seg, dump_dir / "labels.png")


def cmd_detect(args):
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        img = load_image(args.image)
    except (OSError, FormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    result = detect_stages(img, cfg)
    out = Path(args.out)
    try:
        if out.parent != Path(""):
            out.parent.mkdir(parents=True, exist_ok=True)
        write_gray_png(result.final_map, out)
        if args.dump_intermediate:
            _dump_intermediates(result, args.dump_intermediate)
        write_config_echo(cfg, out.with_suffix(".config.json"))
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def _batch_one(task):
    """Worker: detect one image and write its map. Returns (name, error)."""
    in_path, out_path, cfg_fields = task
    try:
        cfg = PipelineConfig(**cfg_fields)
        img = load_image(in_path)
        write_gray_png(detect_stages(img, cfg).final_map, out_path)
        return in_path, None
    except Exception as exc:  # per-image failures must not kill the batch
        return in_path, f"{type(exc).__name__}: {exc}"


def cmd_batch(args):
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    image_dir = Path(args.image_dir)
    images = sorted(p for p in image_dir.iterdir()
                    if p.suffix.lower() in _IMAGE_SUFFIXES)
    if not images:
        print(f"error: no images found in {image_dir}", file=sys.stderr)
        return EXIT_IO
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    cfg_fields = dataclasses.asdict(cfg)
    tasks = [(str(p), str(out_dir / (p.stem + ".png")), cfg_fields)
             for p in images]
    jobs = max(1, args.jobs)
    if jobs == 1:
        results = [_batch_one(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_batch_one, tasks))

    successes = 0
    for name, error in results:
        if error is None:
            successes += 1
        else:
            print(f"warning: {name} failed: {error}", file=sys.stderr)
    write_config_echo(cfg, out_dir / "resolved_config.json")
    print(f"processed {successes}/{len(tasks)} images -> {out_dir}")
    return EXIT_OK if successes > 0 else EXIT_IO


def cmd_eval(args):
    try:
        report = run_benchmark(args.pred_dir, args.gt_dir, out_dir=args.out)
    except ContractError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    for warning in report.warnings:
        print(f"warning: {warning}", file=sys.stderr)
    agg = report.aggregate
    print(f"images {len(report.per_image)}  "
          f"MAE {agg['mae']:.6f}  AUC {agg['auc']:.6f}  "
          f"precision {agg['precision']:.6f}  recall {agg['recall']:.6f}  "
          f"F {agg['f_measure']:.6f}")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="salfuse",
        description="Salient object detection via foreground/background "
                    "seeds, manifold ranking and geodesic refinement.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("detect", help="detect on a single image")
    p.add_argument("image", help="input PNG/JPEG")
    p.add_argument("--out", required=True, help="output saliency PNG")
    p.add_argument("--config", default=None,
                   help=f"JSON config (default: ${CONFIG_ENV_VAR} or builtin)")
    p.add_argument("--dump-intermediate", default=None, metavar="DIR",
                   help="write per-stage maps into DIR")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("batch", help="detect on every image in a directory")
    p.add_argument("image_dir", help="directory of PNG/JPEG inputs")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--config", default=None,
                   help=f"JSON config (default: ${CONFIG_ENV_VAR} or builtin)")
    p.add_argument("--jobs", type=int, default=1,
                   help="number of worker processes")
    p.set_defaults(func=cmd_batch)

    p = sub.add_parser("eval", help="score predictions against ground truth")
    p.add_argument("pred_dir", help="directory of predicted map PNGs")
    p.add_argument("gt_dir", help="directory of ground-truth mask PNGs")
    p.add_argument("--out", required=True,
                   help="directory for per_image/pr_curve/summary CSVs")
    p.set_defaults(func=cmd_eval)
    return parser


def main(argv=None):
    logging.basicConfig(level=logging.WARNING, format="%(message)s")
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
