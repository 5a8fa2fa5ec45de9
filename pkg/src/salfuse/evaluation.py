"""Benchmark harness: PR curve, adaptive F-measure, MAE, ROC-AUC, CSVs.

Maps are treated as 8-bit: threshold sweeps quantize with the same
round-half-up rule the PNG writer uses, so metrics computed in memory
match metrics computed from written files.
"""

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ContractError, UndefinedAucError
from .image_io import load_mask, quantize_u8, read_gray_png

F_BETA_SQ = 0.3
_NUM_THRESHOLDS = 256


@dataclass
class ImageMetrics:
    name: str
    mae: float
    auc: float  # NaN when undefined (single-class ground truth)
    precision: float
    recall: float
    f_measure: float


@dataclass
class EvalReport:
    per_image: list
    aggregate: dict
    pr_curve: np.ndarray  # (256, 3) rows of (threshold, precision, recall)
    warnings: list


def binarize_adaptive(gray):
    """Threshold at twice the mean saliency, clamped to 1.0 (strict >)."""
    gray = np.asarray(gray, dtype=np.float64)
    thr = min(2.0 * gray.mean(), 1.0)
    return gray > thr


def pr_f_measure(pred, gt):
    """Precision, recall and F-measure (beta^2 = 0.3) of a binary mask."""
    pred = np.asarray(pred, dtype=bool)
    gt = np.asarray(gt, dtype=bool)
    if pred.shape != gt.shape:
        raise ContractError(f"shape mismatch {pred.shape} vs {gt.shape}")
    tp = float(np.count_nonzero(pred & gt))
    fp = float(np.count_nonzero(pred & ~gt))
    fn = float(np.count_nonzero(~pred & gt))
    precision = tp / (tp + fp) if tp + fp > 0 else 0.0
    recall = tp / (tp + fn) if tp + fn > 0 else 0.0
    if precision + recall > 0:
        f = ((1.0 + F_BETA_SQ) * precision * recall
             / (F_BETA_SQ * precision + recall))
    else:
        f = 0.0
    return precision, recall, f


def mae(gray, gt):
    """Mean absolute error between a [0, 1] map and a binary ground truth."""
    gray = np.asarray(gray, dtype=np.float64)
    gt = np.asarray(gt, dtype=bool)
    if gray.shape != gt.shape:
        raise ContractError(f"shape mismatch {gray.shape} vs {gt.shape}")
    return float(np.abs(gray - gt).mean())


def auc(gray, gt):
    """ROC-AUC of the 8-bit-quantized map as a pixel classifier.

    Sweeps the 256 quantized thresholds (positive = value >= t), anchors
    the curve at (0, 0) and integrates with the trapezoid rule. Raises
    UndefinedAucError when the ground truth has one class only.
    """
    gray = np.asarray(gray, dtype=np.float64)
    gt = np.asarray(gt, dtype=bool)
    if gray.shape != gt.shape:
        raise ContractError(f"shape mismatch {gray.shape} vs {gt.shape}")
    q = quantize_u8(gray)
    npos = int(gt.sum())
    nneg = gt.size - npos
    if npos == 0 or nneg == 0:
        raise UndefinedAucError("ground truth contains a single class")
    hp = np.bincount(q[gt], minlength=_NUM_THRESHOLDS)
    hn = np.bincount(q[~gt], minlength=_NUM_THRESHOLDS)
    tpr = np.concatenate([[0.0], np.cumsum(hp[::-1]) / npos])
    fpr = np.concatenate([[0.0], np.cumsum(hn[::-1]) / nneg])
    return float(np.trapz(tpr, fpr))


def pr_at_thresholds(gray, gt):
    """Per-image precision and recall at every quantized threshold 0..255.

    The mask at threshold t is (quantized value >= t); empty masks and
    empty ground truths use the 0-precision / 0-recall conventions.
    """
    gray = np.asarray(gray, dtype=np.float64)
    gt = np.asarray(gt, dtype=bool)
    if gray.shape != gt.shape:
        raise ContractError(f"shape mismatch {gray.shape} vs {gt.shape}")
    q = quantize_u8(gray)
    hp = np.bincount(q[gt], minlength=_NUM_THRESHOLDS)
    hall = np.bincount(q.ravel(), minlength=_NUM_THRESHOLDS)
    tp = np.cumsum(hp[::-1])[::-1].astype(np.float64)
    npred = np.cumsum(hall[::-1])[::-1].astype(np.float64)
    precision = np.divide(tp, npred, out=np.zeros_like(tp), where=npred > 0)
    npos = float(gt.sum())
    recall = tp / npos if npos > 0 else np.zeros_like(tp)
    return precision, recall


def run_benchmark(pred_dir, gt_dir, out_dir=None):
    """Evaluate stem-matched PNG pairs; optionally write the three CSVs.

    Images whose ground truth has a single class are excluded from the
    AUC aggregate (their AUC is recorded as NaN) with a warning.
    """
    pred_dir = Path(pred_dir)
    gt_dir = Path(gt_dir)
    preds = {p.stem: p for p in pred_dir.glob("*.png")}
    gts = {p.stem: p for p in gt_dir.glob("*.png")}
    names = sorted(set(preds) & set(gts))
    if not names:
        raise ContractError(
            f"no name-matched PNG pairs between {pred_dir} and {gt_dir}")

    warnings = []
    for stem in sorted(set(preds) - set(gts)):
        warnings.append(f"prediction without ground truth: {stem}")
    for stem in sorted(set(gts) - set(preds)):
        warnings.append(f"ground truth without prediction: {stem}")

    per_image = []
    pr_prec = np.zeros(_NUM_THRESHOLDS)
    pr_rec = np.zeros(_NUM_THRESHOLDS)
    for name in names:
        gray = read_gray_png(preds[name])
        gt = load_mask(gts[name])
        if gray.shape != gt.shape:
            raise ContractError(
                f"{name}: map {gray.shape} does not match gt {gt.shape}")
        try:
            auc_v = auc(gray, gt)
        except UndefinedAucError:
            warnings.append(f"AUC undefined (single-class gt): {name}")
            auc_v = math.nan
        p, r, f = pr_f_measure(binarize_adaptive(gray), gt)
        per_image.append(ImageMetrics(name=name, mae=mae(gray, gt), auc=auc_v,
                                      precision=p, recall=r, f_measure=f))
        prec_t, rec_t = pr_at_thresholds(gray, gt)
        pr_prec += prec_t
        pr_rec += rec_t

    n = len(names)
    aucs = [m.auc for m in per_image if not math.isnan(m.auc)]
    aggregate = {
        "mae": sum(m.mae for m in per_image) / n,
        "auc": sum(aucs) / len(aucs) if aucs else math.nan,
        "precision": sum(m.precision for m in per_image) / n,
        "recall": sum(m.recall for m in per_image) / n,
        "f_measure": sum(m.f_measure for m in per_image) / n,
    }
    pr_curve = np.stack([np.arange(_NUM_THRESHOLDS, dtype=np.float64),
                         pr_prec / n, pr_rec / n], axis=1)
    report = EvalReport(per_image=per_image, aggregate=aggregate,
                        pr_curve=pr_curve, warnings=warnings)
    if out_dir is not None:
        write_report_csvs(report, out_dir)
    return report


def write_report_csvs(report, out_dir):
    """Write per_image.csv, pr_curve.csv and summary.csv (6 decimals, LF)."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    with open(out_dir / "per_image.csv", "w", encoding="utf-8",
              newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["name", "mae", "auc", "precision", "recall",
                         "f_measure"])
        for m in report.per_image:
            writer.writerow([m.name] + [f"{v:.6f}" for v in
                                        (m.mae, m.auc, m.precision, m.recall,
                                         m.f_measure)])

    with open(out_dir / "pr_curve.csv", "w", encoding="utf-8",
              newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["threshold", "precision", "recall"])
        for t, p, r in report.pr_curve:
            writer.writerow([int(t), f"{p:.6f}", f"{r:.6f}"])

    with open(out_dir / "summary.csv", "w", encoding="utf-8",
              newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        keys = ["mae", "auc", "precision", "recall", "f_measure"]
        writer.writerow(keys)
        writer.writerow([f"{report.aggregate[k]:.6f}" for k in keys])
