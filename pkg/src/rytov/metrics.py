"""Reconstruction quality metrics: PSNR, support IoU, centroid error."""

from dataclasses import dataclass

import numpy as np

from .errors import DataMismatchError

PSNR_CAP_DB = 99.0
_MSE_FLOOR = 1e-12


@dataclass(frozen=True)
class MetricsReport:
    psnr_db: float
    centroid_error_cells: float
    support_iou: float


def psnr(pred, truth):
    """10*log10(peak^2 / MSE) with peak = max(truth), capped at 99 dB for
    (near-)exact reconstructions."""
    pred = np.asarray(pred, dtype=float)
    truth = np.asarray(truth, dtype=float)
    if pred.shape != truth.shape:
        raise DataMismatchError(
            f"shape mismatch: prediction {pred.shape} vs truth {truth.shape}")
    mse = float(np.mean((pred - truth) ** 2))
    if mse < _MSE_FLOOR:
        return PSNR_CAP_DB
    peak = float(np.max(truth))
    return min(10.0 * np.log10(peak * peak / mse), PSNR_CAP_DB)


def half_max_support(img, background=0.0):
    """Cells at or above halfway between the background level and the peak."""
    img = np.asarray(img, dtype=float)
    peak = float(np.max(img))
    if peak <= background:
        return np.zeros(img.shape, dtype=bool)
    return img >= background + 0.5 * (peak - background)


def weighted_centroid(img, mask, background=0.0):
    """(col, row) centroid of (img - background) over the masked cells, in
    cell units; None when the mask is empty."""
    if not mask.any():
        return None
    w = np.maximum(np.asarray(img, dtype=float) - background, 0.0) * mask
    total = w.sum()
    if total == 0.0:
        return None
    jj, ii = np.mgrid[0: img.shape[0], 0: img.shape[1]]
    return (float((w * ii).sum() / total), float((w * jj).sum() / total))


def centroid_error_cells(pred, truth, pred_background=0.0, truth_background=1.0):
    """Distance in cells between the half-max-support centroids of a
    prediction and the ground truth."""
    c_pred = weighted_centroid(pred, half_max_support(pred, pred_background),
                               pred_background)
    c_true = weighted_centroid(truth, half_max_support(truth, truth_background),
                               truth_background)
    if c_pred is None or c_true is None:
        return float("inf")
    return float(np.hypot(c_pred[0] - c_true[0], c_pred[1] - c_true[1]))


def support_iou(mask_a, mask_b):
    union = np.logical_or(mask_a, mask_b).sum()
    if union == 0:
        return 1.0
    return float(np.logical_and(mask_a, mask_b).sum() / union)


def evaluate_pair(pred_eps, truth_eps):
    """Full metric set for a predicted permittivity image against the
    rasterized ground truth (background exactly 1)."""
    truth_mask = np.asarray(truth_eps) != 1.0
    pred_mask = half_max_support(pred_eps, background=1.0)
    return MetricsReport(
        psnr_db=psnr(pred_eps, truth_eps),
        centroid_error_cells=centroid_error_cells(pred_eps, truth_eps,
                                                  pred_background=1.0),
        support_iou=support_iou(pred_mask, truth_mask),
    )
