"""Saliency evaluation: thresholded precision/recall, F-measure, MAE.

A predicted saliency map is swept over a uniform threshold grid; each
threshold binarizes the map (>= convention) and is scored against the
ground-truth mask. Dataset curves average precision and recall over
images at each threshold, and the reported maximum F-measure is taken
on that mean curve. Precision at zero predicted positives is defined
as 1 so curves stay defined at the top threshold.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (DegenerateGroundTruthError, DimensionError, DomainError,
                     EmptyDatasetError)
from .grid import ImageGrid

DEFAULT_BETA_SQ = 0.3
DEFAULT_N_THRESHOLDS = 256


@dataclass(frozen=True)
class PRCurve:
    """Precision/recall points over a strictly increasing threshold grid."""

    thresholds: np.ndarray
    precisions: np.ndarray
    recalls: np.ndarray

    def __post_init__(self):
        t = np.array(self.thresholds, dtype=np.float64)
        p = np.array(self.precisions, dtype=np.float64)
        r = np.array(self.recalls, dtype=np.float64)
        if not (t.ndim == p.ndim == r.ndim == 1) or not (t.size == p.size == r.size):
            raise DimensionError("curve arrays must be 1-D and equal length")
        if t.size < 2:
            raise DimensionError("a curve needs at least 2 thresholds")
        if np.any(np.diff(t) <= 0):
            raise ValueError("thresholds must be strictly increasing")
        if np.any(np.diff(r) > 1e-9):
            raise ValueError("recall must be non-increasing in threshold")
        for arr in (t, p, r):
            arr.setflags(write=False)
        object.__setattr__(self, "thresholds", t)
        object.__setattr__(self, "precisions", p)
        object.__setattr__(self, "recalls", r)

    def points(self) -> list[tuple[float, float, float]]:
        return [(float(t), float(p), float(r)) for t, p, r in
                zip(self.thresholds, self.precisions, self.recalls)]


@dataclass(frozen=True)
class EvalReport:
    """Dataset-level saliency scores plus the mean PR curve."""

    mae: float
    max_f_beta: float
    beta_sq: float
    curve: PRCurve
    per_image: list | None = None


def binarize(s: ImageGrid, threshold: float) -> np.ndarray:
    """Boolean mask of pixels with value >= threshold."""
    if s.channels != 1:
        raise DimensionError(
            f"binarize expects a single-channel map, got {s.channels} channels"
        )
    return s.data[:, :, 0] >= threshold


def precision_recall(pred: np.ndarray, gt: np.ndarray) -> tuple[float, float]:
    """(TP/(TP+FP), TP/(TP+FN)); precision is 1 when nothing is predicted."""
    p = np.asarray(pred, dtype=bool)
    g = np.asarray(gt, dtype=bool)
    if p.shape != g.shape:
        raise DimensionError(f"mask shapes differ: {p.shape} vs {g.shape}")
    gt_pos = int(g.sum())
    if gt_pos == 0:
        raise DegenerateGroundTruthError("ground truth has no positive pixels")
    tp = int(np.logical_and(p, g).sum())
    pred_pos = int(p.sum())
    precision = 1.0 if pred_pos == 0 else tp / pred_pos
    recall = tp / gt_pos
    return precision, recall


def f_beta(precision: float, recall: float,
           beta_sq: float = DEFAULT_BETA_SQ) -> float:
    """(1 + b^2) * p * r / (b^2 * p + r); 0 when the denominator is 0."""
    denom = beta_sq * precision + recall
    if denom == 0.0:
        return 0.0
    return (1.0 + beta_sq) * precision * recall / denom


def threshold_grid(n_thresholds: int = DEFAULT_N_THRESHOLDS) -> np.ndarray:
    """Uniform grid k/(n-1) for k = 0..n-1, covering [0, 1]."""
    if n_thresholds < 2:
        raise DomainError(f"need at least 2 thresholds, got {n_thresholds}")
    return np.arange(n_thresholds, dtype=np.float64) / (n_thresholds - 1)


def pr_curve(s: ImageGrid, gt: np.ndarray,
             n_thresholds: int = DEFAULT_N_THRESHOLDS) -> PRCurve:
    """Sweep binarization thresholds and score each against the mask."""
    taus = threshold_grid(n_thresholds)
    precisions = np.empty_like(taus)
    recalls = np.empty_like(taus)
    for k, tau in enumerate(taus):
        precisions[k], recalls[k] = precision_recall(binarize(s, tau), gt)
    return PRCurve(taus, precisions, recalls)


def mae(s: ImageGrid, gt: ImageGrid) -> float:
    """Mean absolute per-pixel difference of two single-channel maps."""
    if s.channels != 1 or gt.channels != 1:
        raise DimensionError("mae expects single-channel maps")
    if (s.height, s.width) != (gt.height, gt.width):
        raise DimensionError(
            f"map dimensions differ: {s.height}x{s.width} vs "
            f"{gt.height}x{gt.width}"
        )
    return float(np.abs(s.data - gt.data).mean())


def _mask_grid(mask: np.ndarray) -> ImageGrid:
    return ImageGrid(np.asarray(mask, dtype=np.float64)[:, :, None])


def evaluate_dataset(pairs, n_thresholds: int = DEFAULT_N_THRESHOLDS,
                     beta_sq: float = DEFAULT_BETA_SQ,
                     ids=None, jobs: int = 1) -> EvalReport:
    """Aggregate per-image scores into a dataset report.

    pairs is a sequence of (saliency ImageGrid, boolean gt mask). The
    dataset MAE is the mean of per-image MAEs; the dataset curve holds
    the mean precision and mean recall at each threshold; max_f_beta is
    the maximum F-measure along that mean curve. per_image records
    (id, mae, best per-image F) in input order; with jobs > 1 images
    are scored concurrently but results land by index, so the report
    never depends on completion order.
    """
    pairs = list(pairs)
    if not pairs:
        raise EmptyDatasetError("no (saliency, ground truth) pairs to evaluate")
    if ids is None:
        ids = [str(k) for k in range(len(pairs))]
    if len(ids) != len(pairs):
        raise DimensionError("ids and pairs must have equal length")

    taus = threshold_grid(n_thresholds)

    def score_one(pair):
        s, gt = pair
        curve = pr_curve(s, gt, n_thresholds)
        best = max(f_beta(p, r, beta_sq)
                   for p, r in zip(curve.precisions, curve.recalls))
        return curve.precisions, curve.recalls, mae(s, _mask_grid(gt)), best

    if jobs > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            scored = list(pool.map(score_one, pairs))
    else:
        scored = [score_one(pair) for pair in pairs]

    prec = np.stack([row[0] for row in scored])
    rec = np.stack([row[1] for row in scored])
    maes = np.array([row[2] for row in scored])
    per_image = [(ids[k], float(maes[k]), float(scored[k][3]))
                 for k in range(len(pairs))]

    mean_curve = PRCurve(taus, prec.mean(axis=0), rec.mean(axis=0))
    max_f = max(f_beta(p, r, beta_sq)
                for p, r in zip(mean_curve.precisions, mean_curve.recalls))
    return EvalReport(mae=float(maes.mean()), max_f_beta=float(max_f),
                      beta_sq=beta_sq, curve=mean_curve, per_image=per_image)
