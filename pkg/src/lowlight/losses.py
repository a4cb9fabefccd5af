"""Loss and objective evaluators for the enhancement and detection heads.

Pure functions over arrays and grid types; no training machinery. The
saliency losses pair per-pixel cross-entropy with a Dice-form overlap
loss, combined linearly with per-scale weights; the enhancement side
contributes a pixel MSE on the light map and the joint real/fake
discriminator objective.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, DomainError
from .grid import FeatureMap, ImageGrid
from .lighting import AtmosphericLightMap

GAN_EPS = 1e-12


@dataclass(frozen=True)
class LossWeights:
    """Per-scale weights for the combined loss."""

    lambdas: tuple = (1.0,)
    gammas: tuple = (1.0,)

    def __post_init__(self):
        object.__setattr__(self, "lambdas", tuple(float(v) for v in self.lambdas))
        object.__setattr__(self, "gammas", tuple(float(v) for v in self.gammas))
        if len(self.lambdas) != len(self.gammas) or not self.lambdas:
            raise DimensionError("lambdas and gammas must have equal length >= 1")
        if any(v < 0 for v in self.lambdas + self.gammas):
            raise DomainError("loss weights must be nonnegative")


@dataclass(frozen=True)
class FusionParams:
    """Two-class linear operators fusing local and global features.

    w_local is (2, local_dims), w_global is (2, global_dims); b_local
    and b_global hold one scalar per class.
    """

    w_local: np.ndarray
    b_local: np.ndarray
    w_global: np.ndarray
    b_global: np.ndarray

    def __post_init__(self):
        wl = np.array(self.w_local, dtype=np.float64)
        wg = np.array(self.w_global, dtype=np.float64)
        bl = np.array(self.b_local, dtype=np.float64)
        bg = np.array(self.b_global, dtype=np.float64)
        if wl.ndim != 2 or wl.shape[0] != 2:
            raise DimensionError(f"w_local must be (2, D_L), got {wl.shape}")
        if wg.ndim != 2 or wg.shape[0] != 2:
            raise DimensionError(f"w_global must be (2, D_G), got {wg.shape}")
        if bl.shape != (2,) or bg.shape != (2,):
            raise DimensionError("biases must hold one scalar per class")
        for arr in (wl, wg, bl, bg):
            if not np.all(np.isfinite(arr)):
                raise ValueError("fusion parameters must be finite")
        for name, arr in (("w_local", wl), ("b_local", bl),
                          ("w_global", wg), ("b_global", bg)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)


def mse_atmospheric(a_est: AtmosphericLightMap, a_gt: AtmosphericLightMap,
                    batches: int = 1) -> float:
    """Squared-error sum over pixels divided by batches * H * W.

    With batches=1 this is the per-pixel mean squared error of one map
    pair; callers accumulating a batch of N pairs sum per-pair values
    computed with batches=N.
    """
    if (a_est.height, a_est.width) != (a_gt.height, a_gt.width):
        raise DimensionError("light maps have different dimensions")
    if batches < 1:
        raise DomainError(f"batches must be >= 1, got {batches}")
    sq = float(((a_est.values - a_gt.values) ** 2).sum())
    return sq / (batches * a_est.height * a_est.width)


def fuse_saliency(local: FeatureMap, global_feat: np.ndarray,
                  params: FusionParams) -> ImageGrid:
    """Per-pixel two-class softmax over fused local + global logits.

    logit_c(v) = w_local[c] . local(v) + b_local[c]
                 + w_global[c] . global + b_global[c]

    Returns the class-1 probability as a single-channel grid; values
    are strictly inside (0, 1).
    """
    gvec = np.asarray(global_feat, dtype=np.float64).ravel()
    if params.w_local.shape[1] != local.channels:
        raise DimensionError(
            f"w_local expects {params.w_local.shape[1]} local dims, feature "
            f"map has {local.channels}"
        )
    if params.w_global.shape[1] != gvec.size:
        raise DimensionError(
            f"w_global expects {params.w_global.shape[1]} global dims, got "
            f"{gvec.size}"
        )
    # (H, W, 2) logits
    logits = np.einsum("hwd,cd->hwc", local.data, params.w_local)
    logits += params.b_local
    logits += params.w_global @ gvec + params.b_global
    shifted = logits - logits.max(axis=2, keepdims=True)
    e = np.exp(shifted)
    prob1 = e[:, :, 1] / e.sum(axis=2)
    return ImageGrid(prob1[:, :, None])


def cross_entropy(y_true: np.ndarray, y_hat: ImageGrid,
                  eps: float = 1e-12) -> float:
    """Mean negative log-probability of the true class per pixel.

    y_true is a boolean mask; y_hat holds class-1 probabilities. Each
    pixel contributes -log(max(p_true, eps)).
    """
    if eps <= 0.0:
        raise DomainError(f"eps must be positive, got {eps}")
    mask = np.asarray(y_true, dtype=bool)
    if y_hat.channels != 1:
        raise DimensionError("probability map must be single-channel")
    if mask.shape != (y_hat.height, y_hat.width):
        raise DimensionError(
            f"mask shape {mask.shape} does not match map "
            f"{(y_hat.height, y_hat.width)}"
        )
    p1 = y_hat.data[:, :, 0]
    p_true = np.where(mask, p1, 1.0 - p1)
    return float(-np.log(np.maximum(p_true, eps)).mean())


def iou_boundary_loss(mask_a: np.ndarray, mask_b: np.ndarray) -> float:
    """Dice-form overlap loss 1 - 2|A n B| / (|A| + |B|), in [0, 1].

    Two empty masks return 0 by convention.
    """
    a = np.asarray(mask_a, dtype=bool)
    b = np.asarray(mask_b, dtype=bool)
    if a.shape != b.shape:
        raise DimensionError(f"mask shapes differ: {a.shape} vs {b.shape}")
    total = int(a.sum()) + int(b.sum())
    if total == 0:
        return 0.0
    inter = int(np.logical_and(a, b).sum())
    return 1.0 - 2.0 * inter / total


def total_loss(ce_per_scale, dice_per_scale, weights: LossWeights) -> float:
    """sum_j lambda_j * ce_j + sum_j gamma_j * dice_j."""
    ce = [float(v) for v in ce_per_scale]
    dice = [float(v) for v in dice_per_scale]
    if len(ce) != len(weights.lambdas) or len(dice) != len(weights.gammas):
        raise DimensionError("loss lists and weights must have equal length")
    return (sum(l * c for l, c in zip(weights.lambdas, ce))
            + sum(g * d for g, d in zip(weights.gammas, dice)))


def joint_gan_objective(d_t_fake: float, d_j_fake: float,
                        d_real: float) -> float:
    """log(1 - d_t_fake) + log(1 - d_j_fake) + log(d_real).

    Discriminator outputs must lie in [0, 1]; values (and one-minus
    values) below 1e-12 are clamped there before the logs. Expectations
    over data are the caller's averaging concern.
    """
    for name, v in (("d_t_fake", d_t_fake), ("d_j_fake", d_j_fake),
                    ("d_real", d_real)):
        if not 0.0 <= v <= 1.0:
            raise DomainError(f"{name} must lie in [0, 1], got {v}")
    return (math.log(max(1.0 - d_t_fake, GAN_EPS))
            + math.log(max(1.0 - d_j_fake, GAN_EPS))
            + math.log(max(d_real, GAN_EPS)))
