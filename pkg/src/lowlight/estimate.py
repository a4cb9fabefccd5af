"""Classical estimators for the lighting model's hidden fields.

The dark channel of an image patch is the minimum intensity over all
color channels within a local window. In well-lit natural patches it
sits near zero, so bright dark-channel regions point at scattered
environment light. That observation backs three estimators here:

  * dark_channel      -- windowed channel-minimum, truncated at borders
  * estimate_atmospheric_light -- mean intensity of the brightest
                         dark-channel pixels, returned as a constant map
  * init_transmission -- t = 1 - omega * dark_channel(I / A)

plus a variational refiner that smooths an initial transmission map by
gradient descent on

    E(t) = sum (t - t0)^2  +  lambda * sum ||grad t||^2

with forward differences and zero-flux boundaries. The descent
backtracks (halving the step, at most 20 times per iteration) so the
recorded objective sequence never increases.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import minimum_filter

from .errors import DimensionError, DomainError, SingularParameterError
from .grid import ImageGrid
from .lighting import DEFAULT_T_MIN, AtmosphericLightMap, TransmissionMap

DEFAULT_TOP_FRACTION = 0.001
DEFAULT_OMEGA = 0.95
DEFAULT_RADIUS = 7


@dataclass(frozen=True)
class DarkChannel:
    """Single-channel windowed channel-minimum raster, values in [0, 1]."""

    values: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=np.float64)
        if arr.ndim != 2:
            raise DimensionError(f"expected (H, W) array, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("dark channel values must be finite")
        if arr.min() < 0.0 or arr.max() > 1.0:
            raise ValueError("dark channel values must lie in [0, 1]")
        arr = np.array(arr, order="C")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class RefineConfig:
    """Settings for the variational transmission refiner."""

    lambda_smooth: float = 0.5
    steps: int = 60
    step_size: float = 0.2

    def __post_init__(self):
        if self.lambda_smooth < 0.0:
            raise DomainError("lambda_smooth must be nonnegative")
        if self.steps < 1:
            raise DomainError("steps must be >= 1")
        if self.step_size <= 0.0:
            raise DomainError("step_size must be positive")


def _window_min(arr: np.ndarray, radius: int) -> np.ndarray:
    """Minimum over the (2r+1)^2 window, truncated at image borders.

    mode='nearest' replicates edge samples, which for a contiguous
    window equals the minimum over the window's in-bounds part.
    """
    if radius == 0:
        return arr.copy()
    return minimum_filter(arr, size=2 * radius + 1, mode="nearest")


def dark_channel(img: ImageGrid, radius: int) -> DarkChannel:
    """Windowed minimum over channels and a (2r+1)^2 neighborhood."""
    if radius < 0:
        raise DomainError(f"radius must be >= 0, got {radius}")
    channel_min = img.data.min(axis=2)
    return DarkChannel(_window_min(channel_min, radius))


def estimate_atmospheric_light(img: ImageGrid, dc: DarkChannel,
                               top_fraction: float = DEFAULT_TOP_FRACTION
                               ) -> AtmosphericLightMap:
    """Average the brightest dark-channel pixels into a constant map.

    Selects the ceil(top_fraction * H * W) pixels with the largest dark
    channel value (ties broken by row-major index, never fewer than one
    pixel), averages their per-pixel channel-mean intensity, and
    broadcasts that scalar.
    """
    if not 0.0 < top_fraction <= 1.0:
        raise DomainError(f"top_fraction must lie in (0, 1], got {top_fraction}")
    if (img.height, img.width) != (dc.height, dc.width):
        raise DimensionError("image and dark channel dimensions differ")
    n = img.height * img.width
    k = max(1, int(np.ceil(top_fraction * n)))
    # stable argsort of the negated values: descending, row-major ties
    order = np.argsort(-dc.values.ravel(), kind="stable")[:k]
    intensity = img.data.mean(axis=2).ravel()
    value = float(intensity[order].mean())
    return AtmosphericLightMap.constant(img.height, img.width, value)


def init_transmission(img: ImageGrid, a: AtmosphericLightMap,
                      omega: float = DEFAULT_OMEGA,
                      radius: int = DEFAULT_RADIUS,
                      t_min: float = DEFAULT_T_MIN) -> TransmissionMap:
    """t = clamp(1 - omega * dark_channel(I / A), t_min, 1).

    The division runs elementwise before the windowed minimum; A must be
    strictly positive everywhere.
    """
    if not 0.0 < omega <= 1.0:
        raise DomainError(f"omega must lie in (0, 1], got {omega}")
    if radius < 0:
        raise DomainError(f"radius must be >= 0, got {radius}")
    if (img.height, img.width) != (a.height, a.width):
        raise DimensionError("image and light map dimensions differ")
    if a.values.min() <= 0.0:
        raise SingularParameterError("light map contains zero; cannot divide")
    ratio = img.data / a.values[:, :, None]
    dc = _window_min(ratio.min(axis=2), radius)
    t = np.clip(1.0 - omega * dc, t_min, 1.0)
    return TransmissionMap(t, t_min=t_min)


def smoothness_objective(t: np.ndarray, t0: np.ndarray,
                         lambda_smooth: float) -> float:
    """E(t) = sum (t - t0)^2 + lambda * sum of squared forward differences."""
    gx = t[:, 1:] - t[:, :-1]
    gy = t[1:, :] - t[:-1, :]
    return float(((t - t0) ** 2).sum()
                 + lambda_smooth * ((gx ** 2).sum() + (gy ** 2).sum()))


def _objective_gradient(t: np.ndarray, t0: np.ndarray,
                        lambda_smooth: float) -> np.ndarray:
    grad = 2.0 * (t - t0)
    gx = t[:, 1:] - t[:, :-1]
    gy = t[1:, :] - t[:-1, :]
    smooth = np.zeros_like(t)
    smooth[:, :-1] -= gx
    smooth[:, 1:] += gx
    smooth[:-1, :] -= gy
    smooth[1:, :] += gy
    return grad + 2.0 * lambda_smooth * smooth


def refine_transmission(t0: TransmissionMap, cfg: RefineConfig,
                        objective_trace: list | None = None
                        ) -> TransmissionMap:
    """Smooth a transmission map by backtracking gradient descent.

    Runs cfg.steps iterations at cfg.step_size, halving the step when a
    candidate would increase the objective; after 20 halvings in one
    iteration the descent stops early. If objective_trace is a list, the
    accepted objective values (including the initial one) are appended.
    The result is re-clamped to [t_min, 1].
    """
    target = t0.values.copy()
    t = target.copy()
    lam = cfg.lambda_smooth
    step = cfg.step_size
    best = smoothness_objective(t, target, lam)
    if objective_trace is not None:
        objective_trace.append(best)
    for _ in range(cfg.steps):
        grad = _objective_gradient(t, target, lam)
        halvings = 0
        while True:
            candidate = t - step * grad
            value = smoothness_objective(candidate, target, lam)
            if value <= best:
                t, best = candidate, value
                break
            halvings += 1
            if halvings > 20:
                t_clamped = np.clip(t, t0.t_min, 1.0)
                return TransmissionMap(t_clamped, t_min=t0.t_min)
            step *= 0.5
        if objective_trace is not None:
            objective_trace.append(best)
    return TransmissionMap(np.clip(t, t0.t_min, 1.0), t_min=t0.t_min)
