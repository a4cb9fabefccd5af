"""Scattering-based lighting model: synthesis, degradation, and inversion.

An observed low-light image decomposes per pixel into a direct
attenuation term and a scattered environment-light term:

    I(z) = J(z) * t(z) + A(z) * (1 - t(z))

where J is the well-lit scene, t is the transmission map, and A is the
environment light, treated here as a point-wise scalar that varies with
local light sources rather than a global constant. Enhancement inverts
the model for J, guarding the division with a transmission floor.

Randomness uses numpy's Philox generator: a counter-based, platform-
stable 64-bit stream in which the k-th variate is a pure function of
(seed, k), with pixels consuming variates in row-major order. Parallel
synthesis of disjoint regions can therefore reproduce the same map by
jumping the counter.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, DomainError
from .grid import ImageGrid

DEFAULT_T_MIN = 0.1


def rng_from_seed(seed: int) -> np.random.Generator:
    """The package-wide deterministic generator (Philox, counter-based)."""
    return np.random.Generator(np.random.Philox(seed))


@dataclass(frozen=True)
class ScatterParams:
    """Synthesis parameters: light-dimming strength and RNG seed."""

    alpha: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise DomainError(f"alpha must lie in [0, 1], got {self.alpha}")


@dataclass(frozen=True)
class AtmosphericLightMap:
    """Per-pixel environment-light scalars in [0, 1].

    Broadcast across color channels wherever the map is applied.
    """

    values: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=np.float64)
        if arr.ndim != 2:
            raise DimensionError(f"expected (H, W) array, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("light values must be finite")
        if arr.min() < 0.0 or arr.max() > 1.0:
            raise ValueError("light values must lie in [0, 1]")
        arr = np.array(arr, order="C")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @classmethod
    def constant(cls, height: int, width: int, value: float) -> "AtmosphericLightMap":
        return cls(np.full((height, width), float(value)))


@dataclass(frozen=True)
class TransmissionMap:
    """Per-pixel transmission scalars in [t_min, 1].

    t_min is the floor applied when the map divides an inversion; it
    must lie strictly inside (0, 1).
    """

    values: np.ndarray
    t_min: float = DEFAULT_T_MIN

    def __post_init__(self):
        if not 0.0 < self.t_min < 1.0:
            raise DomainError(f"t_min must lie in (0, 1), got {self.t_min}")
        arr = np.asarray(self.values, dtype=np.float64)
        if arr.ndim != 2:
            raise DimensionError(f"expected (H, W) array, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("transmission values must be finite")
        if arr.min() < self.t_min or arr.max() > 1.0:
            raise ValueError(
                f"transmission values must lie in [{self.t_min}, 1]"
            )
        arr = np.array(arr, order="C")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]


def _check_dims(img: ImageGrid, t: TransmissionMap, a: AtmosphericLightMap) -> None:
    if (img.height, img.width) != (t.height, t.width):
        raise DimensionError(
            f"image is {img.height}x{img.width} but transmission map is "
            f"{t.height}x{t.width}"
        )
    if (img.height, img.width) != (a.height, a.width):
        raise DimensionError(
            f"image is {img.height}x{img.width} but light map is "
            f"{a.height}x{a.width}"
        )


def synth_atmospheric_light(height: int, width: int,
                            params: ScatterParams) -> AtmosphericLightMap:
    """Draw a point-wise random light map, A = 1 - alpha * u, u ~ U[0, 1).

    Deterministic given params.seed; every value lies in [1 - alpha, 1].
    """
    if height < 1 or width < 1:
        raise DimensionError(f"map dimensions must be >= 1, got {height}x{width}")
    u = rng_from_seed(params.seed).random((height, width))
    return AtmosphericLightMap(1.0 - params.alpha * u)


def degrade(j: ImageGrid, t: TransmissionMap,
            a: AtmosphericLightMap) -> ImageGrid:
    """Apply the forward model I = J*t + A*(1 - t), clamped to [0, 1].

    For in-range inputs the result is a per-pixel convex combination of
    J and A, so the clamp only absorbs float round-off.
    """
    _check_dims(j, t, a)
    tt = t.values[:, :, None]
    aa = a.values[:, :, None]
    out = j.data * tt + aa * (1.0 - tt)
    return ImageGrid(np.clip(out, 0.0, 1.0))


def enhance(i: ImageGrid, t: TransmissionMap,
            a: AtmosphericLightMap) -> ImageGrid:
    """Invert the forward model: J = (I - A*(1 - t)) / max(t, t_min).

    Output is clamped to [0, 1]; the t_min floor keeps the division
    bounded even if the map carries values at its lower limit.
    """
    _check_dims(i, t, a)
    tt = np.maximum(t.values, t.t_min)[:, :, None]
    aa = a.values[:, :, None]
    out = (i.data - aa * (1.0 - t.values[:, :, None])) / tt
    return ImageGrid(np.clip(out, 0.0, 1.0))
