"""Raster value types and 8-bit byte conversion.

Images are dense float64 rasters stored row-major as (height, width,
channels). ImageGrid values live in [0, 1]; FeatureMap values are only
required to be finite. Byte conversion uses round-half-up so that
byte -> grid -> byte round trips are bit-exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from .errors import DimensionError


def _freeze(arr: np.ndarray) -> np.ndarray:
    # always copy so freezing never touches a caller's array
    out = np.array(arr, dtype=np.float64, order="C")
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class ImageGrid:
    """A (H, W, C) raster with every value finite and in [0, 1].

    Channel order is RGB interleaved; grayscale is channels=1, never an
    RGB triple of equal values.
    """

    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.float64)
        if arr.ndim != 3:
            raise DimensionError(f"expected (H, W, C) array, got shape {arr.shape}")
        h, w, c = arr.shape
        if h < 1 or w < 1:
            raise DimensionError(f"height and width must be >= 1, got {h}x{w}")
        if c not in (1, 3):
            raise DimensionError(f"channels must be 1 or 3, got {c}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("image values must be finite")
        if arr.min() < 0.0 or arr.max() > 1.0:
            raise ValueError("image values must lie in [0, 1]")
        object.__setattr__(self, "data", _freeze(arr))

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return self.data.shape[2]


@dataclass(frozen=True)
class FeatureMap:
    """A (H, W, C) raster of finite values with no range constraint."""

    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.float64)
        if arr.ndim != 3:
            raise DimensionError(f"expected (H, W, C) array, got shape {arr.shape}")
        h, w, c = arr.shape
        if h < 1 or w < 1 or c < 1:
            raise DimensionError(f"all dimensions must be >= 1, got {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("feature values must be finite")
        object.__setattr__(self, "data", _freeze(arr))

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return self.data.shape[2]


def from_bytes(raw: bytes | bytearray | np.ndarray, height: int, width: int,
               channels: int) -> ImageGrid:
    """Build an ImageGrid from an 8-bit interleaved pixel buffer.

    Each value is byte / 255 exactly.
    """
    buf = np.frombuffer(bytes(raw), dtype=np.uint8)
    expected = height * width * channels
    if buf.size != expected:
        raise DimensionError(
            f"buffer has {buf.size} bytes, expected {expected} "
            f"for {height}x{width}x{channels}"
        )
    data = buf.astype(np.float64).reshape(height, width, channels) / 255.0
    return ImageGrid(data)


def to_bytes(img: ImageGrid) -> bytes:
    """Quantize an ImageGrid to an 8-bit buffer, round-half-up."""
    q = np.floor(img.data * 255.0 + 0.5)
    return np.clip(q, 0, 255).astype(np.uint8).tobytes()


def load_png(path: str | Path) -> ImageGrid:
    """Load an 8-bit PNG as an ImageGrid; alpha is stripped on load."""
    with Image.open(path) as im:
        if im.mode == "L":
            converted = im.copy()
        elif im.mode == "LA":
            converted = im.convert("L")
        else:
            converted = im.convert("RGB")
        channels = 1 if converted.mode == "L" else 3
        w, h = converted.size
        return from_bytes(converted.tobytes(), h, w, channels)


def save_png(img: ImageGrid, path: str | Path) -> None:
    """Write an ImageGrid as an 8-bit PNG (mode L or RGB)."""
    mode = "L" if img.channels == 1 else "RGB"
    im = Image.frombytes(mode, (img.width, img.height), to_bytes(img))
    im.save(path, format="PNG")
