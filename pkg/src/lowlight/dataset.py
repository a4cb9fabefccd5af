"""Dataset tooling: box consensus, manifests, splits, synthetic pairs.

Annotation consensus keeps an object only when every pair of annotator
boxes overlaps strongly (IoU above a threshold); the kept region is the
pixel-wise intersection of all boxes, which for axis-aligned boxes is
itself a box. Manifests are JSON arrays of {image, gt, split, stage,
object_type} records written atomically (temp file, then rename).
"""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass, field, replace
from itertools import combinations
from pathlib import Path

import numpy as np
from scipy.ndimage import uniform_filter

from .errors import DomainError, InsufficientAnnotationsError
from .grid import ImageGrid
from .lighting import (DEFAULT_T_MIN, AtmosphericLightMap, ScatterParams,
                       TransmissionMap, degrade, rng_from_seed,
                       synth_atmospheric_light)

SPLITS = ("train", "test")
STAGES = ("stage1_7to9pm", "stage2_9to11pm")
OBJECT_TYPES = ("single_person", "multiple_persons", "vehicle")
DEFAULT_CONSENSUS_IOU = 0.8


@dataclass(frozen=True)
class BoundingBox:
    """Axis-aligned box: top-left (x, y) plus width and height in pixels."""

    x: int
    y: int
    w: int
    h: int

    def __post_init__(self):
        if self.x < 0 or self.y < 0:
            raise DomainError(f"box origin must be nonnegative, got ({self.x}, {self.y})")
        if self.w < 1 or self.h < 1:
            raise DomainError(f"box extents must be >= 1, got {self.w}x{self.h}")

    @property
    def area(self) -> int:
        return self.w * self.h

    def intersect(self, other: "BoundingBox") -> "BoundingBox | None":
        x0 = max(self.x, other.x)
        y0 = max(self.y, other.y)
        x1 = min(self.x + self.w, other.x + other.w)
        y1 = min(self.y + self.h, other.y + other.h)
        if x1 <= x0 or y1 <= y0:
            return None
        return BoundingBox(x0, y0, x1 - x0, y1 - y0)


@dataclass(frozen=True)
class AnnotationRecord:
    """Raw annotator boxes for one image, plus the consensus once accepted."""

    image_id: str
    annotator_boxes: tuple = ()
    consensus: BoundingBox | None = None


def box_iou(a: BoundingBox, b: BoundingBox) -> float:
    """Intersection over union of pixel areas, in [0, 1]."""
    inter = a.intersect(b)
    inter_area = 0 if inter is None else inter.area
    union = a.area + b.area - inter_area
    return inter_area / union


def box_mask(box: BoundingBox, height: int, width: int) -> np.ndarray:
    """Materialize a box as a boolean pixel mask on an H x W canvas."""
    mask = np.zeros((height, width), dtype=bool)
    mask[box.y:box.y + box.h, box.x:box.x + box.w] = True
    return mask


def consensus_region(boxes, threshold: float = DEFAULT_CONSENSUS_IOU
                     ) -> BoundingBox | None:
    """Intersection of all boxes when every pairwise IoU exceeds threshold.

    Returns None (object dropped) when any pair falls at or below the
    threshold; needs at least two annotator boxes.
    """
    boxes = list(boxes)
    if len(boxes) < 2:
        raise InsufficientAnnotationsError(
            f"consensus needs >= 2 boxes, got {len(boxes)}"
        )
    for a, b in combinations(boxes, 2):
        if box_iou(a, b) <= threshold:
            return None
    region = boxes[0]
    for b in boxes[1:]:
        region = region.intersect(b)
        # pairwise IoU > 0 per axis implies a common intersection
        assert region is not None
    return region


@dataclass(frozen=True)
class ManifestEntry:
    image: str
    gt: str
    split: str
    stage: str
    object_type: str

    def __post_init__(self):
        if self.split not in SPLITS:
            raise DomainError(f"split must be one of {SPLITS}, got {self.split!r}")
        if self.stage not in STAGES:
            raise DomainError(f"stage must be one of {STAGES}, got {self.stage!r}")
        if self.object_type not in OBJECT_TYPES:
            raise DomainError(
                f"object_type must be one of {OBJECT_TYPES}, got {self.object_type!r}"
            )


@dataclass(frozen=True)
class Manifest:
    entries: tuple = field(default_factory=tuple)

    def __post_init__(self):
        entries = tuple(self.entries)
        paths = [e.image for e in entries]
        if len(set(paths)) != len(paths):
            raise ValueError("manifest image paths must be unique")
        object.__setattr__(self, "entries", entries)

    def __len__(self) -> int:
        return len(self.entries)


def split_manifest(manifest: Manifest, train_fraction: float,
                   seed: int) -> Manifest:
    """Retag entries after a seeded shuffle; ceil(fraction * n) go to train.

    Entry order in the returned manifest matches the input; only the
    split tags change. Same seed, same assignment.
    """
    if not 0.0 < train_fraction < 1.0:
        raise DomainError(
            f"train_fraction must lie in (0, 1), got {train_fraction}"
        )
    n = len(manifest)
    n_train = int(np.ceil(train_fraction * n))
    order = rng_from_seed(seed).permutation(n)
    train_idx = set(int(i) for i in order[:n_train])
    retagged = tuple(
        replace(e, split="train" if i in train_idx else "test")
        for i, e in enumerate(manifest.entries)
    )
    return Manifest(retagged)


def split_summary(manifest: Manifest) -> dict:
    """Counts per split, and per stage / object type within each split."""
    summary = {}
    for split in SPLITS:
        rows = [e for e in manifest.entries if e.split == split]
        summary[split] = {
            "count": len(rows),
            "stage": {s: sum(1 for e in rows if e.stage == s) for s in STAGES},
            "object_type": {t: sum(1 for e in rows if e.object_type == t)
                            for t in OBJECT_TYPES},
        }
    return summary


def load_manifest(path: str | Path) -> Manifest:
    with open(path, "r", encoding="utf-8") as fh:
        rows = json.load(fh)
    if not isinstance(rows, list):
        raise ValueError("manifest must be a JSON array")
    return Manifest(tuple(
        ManifestEntry(image=r["image"], gt=r["gt"], split=r["split"],
                      stage=r["stage"], object_type=r["object_type"])
        for r in rows
    ))


def save_manifest(manifest: Manifest, path: str | Path) -> None:
    """Whole-file atomic write: temp file in the target dir, then rename."""
    path = Path(path)
    rows = [{"image": e.image, "gt": e.gt, "split": e.split,
             "stage": e.stage, "object_type": e.object_type}
            for e in manifest.entries]
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            json.dump(rows, fh, indent=2)
            fh.write("\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def smooth_transmission_field(height: int, width: int, radius: int,
                              seed: int, t_min: float = DEFAULT_T_MIN
                              ) -> TransmissionMap:
    """Uniform noise on [t_min, 1], box-blurred and re-clamped.

    The blur averages over the (2r+1)^2 window truncated at borders; a
    radius covering the whole image flattens the field to its mean.
    """
    if radius < 0:
        raise DomainError(f"radius must be >= 0, got {radius}")
    noise = rng_from_seed(seed).uniform(t_min, 1.0, size=(height, width))
    if radius > 0:
        size = 2 * radius + 1
        num = uniform_filter(noise, size=size, mode="constant", cval=0.0)
        den = uniform_filter(np.ones_like(noise), size=size,
                             mode="constant", cval=0.0)
        noise = num / den
    return TransmissionMap(np.clip(noise, t_min, 1.0), t_min=t_min)


def synthesize_pair(j: ImageGrid, params: ScatterParams, t_smoothness: int,
                    seed: int, t_min: float = DEFAULT_T_MIN
                    ) -> tuple[ImageGrid, AtmosphericLightMap, TransmissionMap]:
    """Build a supervised (degraded, light map, transmission) triple.

    The light map comes from the point-wise random draw keyed by
    params.seed; the transmission field is smoothed noise keyed by the
    separate seed argument; the degraded image applies the forward
    scattering model to the bright source.
    """
    a = synth_atmospheric_light(j.height, j.width, params)
    t = smooth_transmission_field(j.height, j.width, t_smoothness, seed,
                                  t_min=t_min)
    i = degrade(j, t, a)
    return i, a, t
