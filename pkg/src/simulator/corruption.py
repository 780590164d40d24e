"""Synthetic network outputs.

The semantic channel gets texture-style errors: whole objects relabeled as a
confusable class, ragged boundaries and background speckle. The instance
channel keeps every class label and only loses objects, wobbles their
outlines and adds a few low-confidence false alarms.
"""

import logging
from typing import Optional, Sequence

import cv2
import numpy as np

from src.config import settings
from src.core.catalog import ClassCatalog
from src.core.models import InstanceSegment, LabelMap, ProbVolume
from src.core.rle import BinaryMask
from src.simulator.rng import STREAM_INSTANCES, STREAM_SEMANTIC, make_rng
from src.simulator.scene import GroundTruthInstance, rasterize, stamp
from src.simulator.specs import CorruptionSpec, Silhouette

log = logging.getLogger(__name__)

# Symmetric pairs; names missing from a catalog are ignored
DEFAULT_CONFUSIONS = [
    ("car", "truck"),
    ("truck", "bus"),
    ("car", "bus"),
    ("person", "rider"),
    ("motorcycle", "bicycle"),
    ("traffic light", "traffic sign"),
    ("train", "bus"),
    ("pedestrian", "cyclist"),
]


def confusion_table(catalog: ClassCatalog, custom: Optional[dict[str, list[str]]] = None) -> dict[int, list[int]]:
    """Foreground class id -> sorted ids it may be mistaken for."""
    known = {catalog.name_of(cid) for cid in catalog.foreground_ids}
    table: dict[str, set[str]] = {}
    if custom is None:
        for a, b in DEFAULT_CONFUSIONS:
            table.setdefault(a, set()).add(b)
            table.setdefault(b, set()).add(a)
    else:
        for name, others in custom.items():
            table.setdefault(name, set()).update(others)
    return {
        catalog.id_of(name): sorted(catalog.id_of(o) for o in others if o in known and o != name)
        for name, others in table.items()
        if name in known
    }


def jitter_mask(pixels: np.ndarray, radius: int) -> np.ndarray:
    """Dilate (radius > 0) or erode (radius < 0) with a square (2|r|+1) kernel."""
    if radius == 0:
        return pixels.copy()
    kernel = np.ones((2 * abs(radius) + 1,) * 2, dtype=np.uint8)
    op = cv2.dilate if radius > 0 else cv2.erode
    return op(pixels.astype(np.uint8), kernel).astype(bool)


def mask_iou(a: np.ndarray, b: np.ndarray) -> float:
    union = int((a | b).sum())
    if union == 0:
        return 1.0
    return int((a & b).sum()) / union


def _row_background(gt: np.ndarray, catalog: ClassCatalog) -> np.ndarray:
    """Most frequent background label of each GT row (lowest id on ties)."""
    bg_ids = np.array(sorted(catalog.background_ids), dtype=np.uint8)
    counts = np.stack([(gt == cid).sum(axis=1) for cid in bg_ids], axis=1)
    per_row = bg_ids[np.argmax(counts, axis=1)]
    # rows fully covered by objects borrow the image-wide majority
    fallback = bg_ids[np.argmax(counts.sum(axis=0))]
    return np.where(counts.sum(axis=1) > 0, per_row, fallback)


def _radius(rng: np.random.Generator, jitter: int) -> int:
    return int(rng.integers(-jitter, jitter + 1)) if jitter else 0


def simulate_semantic(
    gt: LabelMap,
    instances: Sequence[GroundTruthInstance],
    corruption: CorruptionSpec,
    seed: int,
    catalog: ClassCatalog,
    index: int = 0,
) -> ProbVolume:
    c = corruption.semantic
    rng = make_rng(seed, index, STREAM_SEMANTIC)
    confusable = confusion_table(catalog, c.confusion_table)
    labels = gt.data.copy()
    is_bg = ~catalog.foreground_lut[gt.data]
    row_bg = _row_background(gt.data, catalog) if c.boundary_jitter else None

    for inst in instances:
        region = inst.segment.mask.to_array()
        class_id = inst.segment.class_id
        # one draw per object keeps the stream aligned whatever the outcome
        flip = rng.random() < c.confusion_for(catalog.name_of(class_id))
        options = confusable.get(class_id, [])
        if flip and options:
            class_id = options[int(rng.integers(len(options)))]
            labels[region] = class_id

        radius = _radius(rng, c.boundary_jitter)
        if radius > 0:
            grown = jitter_mask(region, radius) & is_bg
            labels[grown] = class_id
        elif radius < 0:
            lost = region & ~jitter_mask(region, radius)
            labels[lost] = np.broadcast_to(row_bg[:, None], labels.shape)[lost]

    if c.bg_noise:
        bg_ids = np.array(sorted(catalog.background_ids), dtype=np.uint8)
        speckle = (rng.random(labels.shape) < c.bg_noise) & ~catalog.foreground_lut[labels]
        if len(bg_ids) > 1:
            current = np.searchsorted(bg_ids, labels[speckle])
            shift = rng.integers(1, len(bg_ids), size=current.size)
            labels[speckle] = bg_ids[(current + shift) % len(bg_ids)]

    height, width = labels.shape
    volume = rng.uniform(0.0, settings.NOISE_FLOOR, size=(height, width, catalog.size))
    channel = catalog.index_lut[labels].astype(np.intp)[:, :, None]
    np.put_along_axis(volume, channel, np.take_along_axis(volume, channel, axis=2) + 1.0, axis=2)
    volume /= volume.sum(axis=2, keepdims=True)
    return ProbVolume(volume)


def simulate_instances(
    instances: Sequence[GroundTruthInstance],
    corruption: CorruptionSpec,
    seed: int,
    dims: tuple[int, int],
    catalog: ClassCatalog,
    shape_library: Optional[dict[str, list[Silhouette]]] = None,
    index: int = 0,
) -> list[InstanceSegment]:
    c = corruption.instance
    width, height = dims
    rng = make_rng(seed, index, STREAM_INSTANCES)
    segments = []

    for inst in instances:
        missed = rng.random() < c.miss_rate
        radius = _radius(rng, c.mask_jitter)
        noise = rng.normal(0.0, c.score_noise) if c.score_noise else 0.0
        visible = inst.segment.mask.to_array()
        if missed or not visible.any():
            continue
        jittered = jitter_mask(visible, radius)
        if not jittered.any():
            log.debug("instance %d eroded away", inst.instance_id)
            continue
        score = float(np.clip(mask_iou(jittered, visible) + noise, 0.0, 1.0))
        segments.append(InstanceSegment(BinaryMask.from_array(jittered), inst.segment.class_id, score))

    if c.spurious_rate:
        count = int(rng.poisson(c.spurious_rate))
        candidates = sorted(
            name for name, templates in (shape_library or {}).items()
            if templates and name in {catalog.name_of(cid) for cid in catalog.foreground_ids}
        )
        if count and not candidates:
            log.warning("no foreground shape templates available, skipping %d spurious segments", count)
            count = 0
        for _ in range(count):
            name = candidates[int(rng.integers(len(candidates)))]
            templates = shape_library[name]
            sprite = rasterize(templates[int(rng.integers(len(templates)))], rng)
            left = int(rng.integers(-(sprite.shape[1] - 1), width))
            bottom = int(rng.integers(0, height + sprite.shape[0] - 1))
            pixels = stamp(sprite, left, bottom, width, height)
            score = float(rng.uniform(0.0, c.spurious_score_max))
            if pixels.any():
                segments.append(InstanceSegment(BinaryMask.from_array(pixels), catalog.id_of(name), score))
    return segments
