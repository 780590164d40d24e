"""Procedural street scenes with automatic instance annotation.

Background classes are laid out as horizontal bands; foreground objects are
stamped from silhouette templates, each one standing in its anchor band.
Later stamps occlude earlier ones, so the visible masks partition the
foreground pixels.
"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from src.core.catalog import ClassCatalog, get_catalog
from src.core.errors import SpecError
from src.core.models import InstanceSegment, LabelMap
from src.core.rle import BinaryMask
from src.simulator.rng import STREAM_SCENE, make_rng
from src.simulator.specs import SceneSpec, Silhouette

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class GroundTruthInstance:
    instance_id: int  # 1..N in placement order
    segment: InstanceSegment  # visible mask, score 1


@dataclass(frozen=True)
class BandSpan:
    class_id: int
    top: int
    bottom: int  # exclusive


@dataclass(frozen=True, eq=False)
class Scene:
    catalog: ClassCatalog
    gt: LabelMap
    instances: tuple[GroundTruthInstance, ...]
    instance_map: np.ndarray  # 0 where no instance is visible
    bands: tuple[BandSpan, ...]

    @property
    def dims(self) -> tuple[int, int]:
        return self.gt.dims

    @property
    def instance_counts(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for inst in self.instances:
            name = self.catalog.name_of(inst.segment.class_id)
            counts[name] = counts.get(name, 0) + 1
        return counts


def band_spans(spec: SceneSpec, catalog: ClassCatalog) -> tuple[BandSpan, ...]:
    """Row ranges of each background band, top to bottom."""
    edges = np.rint(np.cumsum([0.0] + [b.fraction for b in spec.bands]) * spec.height).astype(int)
    edges[-1] = spec.height
    spans = []
    for index, band in enumerate(spec.bands):
        where = f"bands.{index}.class_name"
        try:
            class_id = catalog.id_of(band.class_name)
        except ValueError as e:
            raise SpecError(str(e), field_path=where) from e
        if catalog.is_foreground(class_id):
            raise SpecError(f"'{band.class_name}' is a foreground class and cannot be a band", field_path=where)
        top, bottom = int(edges[index]), int(edges[index + 1])
        if bottom <= top:
            raise SpecError(
                f"band '{band.class_name}' gets zero rows at height {spec.height}",
                field_path=f"bands.{index}.fraction",
            )
        spans.append(BandSpan(class_id, top, bottom))
    return tuple(spans)


def rasterize(template: Silhouette, rng: np.random.Generator) -> np.ndarray:
    """Draw one jittered instance of a template as an (h, w) boolean sprite."""
    scale = rng.uniform(*template.scale)
    aspect = rng.uniform(*template.aspect)
    w = max(1, int(round(template.width * scale * aspect)))
    h = max(1, int(round(template.height * scale / aspect)))

    sprite = np.zeros((h, w), dtype=bool)
    rows, cols = np.ogrid[:h, :w]
    for part in template.parts:
        if part.kind == "rect":
            x0, x1 = int(np.floor(part.x * w)), int(np.ceil(min(part.x + part.w, 1.0) * w))
            y0, y1 = int(np.floor(part.y * h)), int(np.ceil(min(part.y + part.h, 1.0) * h))
            sprite[y0:y1, x0:x1] = True
        else:
            # ellipse inscribed in the part box, tested at pixel centers
            cx, cy = (part.x + part.w / 2) * w, (part.y + part.h / 2) * h
            rx, ry = part.w * w / 2, part.h * h / 2
            sprite |= ((cols + 0.5 - cx) / rx) ** 2 + ((rows + 0.5 - cy) / ry) ** 2 <= 1.0
    if not sprite.any():
        sprite[h // 2, w // 2] = True
    return sprite


def stamp(sprite: np.ndarray, left: int, bottom: int, width: int, height: int) -> np.ndarray:
    """Full-canvas mask of a sprite whose bottom-left corner sits at (left, bottom), clipped to the image."""
    canvas = np.zeros((height, width), dtype=bool)
    h, w = sprite.shape
    top = bottom - h + 1
    y0, y1 = max(top, 0), min(top + h, height)
    x0, x1 = max(left, 0), min(left + w, width)
    if y1 > y0 and x1 > x0:
        canvas[y0:y1, x0:x1] = sprite[y0 - top:y1 - top, x0 - left:x1 - left]
    return canvas


def check_scene_spec(spec: SceneSpec) -> tuple[ClassCatalog, tuple[BandSpan, ...], dict[str, int]]:
    """Resolve a spec against its catalog: (catalog, band spans, class id per placed name).

    Raises SpecError with the offending field path.
    """
    catalog = get_catalog(spec.catalog)
    spans = band_spans(spec, catalog)
    class_ids = {}
    for name, count in spec.instance_counts.items():
        if not count:
            continue
        try:
            class_ids[name] = catalog.id_of(name)
            catalog.require_foreground(class_ids[name])
        except ValueError as e:
            raise SpecError(str(e), field_path=f"instance_counts.{name}") from e
    return catalog, spans, class_ids


def generate_scene(spec: SceneSpec, seed: Optional[int] = None, index: int = 0) -> Scene:
    catalog, spans, class_ids = check_scene_spec(spec)
    by_band = {catalog.name_of(s.class_id): s for s in spans}
    width, height = spec.width, spec.height
    rng = make_rng(spec.seed if seed is None else seed, index, STREAM_SCENE)

    gt = np.empty((height, width), dtype=np.uint8)
    for span in spans:
        gt[span.top:span.bottom] = span.class_id
    instance_map = np.zeros((height, width), dtype=np.int32)

    placements = [name for name, count in spec.instance_counts.items() for _ in range(count)]

    placed = []
    for order, pos in enumerate(rng.permutation(len(placements)), start=1):
        name = placements[pos]
        placed.append(class_ids[name])
        library = spec.shape_library[name]
        sprite = rasterize(library[rng.integers(len(library))], rng)
        band = by_band[spec.anchors.get(name, spec.anchor_default)]
        bottom = int(rng.integers(band.top, band.bottom))
        left = int(rng.integers(0, max(width - sprite.shape[1], 0) + 1))
        mask = stamp(sprite, left, bottom, width, height)
        instance_map[mask] = order
        gt[mask] = class_ids[name]

    instances = []
    for order, class_id in enumerate(placed, start=1):
        visible = instance_map == order
        if not visible.any():
            log.debug("instance %d is fully occluded", order)
        instances.append(GroundTruthInstance(order, InstanceSegment(BinaryMask.from_array(visible), class_id, 1.0)))

    instance_map.setflags(write=False)
    return Scene(catalog, LabelMap(gt), tuple(instances), instance_map, spans)
