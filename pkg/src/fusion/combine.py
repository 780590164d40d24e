"""Detection-first semantic fusion.

Instance segments are pasted in descending confidence, each one losing the
pixels already claimed by a more confident segment. Whatever no segment
claims is a hole, and holes take the dense semantic prediction.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from src.core.catalog import ClassCatalog
from src.core.errors import CatalogError, SpecError
from src.core.models import InstanceSegment, LabelMap, ProbVolume, argmax_labels, check_dims

log = logging.getLogger(__name__)

NO_SEGMENT = -1


@dataclass(frozen=True)
class FusionPolicy:
    """Optional segment filters. Both are off by default: every segment and
    every non-overlapping remainder is used."""

    score_threshold: Optional[float] = None
    min_remaining_fraction: Optional[float] = None

    def __post_init__(self):
        for name in ("score_threshold", "min_remaining_fraction"):
            value = getattr(self, name)
            if value is not None and not 0.0 <= value <= 1.0:
                raise SpecError(f"must be in [0, 1], got {value}", field_path=name)


@dataclass(frozen=True, eq=False)
class ForegroundMap:
    """Instance-only labeling. Unclaimed pixels carry the ignore id."""

    labels: LabelMap
    provenance: np.ndarray  # index of the winning segment per pixel, NO_SEGMENT for holes
    kept: tuple[int, ...] = ()
    dropped: tuple[int, ...] = ()  # failed min_remaining_fraction
    skipped: tuple[int, ...] = ()  # below score_threshold or empty mask

    @property
    def dims(self) -> tuple[int, int]:
        return self.labels.dims

    @property
    def holes(self) -> np.ndarray:
        return self.provenance == NO_SEGMENT

    @property
    def hole_fraction(self) -> float:
        holes = self.holes
        return float(holes.mean()) if holes.size else 0.0

    def surviving_pixels(self, index: int) -> int:
        return int((self.provenance == index).sum())


def resolve_instances(
    segments: Sequence[InstanceSegment],
    dims: tuple[int, int],
    catalog: ClassCatalog,
    policy: FusionPolicy = FusionPolicy(),
) -> ForegroundMap:
    width, height = dims
    catalog.require_fusion_capable()
    for index, segment in enumerate(segments):
        check_dims(f"segment {index} mask", segment.dims, dims)
        catalog.require_foreground(segment.class_id)

    # sorted() is stable: equal scores keep manifest order
    order = sorted(range(len(segments)), key=lambda i: -segments[i].score)

    labels = np.full((height, width), catalog.ignore_id, dtype=np.uint8)
    provenance = np.full((height, width), NO_SEGMENT, dtype=np.int32)
    claimed = np.zeros((height, width), dtype=bool)
    kept, dropped, skipped = [], [], []

    for index in order:
        segment = segments[index]
        if policy.score_threshold is not None and segment.score < policy.score_threshold:
            skipped.append(index)
            continue

        pixels = segment.mask.to_array()
        area = int(pixels.sum())
        if area == 0:
            log.warning("segment %d (%s) has an empty mask, skipping", index, catalog.name_of(segment.class_id))
            skipped.append(index)
            continue

        free = pixels & ~claimed
        if policy.min_remaining_fraction is not None:
            if int(free.sum()) / area < policy.min_remaining_fraction:
                dropped.append(index)
                continue

        labels[free] = segment.class_id
        provenance[free] = index
        claimed |= free
        kept.append(index)

    provenance.setflags(write=False)
    return ForegroundMap(
        labels=LabelMap(labels),
        provenance=provenance,
        kept=tuple(kept),
        dropped=tuple(dropped),
        skipped=tuple(skipped),
    )


def fill_holes(fg: ForegroundMap, semantic: LabelMap, ignore_id: Optional[int] = None) -> LabelMap:
    """Claimed pixels keep their instance label; holes copy the semantic label."""
    check_dims("semantic map", semantic.dims, fg.dims)
    holes = fg.holes
    if ignore_id is not None and (semantic.data[holes] == ignore_id).any():
        raise CatalogError("semantic map has ignore pixels inside holes; it cannot fill them")
    return LabelMap(np.where(holes, semantic.data, fg.labels.data))


def semantic_labels(source: Union[ProbVolume, LabelMap], catalog: ClassCatalog) -> LabelMap:
    """Reduce a dense prediction to labels and check it against the catalog."""
    if isinstance(source, ProbVolume):
        return argmax_labels(source, catalog)
    return source.validate(catalog, allow_ignore=False)


def fuse(
    segments: Sequence[InstanceSegment],
    semantic_source: Union[ProbVolume, LabelMap],
    catalog: ClassCatalog,
    policy: FusionPolicy = FusionPolicy(),
) -> tuple[LabelMap, ForegroundMap]:
    semantic = semantic_labels(semantic_source, catalog)
    fg = resolve_instances(segments, semantic.dims, catalog, policy)
    return fill_holes(fg, semantic, catalog.ignore_id), fg
