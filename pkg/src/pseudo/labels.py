"""Pseudo ground truth for self-training on unlabeled images.

Same as the fused map, except that holes where the semantic network
predicted a thing class become ignore: those predictions are the least
trustworthy part of the fused output.
"""

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from src.core.catalog import ClassCatalog
from src.core.models import InstanceSegment, LabelMap, ProbVolume, check_dims
from src.core.schemas import PseudoSidecar
from src.fusion.combine import ForegroundMap, FusionPolicy, resolve_instances, semantic_labels


@dataclass(frozen=True)
class PseudoStats:
    fg_assigned: int  # pixels labeled by a retained instance segment
    bg_filled: int  # holes filled with a background semantic label
    ignored: int  # holes where the semantic label was a thing class

    @property
    def total(self) -> int:
        return self.fg_assigned + self.bg_filled + self.ignored

    @property
    def ignore_fraction(self) -> float:
        return self.ignored / self.total if self.total else 0.0

    @property
    def fg_fraction(self) -> float:
        return self.fg_assigned / self.total if self.total else 0.0

    def sidecar(self, image_id: str) -> dict:
        return PseudoSidecar(
            image_id=image_id,
            ignore_fraction=round(self.ignore_fraction, 6),
            fg_fraction=round(self.fg_fraction, 6),
        ).model_dump()


def make_pseudo_gt(fg: ForegroundMap, semantic: LabelMap, catalog: ClassCatalog) -> LabelMap:
    check_dims("semantic map", semantic.dims, fg.dims)
    semantic.validate(catalog, allow_ignore=False)
    holes = fg.holes
    unreliable = holes & catalog.foreground_lut[semantic.data]
    out = np.where(holes, semantic.data, fg.labels.data)
    out[unreliable] = catalog.ignore_id
    return LabelMap(out)


def pseudo_stats(fg: ForegroundMap, pseudo: LabelMap, ignore_id: int) -> PseudoStats:
    holes = fg.holes
    ignored = int((holes & (pseudo.data == ignore_id)).sum())
    return PseudoStats(
        fg_assigned=int((~holes).sum()),
        bg_filled=int(holes.sum()) - ignored,
        ignored=ignored,
    )


def build_pseudo_gt(
    segments: Sequence[InstanceSegment],
    semantic_source: Union[ProbVolume, LabelMap],
    catalog: ClassCatalog,
    policy: FusionPolicy = FusionPolicy(),
) -> tuple[LabelMap, ForegroundMap, PseudoStats]:
    """Resolve segments and emit pseudo-GT with one shared policy."""
    semantic = semantic_labels(semantic_source, catalog)
    fg = resolve_instances(segments, semantic.dims, catalog, policy)
    pseudo = make_pseudo_gt(fg, semantic, catalog)
    return pseudo, fg, pseudo_stats(fg, pseudo, catalog.ignore_id)
