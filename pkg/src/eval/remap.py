"""Single-pass label remapping between catalogs (e.g. VIPER 'infrastructure' scored as 'pole')."""

from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Optional

import numpy as np

from src.core.catalog import ClassCatalog, get_catalog
from src.core.errors import CatalogError
from src.core.models import LabelMap
from src.core.schemas import RemapFile, load_yaml_model, validate_model

IGNORE_KEYWORD = "ignore"


def remap_labels(pred: LabelMap, mapping: Mapping[int, int], target: Optional[ClassCatalog] = None) -> LabelMap:
    """Substitute each mapped value once; values not in the mapping pass through."""
    if target is not None:
        allowed = set(target.class_ids) | {target.ignore_id}
        unknown = sorted(v for v in mapping.values() if v not in allowed)
        if unknown:
            raise CatalogError(f"remap targets {unknown} are not in catalog '{target.name}'")
    lut = np.arange(256, dtype=np.uint8)
    for src, dst in mapping.items():
        if not (0 <= src <= 255 and 0 <= dst <= 255):
            raise CatalogError(f"remap entry {src}->{dst} does not fit 8-bit labels")
        lut[src] = dst
    return LabelMap(lut[pred.data])


@dataclass(frozen=True)
class RemapTable:
    source: ClassCatalog
    target: ClassCatalog
    mapping: dict[int, int] = field(default_factory=dict)

    def __post_init__(self):
        stray = sorted(k for k in self.mapping if k not in self.source.class_ids)
        if stray:
            raise CatalogError(f"remap sources {stray} are not in catalog '{self.source.name}'")

    def apply(self, pred: LabelMap) -> LabelMap:
        return remap_labels(pred, self.mapping, self.target)

    @classmethod
    def from_spec(cls, spec: RemapFile) -> "RemapTable":
        source, target = get_catalog(spec.source), get_catalog(spec.target)
        mapping = {}
        for key, value in spec.mapping.items():
            dst = target.ignore_id if value == IGNORE_KEYWORD else target.resolve(value)
            mapping[source.resolve(key)] = dst
        return cls(source, target, mapping)


BUNDLED_REMAPS = {
    # Broader VIPER class scored as its dominant Cityscapes member
    "viper_to_cityscapes": {"source": "viper", "target": "cityscapes19", "mapping": {"infrastructure": "pole"}},
}


def load_remap(spec: str | Path) -> RemapTable:
    """Bundled table name or path to a YAML remap file."""
    if str(spec) in BUNDLED_REMAPS:
        return RemapTable.from_spec(validate_model(RemapFile, BUNDLED_REMAPS[str(spec)]))
    return RemapTable.from_spec(load_yaml_model(RemapFile, spec))
