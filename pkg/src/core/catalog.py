"""Class catalogs: which ids exist, what they are called, and whether they are
things (foreground, detected as instances) or stuff (background, segmented)."""

import enum
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

from src.core.errors import CatalogError, ClassRoleError
from src.core.schemas import CatalogFile, load_yaml_model

IGNORE_ID = 255


class ClassRole(str, enum.Enum):
    FOREGROUND = "foreground"
    BACKGROUND = "background"


@dataclass(frozen=True)
class ClassEntry:
    class_id: int
    name: str
    role: ClassRole


@dataclass(frozen=True)
class ClassCatalog:
    name: str
    entries: tuple[ClassEntry, ...]
    ignore_id: int = IGNORE_ID

    def __post_init__(self):
        ids = [e.class_id for e in self.entries]
        if len(set(ids)) != len(ids):
            dupes = sorted({i for i in ids if ids.count(i) > 1})
            raise CatalogError(f"catalog '{self.name}': duplicate class ids {dupes}")
        names = [e.name for e in self.entries]
        if len(set(names)) != len(names):
            raise CatalogError(f"catalog '{self.name}': duplicate class names")
        # Label maps are 8-bit rasters
        for value in ids + [self.ignore_id]:
            if not 0 <= value <= 255:
                raise CatalogError(f"catalog '{self.name}': id {value} outside 0..255")
        if self.ignore_id in ids:
            raise CatalogError(f"catalog '{self.name}': ignore id {self.ignore_id} collides with a class id")

    # --- lookups ---
    @property
    def size(self) -> int:
        return len(self.entries)

    @cached_property
    def class_ids(self) -> tuple[int, ...]:
        return tuple(e.class_id for e in self.entries)

    @cached_property
    def foreground_ids(self) -> frozenset[int]:
        return frozenset(e.class_id for e in self.entries if e.role is ClassRole.FOREGROUND)

    @cached_property
    def background_ids(self) -> frozenset[int]:
        return frozenset(e.class_id for e in self.entries if e.role is ClassRole.BACKGROUND)

    @cached_property
    def index_lut(self) -> np.ndarray:
        """256-entry table: label value -> entry index, -1 for unknown values (incl. ignore)."""
        lut = np.full(256, -1, dtype=np.int16)
        for index, entry in enumerate(self.entries):
            lut[entry.class_id] = index
        lut.setflags(write=False)
        return lut

    @cached_property
    def foreground_lut(self) -> np.ndarray:
        """256-entry boolean table: True where the value is a foreground class."""
        lut = np.zeros(256, dtype=bool)
        lut[list(self.foreground_ids)] = True
        lut.setflags(write=False)
        return lut

    @cached_property
    def _by_name(self) -> dict[str, ClassEntry]:
        return {e.name: e for e in self.entries}

    @cached_property
    def _by_id(self) -> dict[int, ClassEntry]:
        return {e.class_id: e for e in self.entries}

    def entry(self, class_id: int) -> ClassEntry:
        try:
            return self._by_id[class_id]
        except KeyError:
            raise CatalogError(f"catalog '{self.name}' has no class id {class_id}") from None

    def id_of(self, name: str) -> int:
        try:
            return self._by_name[name].class_id
        except KeyError:
            raise CatalogError(f"catalog '{self.name}' has no class named '{name}'") from None

    def name_of(self, class_id: int) -> str:
        return self.entry(class_id).name

    def is_foreground(self, class_id: int) -> bool:
        return class_id in self.foreground_ids

    def resolve(self, key: int | str) -> int:
        """Class id from either an id or a name ('3' counts as an id)."""
        if isinstance(key, int) or (isinstance(key, str) and key.isdigit()):
            class_id = int(key)
            self.entry(class_id)
            return class_id
        return self.id_of(key)

    # --- checks ---
    def require_fusion_capable(self) -> None:
        if not self.foreground_ids or not self.background_ids:
            raise CatalogError(f"catalog '{self.name}' needs at least one foreground and one background class")

    def require_foreground(self, class_id: int) -> None:
        if self.entry(class_id).role is not ClassRole.FOREGROUND:
            raise ClassRoleError(f"class '{self.name_of(class_id)}' ({class_id}) is background, not a detectable thing")

    def check_labels(self, data: np.ndarray, allow_ignore: bool = True) -> None:
        """Raise CatalogError if any value is neither a class id nor (optionally) ignore."""
        valid = self.index_lut[data] >= 0
        if allow_ignore:
            valid |= data == self.ignore_id
        if not valid.all():
            bad = sorted(int(v) for v in np.unique(data[~valid]))
            raise CatalogError(f"values {bad} are not in catalog '{self.name}'")


def _catalog(name, classes, foreground):
    entries = tuple(
        ClassEntry(i, n, ClassRole.FOREGROUND if n in foreground else ClassRole.BACKGROUND)
        for i, n in classes
    )
    return ClassCatalog(name=name, entries=entries)


_CITYSCAPES_NAMES = [
    "road", "sidewalk", "building", "wall", "fence", "pole", "traffic light", "traffic sign",
    "vegetation", "terrain", "sky", "person", "rider", "car", "truck", "bus", "train",
    "motorcycle", "bicycle",
]
_CITYSCAPES_THINGS = {
    "traffic light", "traffic sign", "person", "rider", "car", "truck", "bus", "train",
    "motorcycle", "bicycle",
}

# Train-id order (road=0 ... bicycle=18)
CITYSCAPES_19 = _catalog("cityscapes19", list(enumerate(_CITYSCAPES_NAMES)), _CITYSCAPES_THINGS)

# The 11-class CamVid subset, ids follow the usual results-table column order
CAMVID_11 = _catalog(
    "camvid11",
    list(enumerate([
        "building", "vegetation", "sky", "car", "sign", "road", "pedestrian", "fence", "pole",
        "sidewalk", "cyclist",
    ])),
    {"car", "sign", "pedestrian", "cyclist"},
)

# VIPER-style labels: no wall/rider, pole folded into 'infrastructure'
VIPER = _catalog(
    "viper",
    [(i, n) for i, n in enumerate(_CITYSCAPES_NAMES) if n not in {"wall", "pole", "rider"}]
    + [(19, "infrastructure")],
    _CITYSCAPES_THINGS,
)

BUNDLED_CATALOGS = {c.name: c for c in (CITYSCAPES_19, CAMVID_11, VIPER)}


def load_catalog_file(path: str | Path) -> ClassCatalog:
    spec = load_yaml_model(CatalogFile, path)
    entries = tuple(ClassEntry(c.id, c.name, ClassRole(c.role)) for c in spec.classes)
    return ClassCatalog(name=spec.name, entries=entries, ignore_id=spec.ignore_id)


def get_catalog(spec: str) -> ClassCatalog:
    """Resolve 'cityscapes19', 'camvid11', 'viper' or 'custom:<path>'."""
    if spec.startswith("custom:"):
        return load_catalog_file(spec[len("custom:"):])
    try:
        return BUNDLED_CATALOGS[spec]
    except KeyError:
        raise CatalogError(
            f"unknown catalog '{spec}' (bundled: {', '.join(BUNDLED_CATALOGS)}; or custom:<path>)"
        ) from None
