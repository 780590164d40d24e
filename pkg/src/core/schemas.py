from pathlib import Path
from typing import Literal, Optional, Type, TypeVar, Union

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from src.core.errors import SpecError

M = TypeVar("M", bound=BaseModel)


class StrictModel(BaseModel):
    # Every on-disk format rejects keys it does not know
    model_config = ConfigDict(extra="forbid")


# --- Segment manifests (one JSON file per image) ---
class SegmentRecord(StrictModel):
    class_id: int = Field(ge=0, le=255)
    score: float = Field(ge=0.0, le=1.0)
    rle: list[int]  # column-major runs, zeros-run first


class SegmentManifest(StrictModel):
    image_id: str
    width: int = Field(ge=0)
    height: int = Field(ge=0)
    segments: list[SegmentRecord] = []


# --- Custom catalogs (YAML) ---
class CatalogClass(StrictModel):
    id: int = Field(ge=0, le=255)
    name: str
    role: Literal["foreground", "background"]


class CatalogFile(StrictModel):
    name: str
    ignore_id: int = Field(default=255, ge=0, le=255)
    classes: list[CatalogClass]


# --- Remap tables (YAML) ---
class RemapFile(StrictModel):
    source: str
    target: str
    # keys/values are class names or ids; a value may also be the literal "ignore"
    mapping: dict[Union[int, str], Union[int, str]] = {}


# --- Pseudo-GT sidecar ---
class PseudoSidecar(StrictModel):
    image_id: str
    ignore_fraction: float
    fg_fraction: float


# --- Dataset manifest ---
class ManifestEntry(StrictModel):
    image_id: str
    gt_path: Optional[str] = None
    semantic_path: str
    segments_path: Optional[str] = None
    # Ground-truth instance counts per class name (written by the simulator)
    instance_counts: dict[str, int] = {}


class ManifestFile(StrictModel):
    catalog: str
    entries: list[ManifestEntry] = []


def field_path(err: ValidationError) -> str:
    """Dotted location of the first validation error, e.g. 'instance.miss_rate'."""
    first = err.errors()[0]
    return ".".join(str(part) for part in first["loc"]) or "<root>"


def validate_model(model: Type[M], data: object, source: str = "") -> M:
    try:
        return model.model_validate(data)
    except ValidationError as e:
        first = e.errors()[0]
        where = f"{source}: " if source else ""
        raise SpecError(f"{where}{first['msg']}", field_path=field_path(e)) from e


def load_yaml_model(model: Type[M], path: Union[str, Path]) -> M:
    """Parse a YAML (or JSON) file and validate it against a strict pydantic model."""
    path = Path(path)
    if not path.is_file():
        raise SpecError(f"{path}: file not found")
    try:
        data = yaml.safe_load(path.read_text(encoding="utf-8"))
    except yaml.YAMLError as e:
        raise SpecError(f"{path}: not valid YAML ({e})") from e
    return validate_model(model, data if data is not None else {}, source=str(path))
