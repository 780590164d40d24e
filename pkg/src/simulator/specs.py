from pathlib import Path
from typing import Literal, Optional, Union

from pydantic import Field, NonNegativeInt, model_validator

from src.core.errors import SpecError
from src.core.schemas import StrictModel, load_yaml_model, validate_model
from src.simulator.presets import CORRUPTION_PRESETS, SCENE_PRESETS
from src.simulator.rng import MAX_SEED


# --- Scene layout ---
class Part(StrictModel):
    """One primitive of a silhouette, in fractions of the template box."""

    kind: Literal["rect", "disc"]
    x: float = Field(default=0.0, ge=0.0, le=1.0)
    y: float = Field(default=0.0, ge=0.0, le=1.0)
    w: float = Field(default=1.0, gt=0.0, le=1.0)
    h: float = Field(default=1.0, gt=0.0, le=1.0)


class Silhouette(StrictModel):
    """Parametric object template: a union of parts drawn in a width x height box."""

    width: int = Field(gt=0)
    height: int = Field(gt=0)
    parts: list[Part] = Field(min_length=1)
    scale: tuple[float, float] = (1.0, 1.0)
    aspect: tuple[float, float] = (1.0, 1.0)

    @model_validator(mode="after")
    def _ranges(self):
        for name in ("scale", "aspect"):
            lo, hi = getattr(self, name)
            if not 0 < lo <= hi:
                raise ValueError(f"{name} range must satisfy 0 < low <= high, got {(lo, hi)}")
        return self


class Band(StrictModel):
    class_name: str
    fraction: float = Field(gt=0.0, le=1.0)


class SceneSpec(StrictModel):
    catalog: str = "cityscapes19"
    width: int = Field(gt=0)
    height: int = Field(gt=0)
    bands: list[Band] = Field(min_length=1)  # top to bottom
    instance_counts: dict[str, NonNegativeInt] = {}
    shape_library: dict[str, list[Silhouette]] = {}
    # class -> band the object stands in; defaults to the bottom band
    anchors: dict[str, str] = {}
    seed: int = Field(default=0, ge=0, le=MAX_SEED)

    @model_validator(mode="after")
    def _consistent(self):
        total = sum(b.fraction for b in self.bands)
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"band fractions sum to {total}, expected 1")
        for name, count in self.instance_counts.items():
            if count and not self.shape_library.get(name):
                raise ValueError(f"class '{name}' has instances but no shape templates")
        band_names = {b.class_name for b in self.bands}
        for name, band in self.anchors.items():
            if band not in band_names:
                raise ValueError(f"anchor band '{band}' for '{name}' is not in the band layout")
        return self

    @property
    def anchor_default(self) -> str:
        return self.bands[-1].class_name


# --- Prediction corruption ---
class SemanticCorruption(StrictModel):
    # probability of relabeling a whole object; one value for all classes or per class name
    fg_confusion: Union[float, dict[str, float]] = 0.0
    boundary_jitter: NonNegativeInt = 0
    bg_noise: float = Field(default=0.0, ge=0.0, le=1.0)
    # class name -> confusable class names; None uses the built-in table
    confusion_table: Optional[dict[str, list[str]]] = None

    @model_validator(mode="after")
    def _probabilities(self):
        values = self.fg_confusion.values() if isinstance(self.fg_confusion, dict) else [self.fg_confusion]
        if any(not 0.0 <= v <= 1.0 for v in values):
            raise ValueError("fg_confusion probabilities must be in [0, 1]")
        return self

    def confusion_for(self, class_name: str) -> float:
        if isinstance(self.fg_confusion, dict):
            return self.fg_confusion.get(class_name, 0.0)
        return self.fg_confusion


class InstanceCorruption(StrictModel):
    miss_rate: float = Field(default=0.0, ge=0.0, le=1.0)
    spurious_rate: float = Field(default=0.0, ge=0.0)  # expected false segments per image
    mask_jitter: NonNegativeInt = 0
    score_noise: float = Field(default=0.0, ge=0.0)  # sigma of the score model
    spurious_score_max: float = Field(default=0.3, ge=0.0, le=1.0)


class CorruptionSpec(StrictModel):
    semantic: SemanticCorruption = SemanticCorruption()
    instance: InstanceCorruption = InstanceCorruption()


def load_scene_spec(ref: Union[str, Path]) -> SceneSpec:
    """'preset:<name>' or a YAML path."""
    ref = str(ref)
    if ref.startswith("preset:"):
        return validate_model(SceneSpec, _preset(SCENE_PRESETS, ref), source=ref)
    return load_yaml_model(SceneSpec, ref)


def load_corruption_spec(ref: Union[str, Path]) -> CorruptionSpec:
    ref = str(ref)
    if ref.startswith("preset:"):
        return validate_model(CorruptionSpec, _preset(CORRUPTION_PRESETS, ref), source=ref)
    return load_yaml_model(CorruptionSpec, ref)


def _preset(registry, ref: str) -> dict:
    name = ref[len("preset:"):]
    if name not in registry:
        raise SpecError(f"unknown preset '{name}' (available: {', '.join(sorted(registry))})")
    return registry[name]()
