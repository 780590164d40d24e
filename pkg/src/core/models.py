from dataclasses import dataclass

import numpy as np

from src.config import settings
from src.core.catalog import ClassCatalog
from src.core.errors import CatalogError, SizeError
from src.core.rle import BinaryMask


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, copy=True)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class LabelMap:
    """H x W raster of class ids (or the catalog's ignore id), stored as uint8."""

    data: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data)
        if data.ndim != 2:
            raise SizeError(f"label map must be 2-D, got shape {data.shape}")
        if data.dtype != np.uint8:
            if data.size and (data.min() < 0 or data.max() > 255):
                raise CatalogError("label values must fit in 8 bits")
            data = data.astype(np.uint8)
        object.__setattr__(self, "data", _frozen(data))

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def dims(self) -> tuple[int, int]:
        return self.width, self.height

    @classmethod
    def from_flat(cls, values, width: int, height: int) -> "LabelMap":
        """Build from a row-major value list."""
        values = np.asarray(values)
        if values.size != width * height:
            raise SizeError(f"got {values.size} values for a {width}x{height} map")
        return cls(values.reshape(height, width))

    @classmethod
    def filled(cls, value: int, width: int, height: int) -> "LabelMap":
        return cls(np.full((height, width), value, dtype=np.uint8))

    def validate(self, catalog: ClassCatalog, allow_ignore: bool = True) -> "LabelMap":
        catalog.check_labels(self.data, allow_ignore=allow_ignore)
        return self

    def __eq__(self, other) -> bool:
        return isinstance(other, LabelMap) and np.array_equal(self.data, other.data)

    __hash__ = None


@dataclass(frozen=True)
class InstanceSegment:
    """One detected object: visible mask, foreground class and confidence."""

    mask: BinaryMask
    class_id: int
    score: float

    def __post_init__(self):
        if not 0.0 <= self.score <= 1.0:
            raise ValueError(f"segment score {self.score} outside [0, 1]")

    @property
    def dims(self) -> tuple[int, int]:
        return self.mask.width, self.mask.height


@dataclass(frozen=True, eq=False)
class ProbVolume:
    """H x W x C per-pixel class probabilities; channel k is catalog entry k."""

    data: np.ndarray
    tolerance: float = settings.PROB_TOLERANCE

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.float64)
        if data.ndim != 3:
            raise SizeError(f"probability volume must be H x W x C, got shape {data.shape}")
        if not np.isfinite(data).all():
            raise ValueError("non-finite probabilities")
        if (data < 0).any():
            raise ValueError("negative probabilities")
        sums = data.sum(axis=2)
        worst = float(np.abs(sums - 1.0).max()) if sums.size else 0.0
        if worst > self.tolerance:
            raise ValueError(f"pixel probabilities do not sum to 1 (max deviation {worst:.2e})")
        object.__setattr__(self, "data", _frozen(data))

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return self.data.shape[2]

    @property
    def dims(self) -> tuple[int, int]:
        return self.width, self.height


def argmax_labels(probs: ProbVolume, catalog: ClassCatalog) -> LabelMap:
    """Most probable class per pixel; ties go to the lowest class id."""
    if probs.channels != catalog.size:
        raise CatalogError(f"volume has {probs.channels} channels, catalog '{catalog.name}' has {catalog.size} classes")
    ids = np.asarray(catalog.class_ids)
    # np.argmax keeps the first maximum, so order channels by ascending id
    order = np.argsort(ids, kind="stable")
    winner = np.argmax(probs.data[:, :, order], axis=2)
    return LabelMap(ids[order][winner].astype(np.uint8))


def check_dims(name: str, dims: tuple[int, int], expected: tuple[int, int]) -> None:
    """Raise SizeError unless (width, height) pairs match."""
    if tuple(dims) != tuple(expected):
        raise SizeError(f"{name} is {dims[0]}x{dims[1]}, expected {expected[0]}x{expected[1]}")
