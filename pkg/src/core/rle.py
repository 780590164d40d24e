"""Uncompressed run-length encoding for binary instance masks.

Runs are counted in column-major pixel order and alternate zeros/ones,
always starting with a (possibly empty) zeros-run.
"""

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from src.core.errors import CorruptionError, SizeError


@dataclass(frozen=True)
class BinaryMask:
    width: int
    height: int
    runs: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "runs", tuple(int(r) for r in self.runs))

    @property
    def area(self) -> int:
        """Number of set pixels."""
        return int(sum(self.runs[1::2]))

    def validate(self) -> None:
        if any(r < 0 for r in self.runs):
            raise CorruptionError("negative run length")
        if any(r == 0 for r in self.runs[1:]):
            raise CorruptionError("zero-length interior run")
        total = sum(self.runs)
        if total != self.width * self.height:
            raise CorruptionError(
                f"runs sum to {total}, expected {self.width}x{self.height}={self.width * self.height}"
            )

    def to_array(self) -> np.ndarray:
        """(height, width) boolean raster."""
        flat = rle_decode(self).astype(bool)
        return flat.reshape(self.width, self.height).T

    @classmethod
    def from_array(cls, pixels: np.ndarray) -> "BinaryMask":
        pixels = np.asarray(pixels)
        if pixels.ndim != 2:
            raise SizeError(f"mask must be 2-D, got shape {pixels.shape}")
        height, width = pixels.shape
        return rle_encode(pixels.ravel(order="F"), width, height)


def rle_encode(mask_pixels: Sequence[int] | np.ndarray, width: int, height: int) -> BinaryMask:
    bits = np.asarray(mask_pixels).ravel().astype(bool)
    if bits.size != width * height:
        raise SizeError(f"got {bits.size} pixels for a {width}x{height} mask")
    if bits.size == 0:
        return BinaryMask(width, height, (0,))

    change = np.flatnonzero(bits[1:] != bits[:-1]) + 1
    bounds = np.concatenate(([0], change, [bits.size]))
    runs = np.diff(bounds).tolist()
    if bits[0]:
        runs.insert(0, 0)
    return BinaryMask(width, height, tuple(int(r) for r in runs))


def rle_decode(mask: BinaryMask) -> np.ndarray:
    """Column-major uint8 bit vector of length width*height."""
    mask.validate()
    values = np.zeros(len(mask.runs), dtype=np.uint8)
    values[1::2] = 1
    return np.repeat(values, mask.runs)
