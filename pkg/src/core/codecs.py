"""On-disk formats: 8-bit label PNGs, .pvol probability volumes and JSON segment manifests."""

import json
import os
import struct
import tempfile
from pathlib import Path
from typing import Any, Union

import cv2
import numpy as np
from tenacity import retry, retry_if_exception_type, stop_after_attempt, wait_exponential

from src.config import settings
from src.core.catalog import ClassCatalog
from src.core.errors import CatalogError, CorruptionError
from src.core.models import InstanceSegment, LabelMap, ProbVolume
from src.core.rle import BinaryMask
from src.core.schemas import SegmentManifest, SegmentRecord, validate_model

PathLike = Union[str, Path]

PVOL_MAGIC = b"PVOL"
PVOL_HEADER = struct.Struct("<4sIII")  # magic, width, height, channels


# --- atomic writes ---
@retry(
    stop=stop_after_attempt(settings.WRITE_RETRY_ATTEMPTS),
    wait=wait_exponential(multiplier=0.1, min=0.1, max=2),
    retry=retry_if_exception_type(PermissionError),
    reraise=True,
)
def atomic_write_bytes(path: PathLike, payload: bytes) -> None:
    """Write to a temp file in the target directory, then rename over the target."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json(path: PathLike, payload: Any) -> None:
    # sorted keys + fixed indent so reruns are byte-identical
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    atomic_write_bytes(path, text.encode("utf-8"))


def read_json(path: PathLike) -> Any:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise CorruptionError(f"{path}: invalid JSON ({e})") from e


# --- label maps ---
def encode_label_png(labels: LabelMap) -> bytes:
    ok, buf = cv2.imencode(".png", labels.data)
    if not ok:
        raise CorruptionError("PNG encoder refused the label map")
    return buf.tobytes()


def write_label_png(path: PathLike, labels: LabelMap) -> None:
    atomic_write_bytes(path, encode_label_png(labels))


def read_label_png(path: PathLike, catalog: ClassCatalog | None = None) -> LabelMap:
    """Load a single-channel 8-bit PNG; when a catalog is given, every value must belong to it."""
    raw = np.fromfile(str(path), dtype=np.uint8)
    image = cv2.imdecode(raw, cv2.IMREAD_UNCHANGED) if raw.size else None
    if image is None:
        raise CorruptionError(f"{path}: not a readable PNG")
    if image.ndim != 2 or image.dtype != np.uint8:
        raise CorruptionError(f"{path}: expected an 8-bit single-channel label PNG, got {image.dtype} {image.shape}")
    labels = LabelMap(image)
    if catalog is not None:
        labels.validate(catalog)
    return labels


# --- probability volumes ---
def encode_pvol(probs: ProbVolume) -> bytes:
    header = PVOL_HEADER.pack(PVOL_MAGIC, probs.width, probs.height, probs.channels)
    return header + probs.data.astype("<f4").tobytes(order="C")


def write_pvol(path: PathLike, probs: ProbVolume) -> None:
    atomic_write_bytes(path, encode_pvol(probs))


def decode_pvol(payload: bytes, source: str = "<bytes>") -> ProbVolume:
    if len(payload) < PVOL_HEADER.size:
        raise CorruptionError(f"{source}: truncated .pvol header")
    magic, width, height, channels = PVOL_HEADER.unpack_from(payload)
    if magic != PVOL_MAGIC:
        raise CorruptionError(f"{source}: bad magic {magic!r}")
    expected = width * height * channels * 4
    body = payload[PVOL_HEADER.size:]
    if len(body) != expected:
        raise CorruptionError(f"{source}: payload is {len(body)} bytes, header says {expected}")
    data = np.frombuffer(body, dtype="<f4").reshape(height, width, channels)
    try:
        return ProbVolume(data, tolerance=settings.PVOL_TOLERANCE)
    except ValueError as e:
        raise CorruptionError(f"{source}: {e}") from e


def read_pvol(path: PathLike) -> ProbVolume:
    return decode_pvol(Path(path).read_bytes(), source=str(path))


def read_semantic(path: PathLike, catalog: ClassCatalog) -> LabelMap | ProbVolume:
    """Dense semantic prediction: a .pvol volume or an already-argmaxed .png label map."""
    path = Path(path)
    if path.suffix == ".pvol":
        probs = read_pvol(path)
        if probs.channels != catalog.size:
            raise CatalogError(f"{path}: {probs.channels} channels, catalog '{catalog.name}' has {catalog.size}")
        return probs
    return read_label_png(path, catalog)


# --- segment manifests ---
def segments_to_json(image_id: str, width: int, height: int, segments: list[InstanceSegment]) -> dict:
    manifest = SegmentManifest(
        image_id=image_id,
        width=width,
        height=height,
        segments=[
            SegmentRecord(class_id=s.class_id, score=round(float(s.score), 6), rle=list(s.mask.runs))
            for s in segments
        ],
    )
    return manifest.model_dump()


def write_segments(path: PathLike, image_id: str, width: int, height: int, segments: list[InstanceSegment]) -> None:
    write_json(path, segments_to_json(image_id, width, height, segments))


def read_segments(path: PathLike) -> tuple[SegmentManifest, list[InstanceSegment]]:
    manifest = validate_model(SegmentManifest, read_json(path), source=str(path))
    segments = []
    for index, record in enumerate(manifest.segments):
        mask = BinaryMask(manifest.width, manifest.height, tuple(record.rle))
        try:
            mask.validate()
        except CorruptionError as e:
            raise CorruptionError(f"{path}: segment {index}: {e}") from e
        segments.append(InstanceSegment(mask=mask, class_id=record.class_id, score=record.score))
    return manifest, segments
