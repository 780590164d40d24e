from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

from src.core.codecs import read_json, write_json
from src.core.errors import ManifestError
from src.core.schemas import ManifestEntry, ManifestFile, validate_model


@dataclass(frozen=True)
class DatasetEntry:
    image_id: str
    semantic_path: Path
    segments_path: Optional[Path] = None
    gt_path: Optional[Path] = None
    instance_counts: Optional[dict[str, int]] = None


@dataclass(frozen=True)
class DatasetManifest:
    """Image entries of a dataset; relative paths resolve against the manifest's directory."""

    root: Path
    catalog_name: str
    entries: tuple[DatasetEntry, ...]

    def require_gt(self) -> None:
        missing = [e.image_id for e in self.entries if e.gt_path is None]
        if missing:
            raise ManifestError(f"entries without gt_path: {', '.join(missing)}")

    def to_dict(self) -> dict:
        def rel(path: Optional[Path]) -> Optional[str]:
            return None if path is None else path.relative_to(self.root).as_posix()

        return {
            "catalog": self.catalog_name,
            "entries": [
                {
                    "image_id": e.image_id,
                    "gt_path": rel(e.gt_path),
                    "semantic_path": rel(e.semantic_path),
                    "segments_path": rel(e.segments_path),
                    "instance_counts": e.instance_counts or {},
                }
                for e in self.entries
            ],
        }


def _resolve(root: Path, value: Optional[str]) -> Optional[Path]:
    if value is None:
        return None
    path = Path(value)
    return path if path.is_absolute() else root / path


def load_manifest(path: Union[str, Path]) -> DatasetManifest:
    path = Path(path)
    if not path.is_file():
        raise ManifestError(f"manifest not found: {path}")
    spec = validate_model(ManifestFile, read_json(path), source=str(path))
    root = path.parent

    seen = set()
    entries = []
    for record in spec.entries:
        if record.image_id in seen:
            raise ManifestError(f"{path}: duplicate image_id '{record.image_id}'")
        seen.add(record.image_id)
        entries.append(_entry(root, record))

    for entry in entries:
        for name in ("semantic_path", "segments_path", "gt_path"):
            file = getattr(entry, name)
            if file is not None and not file.is_file():
                raise ManifestError(f"{path}: {entry.image_id}: {name} does not exist ({file})")
    return DatasetManifest(root=root, catalog_name=spec.catalog, entries=tuple(entries))


def _entry(root: Path, record: ManifestEntry) -> DatasetEntry:
    return DatasetEntry(
        image_id=record.image_id,
        semantic_path=_resolve(root, record.semantic_path),
        segments_path=_resolve(root, record.segments_path),
        gt_path=_resolve(root, record.gt_path),
        instance_counts=dict(record.instance_counts) or None,
    )


def write_manifest(path: Union[str, Path], manifest: DatasetManifest) -> None:
    write_json(path, manifest.to_dict())
