"""Confusion-matrix based IoU evaluation.

Classes whose union is empty (absent from both GT and prediction) have no
IoU and are left out of every mean rather than scored as 0.
"""

from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np

from src.core.catalog import ClassCatalog, ClassRole
from src.core.errors import CatalogError, EmptyEvaluationError
from src.core.models import LabelMap, check_dims


@dataclass(frozen=True, eq=False)
class ConfusionMatrix:
    """Pixel counts, rows = GT class, columns = predicted class, in catalog order."""

    counts: np.ndarray
    class_ids: tuple[int, ...]

    @classmethod
    def zeros(cls, catalog: ClassCatalog) -> "ConfusionMatrix":
        return cls(np.zeros((catalog.size, catalog.size), dtype=np.int64), catalog.class_ids)

    @classmethod
    def total_of(cls, matrices: Iterable["ConfusionMatrix"], catalog: ClassCatalog) -> "ConfusionMatrix":
        result = cls.zeros(catalog)
        for matrix in matrices:
            result = result + matrix
        return result

    def __add__(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        if self.class_ids != other.class_ids:
            raise CatalogError("cannot add confusion matrices over different catalogs")
        return ConfusionMatrix(self.counts + other.counts, self.class_ids)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, ConfusionMatrix)
            and self.class_ids == other.class_ids
            and np.array_equal(self.counts, other.counts)
        )

    __hash__ = None

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def count(self, gt_id: int, pred_id: int) -> int:
        return int(self.counts[self.class_ids.index(gt_id), self.class_ids.index(pred_id)])


def confusion(pred: LabelMap, gt: LabelMap, catalog: ClassCatalog) -> ConfusionMatrix:
    check_dims("prediction", pred.dims, gt.dims)
    lut = catalog.index_lut
    gt_idx = lut[gt.data]
    pred_idx = lut[pred.data]

    scored = gt.data != catalog.ignore_id
    if (gt_idx[scored] < 0).any():
        bad = sorted(int(v) for v in np.unique(gt.data[scored & (gt_idx < 0)]))
        raise CatalogError(f"ground truth has values {bad} outside catalog '{catalog.name}'")
    if (pred_idx[scored] < 0).any():
        bad = sorted(int(v) for v in np.unique(pred.data[scored & (pred_idx < 0)]))
        raise CatalogError(f"prediction has values {bad} outside catalog '{catalog.name}'")

    size = catalog.size
    flat = gt_idx[scored].astype(np.int64) * size + pred_idx[scored]
    counts = np.bincount(flat, minlength=size * size).reshape(size, size)
    return ConfusionMatrix(counts, catalog.class_ids)


@dataclass(frozen=True)
class EvalReport:
    per_class_iou: dict[int, Optional[float]]
    miou: float
    fg_miou: Optional[float]
    bg_miou: Optional[float]
    pixel_accuracy: float

    @property
    def undefined_classes(self) -> tuple[int, ...]:
        return tuple(cid for cid, iou in self.per_class_iou.items() if iou is None)

    def to_dict(self, catalog: ClassCatalog) -> dict:
        return {
            "catalog": catalog.name,
            "per_class_iou": {catalog.name_of(cid): iou for cid, iou in self.per_class_iou.items()},
            "miou": self.miou,
            "fg_miou": self.fg_miou,
            "bg_miou": self.bg_miou,
            "pixel_accuracy": self.pixel_accuracy,
            "undefined_classes": [catalog.name_of(cid) for cid in self.undefined_classes],
        }


def _mean(values: np.ndarray) -> Optional[float]:
    return float(values.mean()) if values.size else None


def iou_report(cm: ConfusionMatrix, catalog: ClassCatalog) -> EvalReport:
    if cm.class_ids != catalog.class_ids:
        raise CatalogError(f"confusion matrix does not match catalog '{catalog.name}'")
    counts = cm.counts.astype(np.float64)
    tp = np.diag(counts)
    union = counts.sum(axis=0) + counts.sum(axis=1) - tp
    defined = union > 0
    if not defined.any():
        raise EmptyEvaluationError("no class has a defined IoU (no scored pixels)")

    iou = np.zeros_like(tp)
    iou[defined] = tp[defined] / union[defined]
    roles = np.array([e.role is ClassRole.FOREGROUND for e in catalog.entries])

    return EvalReport(
        per_class_iou={
            cid: (float(iou[k]) if defined[k] else None) for k, cid in enumerate(catalog.class_ids)
        },
        miou=float(iou[defined].mean()),
        fg_miou=_mean(iou[defined & roles]),
        bg_miou=_mean(iou[defined & ~roles]),
        pixel_accuracy=float(tp.sum() / counts.sum()),
    )


def evaluate(pred: LabelMap, gt: LabelMap, catalog: ClassCatalog) -> EvalReport:
    """Single-image shortcut: confusion + report."""
    return iou_report(confusion(pred, gt, catalog), catalog)
