"""Published full-scale results, kept for the report footer.

These come from networks trained on licensed synthetic/real datasets and
cannot be reproduced by this package; they are documentation, not targets.
Values are IoU percentages per class, in catalog order, plus the mean.
"""

from typing import Optional

from src.core.catalog import CAMVID_11, CITYSCAPES_19, ClassCatalog

# Cityscapes val, models trained on synthetic data (per class in train-id order, then mIoU)
CITYSCAPES_SYNTHETIC = {
    "GTA5 (earlier report)": [29.8, 16.0, 56.6, 9.2, 17.3, 13.5, 13.6, 9.8, 74.9, 6.7, 54.3, 41.9, 2.9, 45.0, 3.3, 13.1, 1.3, 6.0, 0.0, 21.9],
    "SYNTHIA": [36.7, 22.7, 51.0, 0.3, 0.1, 16.6, 0.1, 9.5, 72.5, 0.0, 78.4, 47.5, 5.6, 61.4, 0.0, 13.0, 0.0, 3.2, 3.1, 22.1],
    "VIPER": [36.9, 19.0, 74.7, 0.0, 5.3, 7.1, 10.0, 10.1, 78.7, 13.6, 69.6, 43.0, 0.0, 41.2, 20.8, 13.9, 0.0, 9.1, 0.0, 23.9],
    "GTA5": [80.5, 26.0, 74.7, 23.0, 9.8, 9.1, 13.4, 7.3, 79.4, 28.6, 72.1, 40.4, 5.1, 77.8, 23.0, 18.6, 1.2, 5.3, 0.0, 31.3],
    "VEIS": [70.8, 9.5, 50.9, 0.0, 0.0, 0.3, 15.6, 26.8, 66.8, 12.7, 52.3, 44.0, 14.2, 60.6, 10.2, 8.2, 3.2, 5.5, 11.8, 24.4],
    "GTA5+VEIS": [66.2, 21.6, 72.3, 15.7, 18.3, 12.3, 22.3, 23.8, 78.4, 11.3, 74.6, 48.7, 13.3, 75.1, 14.3, 21.2, 2.1, 24.2, 7.3, 32.8],
    "GTA5+VEIS+pseudo-GT": [77.6, 26.8, 75.5, 19.4, 19.5, 4.8, 18.7, 19.8, 79.5, 21.7, 78.9, 47.3, 8.7, 77.6, 23.1, 16.1, 2.2, 15.6, 0.0, 33.3],
    "GTA5+VEIS fused": [71.9, 23.8, 75.5, 23.4, 14.9, 9.3, 26.7, 42.5, 80.1, 34.0, 76.3, 52.2, 28.5, 76.2, 19.6, 31.6, 6.9, 18.1, 9.8, 38.0],
    "GTA5+VEIS fused+pseudo-GT": [79.8, 29.3, 77.8, 24.2, 21.6, 6.9, 23.5, 44.2, 80.5, 38.0, 76.2, 52.7, 22.2, 83.0, 32.3, 41.3, 27.0, 19.3, 27.7, 42.5],
}

# CamVid test (building, vegetation, sky, car, sign, road, pedestrian, fence, pole, sidewalk, cyclist, mIoU)
CAMVID = {
    "GTA5": [66.6, 53.9, 61.4, 70.4, 32.8, 80.9, 28.2, 24.4, 14.6, 57.1, 0.0, 44.6],
    "GTA5+VEIS": [73.6, 54.2, 77.9, 66.2, 33.6, 77.3, 26.1, 16.0, 3.3, 48.4, 11.9, 44.4],
    "GTA5+VEIS fused": [66.3, 55.0, 61.9, 73.4, 37.4, 82.7, 41.4, 23.9, 9.2, 57.7, 14.9, 47.6],
    "GTA5+VEIS fused+pseudo-GT": [72.3, 55.2, 72.6, 73.1, 37.4, 83.9, 39.9, 33.2, 1.2, 55.5, 12.8, 48.8],
}

# Foreground classes only: dense segmentation vs detection-based, both trained on synthetic data
FOREGROUND_SEGMENTATION_VS_DETECTION = {
    "Segmentation": [22.3, 23.8, 48.7, 13.3, 75.1, 14.3, 21.2, 2.1, 24.2, 7.3],
    "Detection-based": [26.7, 42.5, 52.2, 28.5, 76.2, 19.6, 31.6, 6.9, 18.1, 9.8],
}

REFERENCE_TABLES = {
    CITYSCAPES_19.name: CITYSCAPES_SYNTHETIC,
    CAMVID_11.name: CAMVID,
}


def role_means(row: list[float], catalog: ClassCatalog) -> tuple[float, float]:
    """(foreground mean, background mean) of a reference row, same role split as the evaluator."""
    per_class = row[: catalog.size]
    fg = [v for v, e in zip(per_class, catalog.entries) if catalog.is_foreground(e.class_id)]
    bg = [v for v, e in zip(per_class, catalog.entries) if not catalog.is_foreground(e.class_id)]
    return sum(fg) / len(fg), sum(bg) / len(bg)


def reference_rows(catalog: ClassCatalog) -> Optional[dict[str, list[float]]]:
    return REFERENCE_TABLES.get(catalog.name)
