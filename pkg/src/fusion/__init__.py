from src.fusion.combine import (
    NO_SEGMENT,
    ForegroundMap,
    FusionPolicy,
    fill_holes,
    fuse,
    resolve_instances,
    semantic_labels,
)
