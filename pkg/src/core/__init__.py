from src.core.catalog import (
    CAMVID_11,
    CITYSCAPES_19,
    IGNORE_ID,
    VIPER,
    ClassCatalog,
    ClassEntry,
    ClassRole,
    get_catalog,
)
from src.core.models import InstanceSegment, LabelMap, ProbVolume, argmax_labels
from src.core.rle import BinaryMask, rle_decode, rle_encode
