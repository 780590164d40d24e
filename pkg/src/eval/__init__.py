from src.eval.metrics import ConfusionMatrix, EvalReport, confusion, evaluate, iou_report
from src.eval.remap import RemapTable, load_remap, remap_labels
