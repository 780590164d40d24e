import pandas as pd

from src.core.catalog import ClassCatalog
from src.eval.metrics import EvalReport
from src.eval.reference import reference_rows, role_means

UNDEFINED = "-"
FOOTER = (
    "Reference rows are published full-scale results (trained networks, licensed data);\n"
    "they are not reproducible by this tool and are shown for orientation only."
)


def _pct(value):
    return UNDEFINED if value is None else f"{100.0 * value:.1f}"


def _columns(catalog: ClassCatalog) -> list[str]:
    # Thing classes are starred, as in the usual results tables
    return [e.name + ("*" if catalog.is_foreground(e.class_id) else "") for e in catalog.entries]


def report_frame(report: EvalReport, catalog: ClassCatalog, label: str = "this run", with_reference: bool = True) -> pd.DataFrame:
    columns = _columns(catalog) + ["mIoU", "fg", "bg"]
    rows = {label: [_pct(report.per_class_iou[cid]) for cid in catalog.class_ids]
            + [_pct(report.miou), _pct(report.fg_miou), _pct(report.bg_miou)]}

    reference = reference_rows(catalog) if with_reference else None
    for method, values in (reference or {}).items():
        fg, bg = role_means(values, catalog)
        rows[f"[ref] {method}"] = [f"{v:.1f}" for v in values] + [f"{fg:.1f}", f"{bg:.1f}"]

    return pd.DataFrame.from_dict(rows, orient="index", columns=columns)


def render_table(report: EvalReport, catalog: ClassCatalog, with_reference: bool = True) -> str:
    frame = report_frame(report, catalog, with_reference=with_reference)
    lines = [
        frame.to_string(),
        "",
        f"pixel accuracy: {100.0 * report.pixel_accuracy:.2f}",
    ]
    if report.undefined_classes:
        names = ", ".join(catalog.name_of(cid) for cid in report.undefined_classes)
        lines.append(f"undefined (no GT or prediction pixels, excluded from means): {names}")
    if with_reference and reference_rows(catalog):
        lines += ["", FOOTER]
    return "\n".join(lines) + "\n"
