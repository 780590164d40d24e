"""Semantic-only vs fused, scored on simulated scenes.

For each scene the dense prediction's argmax and the fused map are both
evaluated against GT. Foreground means should go up with fusion while
background means stay put.
"""

import logging
from dataclasses import dataclass
from typing import Optional

from tqdm import tqdm

from src.core.catalog import CITYSCAPES_19, ClassCatalog
from src.eval.metrics import ConfusionMatrix, EvalReport, confusion, iou_report
from src.eval.reference import FOREGROUND_SEGMENTATION_VS_DETECTION
from src.fusion.combine import FusionPolicy, fill_holes, resolve_instances, semantic_labels
from src.pseudo.labels import make_pseudo_gt, pseudo_stats
from src.simulator.pipeline import simulate_sample
from src.simulator.scene import check_scene_spec
from src.simulator.specs import CorruptionSpec, SceneSpec

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SceneComparison:
    image_id: str
    semantic: EvalReport
    fused: EvalReport
    ignore_fraction: float

    @property
    def fused_wins(self) -> bool:
        sem, fus = self.semantic.fg_miou, self.fused.fg_miou
        return sem is not None and fus is not None and fus > sem


@dataclass(frozen=True)
class BenchmarkResult:
    scenes: tuple[SceneComparison, ...]
    semantic: EvalReport  # aggregated over all scenes
    fused: EvalReport
    ignore_fraction: float

    @property
    def wins(self) -> int:
        return sum(s.fused_wins for s in self.scenes)

    @property
    def bg_gap(self) -> Optional[float]:
        if self.semantic.bg_miou is None or self.fused.bg_miou is None:
            return None
        return abs(self.fused.bg_miou - self.semantic.bg_miou)

    def to_dict(self, catalog: ClassCatalog) -> dict:
        return {
            "n_scenes": len(self.scenes),
            "fused_wins": self.wins,
            "bg_gap": self.bg_gap,
            "ignore_fraction": self.ignore_fraction,
            "semantic": self.semantic.to_dict(catalog),
            "fused": self.fused.to_dict(catalog),
            "scenes": [
                {
                    "image_id": s.image_id,
                    "semantic_fg_miou": s.semantic.fg_miou,
                    "fused_fg_miou": s.fused.fg_miou,
                    "semantic_bg_miou": s.semantic.bg_miou,
                    "fused_bg_miou": s.fused.bg_miou,
                    "ignore_fraction": s.ignore_fraction,
                }
                for s in self.scenes
            ],
        }


def run_benchmark(
    scene_spec: SceneSpec,
    corruption: CorruptionSpec,
    seed: int,
    n_scenes: int,
    policy: FusionPolicy = FusionPolicy(),
    progress: bool = False,
) -> BenchmarkResult:
    catalog, _, _ = check_scene_spec(scene_spec)
    sem_total, fused_total = ConfusionMatrix.zeros(catalog), ConfusionMatrix.zeros(catalog)
    ignored = pixels = 0
    scenes = []

    for index in tqdm(range(n_scenes), desc="benchmark", disable=not progress):
        sample = simulate_sample(scene_spec, corruption, seed, index)
        gt = sample.scene.gt
        semantic = semantic_labels(sample.semantic, catalog)
        fg = resolve_instances(sample.segments, semantic.dims, catalog, policy)
        fused = fill_holes(fg, semantic, catalog.ignore_id)
        stats = pseudo_stats(fg, make_pseudo_gt(fg, semantic, catalog), catalog.ignore_id)

        sem_cm, fused_cm = confusion(semantic, gt, catalog), confusion(fused, gt, catalog)
        sem_total, fused_total = sem_total + sem_cm, fused_total + fused_cm
        ignored += stats.ignored
        pixels += stats.total
        scenes.append(SceneComparison(
            sample.image_id, iou_report(sem_cm, catalog), iou_report(fused_cm, catalog), stats.ignore_fraction
        ))

    result = BenchmarkResult(
        scenes=tuple(scenes),
        semantic=iou_report(sem_total, catalog),
        fused=iou_report(fused_total, catalog),
        ignore_fraction=ignored / pixels if pixels else 0.0,
    )
    log.info("fusion improved foreground mIoU in %d/%d scenes", result.wins, n_scenes)
    return result


def _pct(value: Optional[float]) -> str:
    return "-" if value is None else f"{100.0 * value:.1f}"


def render_benchmark(result: BenchmarkResult, catalog: ClassCatalog) -> str:
    lines = [
        f"scenes: {len(result.scenes)}",
        f"{'':<16}{'mIoU':>8}{'fg':>8}{'bg':>8}",
    ]
    for label, report in (("semantic only", result.semantic), ("fused", result.fused)):
        lines.append(f"{label:<16}{_pct(report.miou):>8}{_pct(report.fg_miou):>8}{_pct(report.bg_miou):>8}")
    lines += [
        "",
        f"fused foreground mIoU higher in {result.wins}/{len(result.scenes)} scenes",
        f"aggregate background mIoU difference: {_pct(result.bg_gap)}",
        f"pseudo-GT ignore fraction: {result.ignore_fraction:.4f}",
    ]
    if catalog.name == CITYSCAPES_19.name:
        lines += ["", "[ref] published foreground mIoU on Cityscapes, synthetic training:"]
        for method, row in FOREGROUND_SEGMENTATION_VS_DETECTION.items():
            lines.append(f"  {method:<16}{sum(row) / len(row):>8.1f}")
    return "\n".join(lines) + "\n"
