"""Per-image work units and the worker pool that runs them.

Every task takes one picklable job, does its I/O itself and returns a plain
dict. Exceptions never escape a task: they come back as
``{"ok": False, "error": ...}`` so one bad image cannot stop a batch.
"""

import functools
import logging
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np
from tqdm import tqdm

from src.cli.manifest import DatasetEntry
from src.core.catalog import ClassCatalog
from src.core.codecs import (
    read_label_png,
    read_segments,
    read_semantic,
    write_json,
    write_label_png,
    write_pvol,
    write_segments,
)
from src.core.models import check_dims
from src.eval.metrics import confusion
from src.eval.remap import RemapTable
from src.fusion.combine import FusionPolicy, fuse, semantic_labels
from src.pseudo.labels import build_pseudo_gt
from src.simulator.pipeline import scene_image_id, simulate_sample
from src.simulator.specs import CorruptionSpec, SceneSpec

log = logging.getLogger(__name__)


# --- JOBS ---
@dataclass(frozen=True)
class FuseJob:
    entry: DatasetEntry
    catalog: ClassCatalog
    policy: FusionPolicy
    out_dir: Path

    @property
    def image_id(self) -> str:
        return self.entry.image_id


@dataclass(frozen=True)
class EvalJob:
    image_id: str
    gt_path: Path
    pred_path: Path
    catalog: ClassCatalog
    remap: Optional[RemapTable] = None


@dataclass(frozen=True)
class SimulateJob:
    index: int
    scene_spec: SceneSpec
    corruption: CorruptionSpec
    seed: int
    out_dir: Path
    semantic_format: str = "pvol"

    @property
    def image_id(self) -> str:
        return scene_image_id(self.index)


def guarded(task: Callable[..., dict]) -> Callable[..., dict]:
    """Turn exceptions into failure records and attach timing."""

    @functools.wraps(task)
    def wrapper(job) -> dict:
        started = time.perf_counter()
        try:
            result = task(job)
            result["ok"] = True
        except Exception as e:
            result = {"ok": False, "error": f"{type(e).__name__}: {e}"}
        result["image_id"] = job.image_id
        result["seconds"] = time.perf_counter() - started
        return result

    return wrapper


def _load_inputs(entry: DatasetEntry, catalog: ClassCatalog):
    semantic = read_semantic(entry.semantic_path, catalog)
    segments = []
    if entry.segments_path is not None:
        manifest, segments = read_segments(entry.segments_path)
        check_dims(f"{entry.segments_path}", (manifest.width, manifest.height), semantic.dims)
    return semantic, segments


# ==========================================
# TASK: FUSE ONE IMAGE
# ==========================================
@guarded
def fuse_task(job: FuseJob) -> dict:
    """
    Responsibilities:
    1. Load the dense prediction and the segment manifest
    2. Resolve segments and fill holes
    3. Write <image_id>.png atomically
    4. Report hole fraction and segment bookkeeping
    """
    semantic, segments = _load_inputs(job.entry, job.catalog)
    fused, fg = fuse(segments, semantic, job.catalog, job.policy)
    write_label_png(job.out_dir / f"{job.image_id}.png", fused)
    return {
        "hole_fraction": round(fg.hole_fraction, 6),
        "kept": len(fg.kept),
        "dropped": len(fg.dropped),
        "skipped": len(fg.skipped),
    }


# ==========================================
# TASK: PSEUDO-GT FOR ONE IMAGE
# ==========================================
@guarded
def pseudo_task(job: FuseJob) -> dict:
    semantic, segments = _load_inputs(job.entry, job.catalog)
    pseudo, fg, stats = build_pseudo_gt(segments, semantic, job.catalog, job.policy)
    write_label_png(job.out_dir / f"{job.image_id}.png", pseudo)
    write_json(job.out_dir / f"{job.image_id}.json", stats.sidecar(job.image_id))
    return {
        "hole_fraction": round(fg.hole_fraction, 6),
        "fg_assigned": stats.fg_assigned,
        "bg_filled": stats.bg_filled,
        "ignored": stats.ignored,
    }


# ==========================================
# TASK: CONFUSION MATRIX FOR ONE PAIR
# ==========================================
@guarded
def eval_task(job: EvalJob) -> dict:
    gt = read_label_png(job.gt_path)
    pred = read_label_png(job.pred_path)
    if job.remap is not None:
        pred = job.remap.apply(pred)
    return {"counts": confusion(pred, gt, job.catalog).counts}


# ==========================================
# TASK: SIMULATE ONE SCENE
# ==========================================
@guarded
def simulate_task(job: SimulateJob) -> dict:
    sample = simulate_sample(job.scene_spec, job.corruption, job.seed, job.index)
    scene, catalog = sample.scene, sample.scene.catalog
    width, height = scene.dims

    write_label_png(job.out_dir / "gt" / f"{job.image_id}.png", scene.gt)
    write_segments(job.out_dir / "segments" / f"{job.image_id}.json", job.image_id, width, height, sample.segments)
    if job.semantic_format == "png":
        semantic_file = job.out_dir / "probs" / f"{job.image_id}.png"
        write_label_png(semantic_file, semantic_labels(sample.semantic, catalog))
    else:
        semantic_file = job.out_dir / "probs" / f"{job.image_id}.pvol"
        write_pvol(semantic_file, sample.semantic)

    return {
        "gt_path": f"gt/{job.image_id}.png",
        "semantic_path": semantic_file.relative_to(job.out_dir).as_posix(),
        "segments_path": f"segments/{job.image_id}.json",
        "instance_counts": scene.instance_counts,
    }


# ==========================================
# WORKER POOL
# ==========================================
def run_batch(task: Callable, jobs: Sequence, n_jobs: int = 1, desc: str = "", quiet: bool = False) -> list[dict]:
    """Run a task over all jobs, in order, on `n_jobs` processes."""
    show = not quiet and sys.stderr.isatty()
    if n_jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            chunk = max(1, len(jobs) // (n_jobs * 4))
            stream = pool.map(task, jobs, chunksize=chunk)
            results = list(_logged(tqdm(stream, total=len(jobs), desc=desc, disable=not show)))
    else:
        results = list(_logged(tqdm(map(task, jobs), total=len(jobs), desc=desc, disable=not show)))

    failed = sum(not r["ok"] for r in results)
    log.info("%s: %d done, %d failed", desc or task.__name__, len(results) - failed, failed)
    return results


def _logged(results):
    for result in results:
        if result["ok"]:
            log.info("%s done in %.3fs", result["image_id"], result["seconds"])
        else:
            log.error("%s failed: %s", result["image_id"], result["error"])
        yield result


def failure_records(results: list[dict]) -> list[dict]:
    return [{"image_id": r["image_id"], "error": r["error"]} for r in results if not r["ok"]]


def sum_counts(results: list[dict], size: int) -> np.ndarray:
    total = np.zeros((size, size), dtype=np.int64)
    for result in results:
        if result["ok"]:
            total += result["counts"]
    return total
