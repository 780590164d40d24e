"""segfuse command line.

    python -m src.cli.main simulate --out-dir data/sim --n-scenes 10 --seed 7
    python -m src.cli.main fuse data/sim/manifest.json --out-dir data/fused
    python -m src.cli.main eval data/sim/manifest.json --pred-dir data/fused --out-dir data/report

Exit codes: 0 success, 1 some entries failed, 2 invalid invocation.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Optional

from src.cli.manifest import DatasetEntry, DatasetManifest, load_manifest, write_manifest
from src.cli.tasks import (
    EvalJob,
    FuseJob,
    SimulateJob,
    eval_task,
    failure_records,
    fuse_task,
    pseudo_task,
    run_batch,
    simulate_task,
    sum_counts,
)
from src.config import configure_logging, settings
from src.core.catalog import ClassCatalog, get_catalog
from src.core.codecs import atomic_write_bytes, write_json
from src.core.errors import CatalogError, EmptyEvaluationError, SegFuseError
from src.eval.benchmark import render_benchmark, run_benchmark
from src.eval.metrics import ConfusionMatrix, iou_report
from src.eval.remap import load_remap
from src.eval.report import render_table
from src.fusion.combine import FusionPolicy
from src.simulator.rng import MAX_SEED
from src.simulator.scene import check_scene_spec
from src.simulator.specs import load_corruption_spec, load_scene_spec

log = logging.getLogger("segfuse")

EXIT_OK = 0
EXIT_PARTIAL = 1
EXIT_USAGE = 2


def _policy(args) -> FusionPolicy:
    return FusionPolicy(score_threshold=args.policy_score_threshold, min_remaining_fraction=args.policy_min_fraction)


def _catalog(args, manifest: Optional[DatasetManifest] = None) -> ClassCatalog:
    spec = args.catalog or (manifest.catalog_name if manifest else None) or settings.DEFAULT_CATALOG
    return get_catalog(spec)


def _finish(out_dir: Path, summary: dict) -> int:
    write_json(out_dir / "summary.json", summary)
    return EXIT_PARTIAL if summary["failed"] else EXIT_OK


# ==========================================
# COMMAND: fuse / pseudo-gt
# ==========================================
def cmd_fuse(args) -> int:
    manifest = load_manifest(args.manifest)
    catalog = _catalog(args, manifest)
    policy = _policy(args)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    jobs = [FuseJob(entry, catalog, policy, out_dir) for entry in manifest.entries]
    results = run_batch(fuse_task, jobs, args.jobs, desc="fuse", quiet=args.quiet)
    done = [r for r in results if r["ok"]]
    holes = [r["hole_fraction"] for r in done]
    return _finish(out_dir, {
        "command": "fuse",
        "catalog": catalog.name,
        "policy": {"score_threshold": policy.score_threshold, "min_remaining_fraction": policy.min_remaining_fraction},
        "n_entries": len(jobs),
        "mean_hole_fraction": round(sum(holes) / len(holes), 6) if holes else None,
        "images": [{k: r[k] for k in ("image_id", "hole_fraction", "kept", "dropped", "skipped")} for r in done],
        "failed": failure_records(results),
    })


def cmd_pseudo(args) -> int:
    manifest = load_manifest(args.manifest)
    catalog = _catalog(args, manifest)
    policy = _policy(args)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    jobs = [FuseJob(entry, catalog, policy, out_dir) for entry in manifest.entries]
    results = run_batch(pseudo_task, jobs, args.jobs, desc="pseudo-gt", quiet=args.quiet)
    done = [r for r in results if r["ok"]]
    ignored = sum(r["ignored"] for r in done)
    total = sum(r["ignored"] + r["fg_assigned"] + r["bg_filled"] for r in done)
    return _finish(out_dir, {
        "command": "pseudo-gt",
        "catalog": catalog.name,
        "n_entries": len(jobs),
        "ignore_fraction": round(ignored / total, 6) if total else 0.0,
        "images": [
            {k: r[k] for k in ("image_id", "hole_fraction", "fg_assigned", "bg_filled", "ignored")} for r in done
        ],
        "failed": failure_records(results),
    })


# ==========================================
# COMMAND: eval
# ==========================================
def cmd_eval(args) -> int:
    manifest = load_manifest(args.manifest)
    manifest.require_gt()
    catalog = _catalog(args, manifest)
    remap = load_remap(args.remap) if args.remap else None
    if remap is not None and remap.target.name != catalog.name:
        raise CatalogError(f"remap targets '{remap.target.name}' but evaluation uses '{catalog.name}'")
    required = [catalog.resolve(name.strip()) for name in args.classes.split(",")] if args.classes else []

    pred_dir = Path(args.pred_dir)
    jobs, missing = [], []
    for entry in manifest.entries:
        pred_path = pred_dir / f"{entry.image_id}.png"
        if pred_path.is_file():
            jobs.append(EvalJob(entry.image_id, entry.gt_path, pred_path, catalog, remap))
        else:
            log.warning("%s: no prediction at %s", entry.image_id, pred_path)
            missing.append(entry.image_id)

    results = run_batch(eval_task, jobs, args.jobs, desc="eval", quiet=args.quiet)
    failed = failure_records(results) + [{"image_id": i, "error": "missing prediction"} for i in missing]
    out_dir = Path(args.out_dir)
    cm = ConfusionMatrix(sum_counts(results, catalog.size), catalog.class_ids)
    try:
        report = iou_report(cm, catalog)
    except EmptyEvaluationError as e:
        log.error("%s", e)
        write_json(out_dir / "report.json", {"catalog": catalog.name, "failed": failed, "n_evaluated": 0})
        return EXIT_PARTIAL

    payload = report.to_dict(catalog)
    payload.update(n_evaluated=sum(r["ok"] for r in results), failed=sorted(failed, key=lambda f: f["image_id"]))
    write_json(out_dir / "report.json", payload)
    text = render_table(report, catalog)
    atomic_write_bytes(out_dir / "report.txt", text.encode("utf-8"))
    if not args.quiet:
        sys.stdout.write(text)

    undefined = [catalog.name_of(cid) for cid in required if report.per_class_iou[cid] is None]
    if undefined:
        log.error("requested classes have no defined IoU: %s", ", ".join(undefined))
    return EXIT_PARTIAL if failed or undefined else EXIT_OK


# ==========================================
# COMMAND: simulate
# ==========================================
def cmd_simulate(args) -> int:
    scene_spec = load_scene_spec(args.scene)
    check_scene_spec(scene_spec)
    corruption = load_corruption_spec(args.corruption)
    seed = scene_spec.seed if args.seed is None else args.seed
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    jobs = [
        SimulateJob(index, scene_spec, corruption, seed, out_dir, args.semantic_format)
        for index in range(args.n_scenes)
    ]
    results = run_batch(simulate_task, jobs, args.jobs, desc="simulate", quiet=args.quiet)
    entries = tuple(
        DatasetEntry(
            image_id=r["image_id"],
            semantic_path=out_dir / r["semantic_path"],
            segments_path=out_dir / r["segments_path"],
            gt_path=out_dir / r["gt_path"],
            instance_counts=r["instance_counts"],
        )
        for r in results
        if r["ok"]
    )
    write_manifest(out_dir / "manifest.json", DatasetManifest(out_dir, scene_spec.catalog, entries))
    failed = failure_records(results)
    return EXIT_PARTIAL if failed else EXIT_OK


# ==========================================
# COMMAND: benchmark
# ==========================================
def cmd_benchmark(args) -> int:
    scene_spec = load_scene_spec(args.scene)
    corruption = load_corruption_spec(args.corruption)
    result = run_benchmark(scene_spec, corruption, args.seed, args.n_scenes, _policy(args), progress=not args.quiet)
    catalog = get_catalog(scene_spec.catalog)
    if args.out_dir:
        write_json(Path(args.out_dir) / "benchmark.json", result.to_dict(catalog))
    sys.stdout.write(render_benchmark(result, catalog))
    return EXIT_OK


# ==========================================
# ARGUMENTS
# ==========================================
def _probability(text: str) -> float:
    value = float(text)
    if not 0.0 <= value <= 1.0:
        raise argparse.ArgumentTypeError(f"{text} is not in [0, 1]")
    return value


def _seed(text: str) -> int:
    value = int(text)
    if not 0 <= value <= MAX_SEED:
        raise argparse.ArgumentTypeError(f"{text} is not a 64-bit unsigned seed")
    return value


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"{text} must be >= 1")
    return value


def _non_negative(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"{text} must be >= 0")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--log-level",
        type=str.upper,
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        default=None,
        help="default: SEGFUSE_LOG_LEVEL",
    )
    common.add_argument("--quiet", action="store_true", help="no progress bars or table on stdout")
    common.add_argument("--jobs", type=_positive, default=settings.DEFAULT_JOBS, help="worker processes")

    policy = argparse.ArgumentParser(add_help=False)
    policy.add_argument("--policy-score-threshold", type=_probability, default=None)
    policy.add_argument("--policy-min-fraction", type=_probability, default=None)

    catalog = argparse.ArgumentParser(add_help=False)
    catalog.add_argument("--catalog", default=None, help="cityscapes19 | camvid11 | viper | custom:<path>")

    p = argparse.ArgumentParser(prog="segfuse", description="Fuse instance and semantic predictions.")
    sub = p.add_subparsers(dest="command", required=True)

    fuse = sub.add_parser("fuse", parents=[common, policy, catalog], help="write fused label maps")
    fuse.add_argument("manifest")
    fuse.add_argument("--out-dir", required=True)
    fuse.set_defaults(handler=cmd_fuse)

    pseudo = sub.add_parser("pseudo-gt", parents=[common, policy, catalog], help="write pseudo ground truth")
    pseudo.add_argument("manifest")
    pseudo.add_argument("--out-dir", required=True)
    pseudo.set_defaults(handler=cmd_pseudo)

    ev = sub.add_parser("eval", parents=[common, catalog], help="score predictions against GT")
    ev.add_argument("manifest")
    ev.add_argument("--pred-dir", required=True, help="directory of <image_id>.png predictions")
    ev.add_argument("--out-dir", required=True)
    ev.add_argument("--remap", default=None, help="bundled table name or YAML path")
    ev.add_argument("--classes", default=None, help="comma-separated classes that must have a defined IoU")
    ev.set_defaults(handler=cmd_eval)

    sim = sub.add_parser("simulate", parents=[common], help="generate a synthetic dataset")
    sim.add_argument("--scene", default="preset:urban", help="preset:<name> or YAML path")
    sim.add_argument("--corruption", default="preset:identity", help="preset:<name> or YAML path")
    sim.add_argument("--n-scenes", type=_non_negative, default=10)
    sim.add_argument("--seed", type=_seed, default=None, help="defaults to the scene spec's seed")
    sim.add_argument("--semantic-format", choices=["pvol", "png"], default="pvol")
    sim.add_argument("--out-dir", required=True)
    sim.set_defaults(handler=cmd_simulate)

    bench = sub.add_parser("benchmark", parents=[common, policy], help="semantic-only vs fused on simulated scenes")
    bench.add_argument("--scene", default="preset:urban")
    bench.add_argument("--corruption", default="preset:acceptance")
    bench.add_argument("--n-scenes", type=_positive, default=100)
    bench.add_argument("--seed", type=_seed, default=7)
    bench.add_argument("--out-dir", default=None)
    bench.set_defaults(handler=cmd_benchmark)
    return p


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)
    try:
        return args.handler(args)
    except SegFuseError as e:
        log.error("%s", e)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
