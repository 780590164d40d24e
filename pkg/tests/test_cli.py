import json
import time

import numpy as np
import pytest
import yaml

from src.cli.main import build_parser, main
from src.core.catalog import CITYSCAPES_19
from src.core.codecs import read_label_png, write_label_png
from src.core.models import LabelMap
from src.core.schemas import PseudoSidecar, validate_model
from src.simulator import load_scene_spec

CAT = CITYSCAPES_19
ROAD, CAR = CAT.id_of("road"), CAT.id_of("car")


@pytest.fixture(autouse=True)
def keep_test_logging(mocker):
    """main() reconfigures the root logger; keep pytest's handlers in place."""
    mocker.patch("src.cli.main.configure_logging")


def simulate(out_dir, *extra):
    return main(["simulate", "--out-dir", str(out_dir), "--quiet", *extra])


def write_dataset(root, pairs):
    """Hand-made dataset: {image_id: (gt, semantic)} label maps, no segments."""
    entries = []
    for image_id, (gt, semantic) in pairs.items():
        write_label_png(root / "gt" / f"{image_id}.png", gt)
        write_label_png(root / "sem" / f"{image_id}.png", semantic)
        entries.append({"image_id": image_id, "gt_path": f"gt/{image_id}.png", "semantic_path": f"sem/{image_id}.png"})
    (root / "manifest.json").write_text(json.dumps({"catalog": "cityscapes19", "entries": entries}))
    return root / "manifest.json"


def tree_bytes(root):
    return {p.relative_to(root).as_posix(): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}


def test_simulate_zero_scenes(tmp_path):
    assert simulate(tmp_path / "sim", "--n-scenes", "0") == 0
    manifest = json.loads((tmp_path / "sim" / "manifest.json").read_text())
    assert manifest == {"catalog": "cityscapes19", "entries": []}


def test_identity_pipeline_end_to_end(tmp_path):
    """Zero corruption: fused maps equal GT, mIoU is 1 and pseudo-GT has no ignore pixels."""
    sim, fused, pseudo, report = (tmp_path / d for d in ("sim", "fused", "pseudo", "report"))
    assert simulate(sim, "--n-scenes", "3", "--seed", "11") == 0
    manifest = str(sim / "manifest.json")

    assert main(["fuse", manifest, "--out-dir", str(fused), "--quiet"]) == 0
    for entry in json.loads((sim / "manifest.json").read_text())["entries"]:
        gt = read_label_png(sim / entry["gt_path"])
        assert read_label_png(fused / f"{entry['image_id']}.png") == gt

    assert main(["eval", manifest, "--pred-dir", str(fused), "--out-dir", str(report), "--quiet"]) == 0
    result = json.loads((report / "report.json").read_text())
    assert result["miou"] == 1.0
    assert result["failed"] == []
    assert "mIoU" in (report / "report.txt").read_text()

    assert main(["pseudo-gt", manifest, "--out-dir", str(pseudo), "--quiet"]) == 0
    summary = json.loads((pseudo / "summary.json").read_text())
    assert summary["ignore_fraction"] == 0.0
    sidecar = validate_model(PseudoSidecar, json.loads((pseudo / "scene_00000.json").read_text()))
    assert sidecar.image_id == "scene_00000"
    assert sidecar.ignore_fraction == 0.0


def test_reruns_are_byte_identical(tmp_path):
    """Every command writes the same bytes when run twice on the same inputs."""
    for run in ("a", "b"):
        root = tmp_path / run
        manifest = str(root / "sim" / "manifest.json")
        assert simulate(root / "sim", "--n-scenes", "5", "--seed", "3", "--corruption", "preset:realistic") == 0
        assert main(["fuse", manifest, "--out-dir", str(root / "fused"), "--quiet"]) == 0
        assert main(["pseudo-gt", manifest, "--out-dir", str(root / "pseudo"), "--quiet"]) == 0
        assert main(["eval", manifest, "--pred-dir", str(root / "fused"), "--out-dir", str(root / "report"), "--quiet"]) == 0

    first, second = tree_bytes(tmp_path / "a"), tree_bytes(tmp_path / "b")
    assert {"pseudo/scene_00000.png", "pseudo/scene_00000.json", "pseudo/summary.json"} <= set(first)
    assert {"report/report.json", "report/report.txt"} <= set(first)
    assert first == second


def test_simulate_manifest_counts_match_preset(tmp_path):
    assert simulate(tmp_path, "--n-scenes", "2", "--scene", "preset:instance_stats") == 0
    expected = {name: n for name, n in load_scene_spec("preset:instance_stats").instance_counts.items() if n}
    for entry in json.loads((tmp_path / "manifest.json").read_text())["entries"]:
        assert entry["instance_counts"] == expected


def test_simulate_png_semantics(tmp_path):
    assert simulate(tmp_path / "sim", "--n-scenes", "1", "--semantic-format", "png") == 0
    assert (tmp_path / "sim" / "probs" / "scene_00000.png").is_file()
    assert main(["fuse", str(tmp_path / "sim" / "manifest.json"), "--out-dir", str(tmp_path / "out"), "--quiet"]) == 0


def test_fuse_summary_reports_holes(tmp_path):
    assert simulate(tmp_path / "sim", "--n-scenes", "4", "--corruption", "preset:acceptance") == 0
    assert main(["fuse", str(tmp_path / "sim" / "manifest.json"), "--out-dir", str(tmp_path / "out"), "--quiet"]) == 0
    summary = json.loads((tmp_path / "out" / "summary.json").read_text())
    assert summary["n_entries"] == 4
    assert 0 < summary["mean_hole_fraction"] < 1
    assert all({"kept", "dropped", "skipped"} <= set(image) for image in summary["images"])


def test_empty_manifest(tmp_path):
    (tmp_path / "manifest.json").write_text(json.dumps({"catalog": "cityscapes19", "entries": []}))
    assert main(["fuse", str(tmp_path / "manifest.json"), "--out-dir", str(tmp_path / "out"), "--quiet"]) == 0
    summary = json.loads((tmp_path / "out" / "summary.json").read_text())
    assert summary["n_entries"] == 0
    assert summary["images"] == []


def test_semantic_only_foreground_is_all_ignore(tmp_path):
    manifest = write_dataset(tmp_path, {"a": (LabelMap.filled(CAR, 4, 3), LabelMap.filled(CAR, 4, 3))})
    assert main(["pseudo-gt", str(manifest), "--out-dir", str(tmp_path / "out"), "--quiet"]) == 0
    assert json.loads((tmp_path / "out" / "summary.json").read_text())["ignore_fraction"] == 1.0


def test_eval_worked_example(tmp_path):
    gt = LabelMap.from_flat([ROAD, ROAD, CAR, CAR], 2, 2)
    pred = LabelMap.from_flat([ROAD, CAR, CAR, CAR], 2, 2)
    manifest = write_dataset(tmp_path, {"x": (gt, gt)})
    write_label_png(tmp_path / "pred" / "x.png", pred)
    assert main(["eval", str(manifest), "--pred-dir", str(tmp_path / "pred"), "--out-dir", str(tmp_path / "r"), "--quiet"]) == 0
    assert json.loads((tmp_path / "r" / "report.json").read_text())["miou"] == pytest.approx(0.5833, abs=1e-4)


def test_eval_missing_prediction(tmp_path):
    gt = LabelMap.filled(ROAD, 2, 2)
    manifest = write_dataset(tmp_path, {"x": (gt, gt), "y": (gt, gt)})
    write_label_png(tmp_path / "pred" / "x.png", gt)
    code = main(["eval", str(manifest), "--pred-dir", str(tmp_path / "pred"), "--out-dir", str(tmp_path / "r"), "--quiet"])
    assert code == 1
    report = json.loads((tmp_path / "r" / "report.json").read_text())
    assert report["failed"] == [{"image_id": "y", "error": "missing prediction"}]
    assert report["n_evaluated"] == 1


def test_eval_requested_class_undefined(tmp_path):
    gt = LabelMap.filled(ROAD, 2, 2)
    manifest = write_dataset(tmp_path, {"x": (gt, gt)})
    write_label_png(tmp_path / "pred" / "x.png", gt)
    args = ["eval", str(manifest), "--pred-dir", str(tmp_path / "pred"), "--out-dir", str(tmp_path / "r"), "--quiet"]
    assert main(args + ["--classes", "road"]) == 0
    assert main(args + ["--classes", "road,car"]) == 1
    assert main(args + ["--classes", "hovercraft"]) == 2


def test_eval_with_remap(tmp_path):
    """VIPER 'infrastructure' predictions are scored as Cityscapes 'pole'."""
    pole, infra = CAT.id_of("pole"), 19
    gt = LabelMap.filled(pole, 2, 2)
    manifest = write_dataset(tmp_path, {"x": (gt, gt)})
    write_label_png(tmp_path / "pred" / "x.png", LabelMap.filled(infra, 2, 2))
    args = ["eval", str(manifest), "--pred-dir", str(tmp_path / "pred"), "--out-dir", str(tmp_path / "r"), "--quiet"]
    assert main(args + ["--remap", "viper_to_cityscapes"]) == 0
    assert json.loads((tmp_path / "r" / "report.json").read_text())["per_class_iou"]["pole"] == 1.0


def test_per_entry_failure_is_recorded(tmp_path, mocker):
    """One image failing to write does not stop the batch; the exit code becomes 1."""
    assert simulate(tmp_path / "sim", "--n-scenes", "3") == 0
    def flaky(path, labels):
        if path.name == "scene_00001.png":
            raise OSError("disk full")
        write_label_png(path, labels)

    mocker.patch("src.cli.tasks.write_label_png", side_effect=flaky)
    code = main(["fuse", str(tmp_path / "sim" / "manifest.json"), "--out-dir", str(tmp_path / "out"), "--quiet"])
    assert code == 1
    summary = json.loads((tmp_path / "out" / "summary.json").read_text())
    assert summary["failed"] == [{"image_id": "scene_00001", "error": "OSError: disk full"}]
    assert [i["image_id"] for i in summary["images"]] == ["scene_00000", "scene_00002"]


def test_invalid_spec_exits_2(tmp_path):
    bad = tmp_path / "bad.yaml"
    bad.write_text("instance:\n  miss_rate: 2.0\n")
    assert simulate(tmp_path / "sim", "--corruption", str(bad)) == 2


def test_missing_config_files_exit_2(tmp_path):
    missing = str(tmp_path / "nope.yaml")
    assert simulate(tmp_path / "sim", "--scene", missing) == 2
    assert simulate(tmp_path / "sim", "--corruption", missing) == 2
    assert main(["benchmark", "--scene", missing, "--n-scenes", "1", "--quiet"]) == 2

    gt = LabelMap.filled(ROAD, 2, 2)
    manifest = str(write_dataset(tmp_path, {"x": (gt, gt)}))
    write_label_png(tmp_path / "pred" / "x.png", gt)
    args = ["eval", manifest, "--pred-dir", str(tmp_path / "pred"), "--out-dir", str(tmp_path / "r"), "--quiet"]
    assert main(args + ["--remap", missing]) == 2
    assert main(args + ["--catalog", f"custom:{missing}"]) == 2


@pytest.mark.parametrize(
    "bands, counts",
    [
        ([{"class_name": "lava", "fraction": 1.0}], {}),
        ([{"class_name": "car", "fraction": 1.0}], {}),
        ([{"class_name": "road", "fraction": 0.999}, {"class_name": "sky", "fraction": 0.001}], {}),
        ([{"class_name": "road", "fraction": 1.0}], {"hovercraft": 1}),
    ],
)
def test_bad_scene_layout_rejected_before_any_scene(tmp_path, bands, counts):
    """Layout errors that need the catalog fail the whole command, even with zero scenes."""
    scene = tmp_path / "scene.yaml"
    library = {name: [{"width": 2, "height": 2, "parts": [{"kind": "rect"}]}] for name in counts}
    scene.write_text(yaml.safe_dump(
        {"width": 8, "height": 8, "bands": bands, "instance_counts": counts, "shape_library": library}
    ))
    for n_scenes in ("0", "2"):
        assert simulate(tmp_path / "sim", "--scene", str(scene), "--n-scenes", n_scenes) == 2
    assert not (tmp_path / "sim" / "manifest.json").exists()
    assert main(["benchmark", "--scene", str(scene), "--n-scenes", "1", "--quiet"]) == 2


def test_unknown_log_level_exits_2():
    with pytest.raises(SystemExit) as err:
        main(["simulate", "--out-dir", "o", "--log-level", "LOUD"])
    assert err.value.code == 2
    assert build_parser().parse_args(["simulate", "--out-dir", "o", "--log-level", "debug"]).log_level == "DEBUG"


def test_duplicate_image_ids_exit_2(tmp_path):
    gt = LabelMap.filled(ROAD, 2, 2)
    manifest = write_dataset(tmp_path, {"x": (gt, gt)})
    data = json.loads(manifest.read_text())
    data["entries"].append(data["entries"][0])
    manifest.write_text(json.dumps(data))
    assert main(["fuse", str(manifest), "--out-dir", str(tmp_path / "out"), "--quiet"]) == 2


def test_bad_flags_exit_2():
    with pytest.raises(SystemExit) as err:
        main(["fuse", "m.json", "--out-dir", "o", "--policy-score-threshold", "1.5"])
    assert err.value.code == 2


def test_policy_flags_reach_fusion(tmp_path):
    assert simulate(tmp_path / "sim", "--n-scenes", "2", "--corruption", "preset:realistic") == 0
    out = tmp_path / "out"
    args = ["fuse", str(tmp_path / "sim" / "manifest.json"), "--out-dir", str(out), "--quiet"]
    assert main(args + ["--policy-score-threshold", "1.0"]) == 0
    summary = json.loads((out / "summary.json").read_text())
    assert summary["policy"]["score_threshold"] == 1.0
    assert all(image["kept"] <= 24 for image in summary["images"])


@pytest.mark.slow
def test_eval_throughput(tmp_path):
    """100 label-map pairs at 512x256 evaluate in under 5 s with four workers."""
    rng = np.random.default_rng(0)
    entries = []
    for i in range(100):
        gt = LabelMap(rng.integers(0, 19, size=(256, 512)))
        write_label_png(tmp_path / "gt" / f"{i:03d}.png", gt)
        write_label_png(tmp_path / "pred" / f"{i:03d}.png", gt)
        entries.append({"image_id": f"{i:03d}", "gt_path": f"gt/{i:03d}.png", "semantic_path": f"gt/{i:03d}.png"})
    (tmp_path / "manifest.json").write_text(json.dumps({"catalog": "cityscapes19", "entries": entries}))

    started = time.perf_counter()
    code = main([
        "eval", str(tmp_path / "manifest.json"), "--pred-dir", str(tmp_path / "pred"),
        "--out-dir", str(tmp_path / "r"), "--jobs", "4", "--quiet",
    ])
    assert code == 0
    assert time.perf_counter() - started < 5.0


def test_benchmark_command(tmp_path, capsys):
    assert main(["benchmark", "--n-scenes", "2", "--seed", "5", "--out-dir", str(tmp_path), "--quiet"]) == 0
    assert json.loads((tmp_path / "benchmark.json").read_text())["n_scenes"] == 2
    assert "fused" in capsys.readouterr().out
