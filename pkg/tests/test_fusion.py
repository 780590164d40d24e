import itertools
import logging

import numpy as np
import pytest

from src.core.catalog import CITYSCAPES_19, IGNORE_ID
from src.core.errors import ClassRoleError, SizeError, SpecError
from src.core.models import InstanceSegment, LabelMap, ProbVolume
from src.core.rle import BinaryMask
from src.fusion import NO_SEGMENT, FusionPolicy, fill_holes, fuse, resolve_instances

CAT = CITYSCAPES_19
ROAD, SKY, BUILDING = CAT.id_of("road"), CAT.id_of("sky"), CAT.id_of("building")
CAR, PERSON, TRUCK = CAT.id_of("car"), CAT.id_of("person"), CAT.id_of("truck")


def segment(indices, class_id, score, width=4, height=4):
    """Segment covering the given row-major pixel indices."""
    pixels = np.zeros(width * height, dtype=bool)
    pixels[list(indices)] = True
    return InstanceSegment(BinaryMask.from_array(pixels.reshape(height, width)), class_id, score)


def oracle(segments, width, height, policy=FusionPolicy()):
    """Naive reference: walk segments by descending score, subtracting a running set of claimed pixels."""
    order = sorted(range(len(segments)), key=lambda i: -segments[i].score)
    labels = [IGNORE_ID] * (width * height)
    claimed = set()
    for i in order:
        seg = segments[i]
        if policy.score_threshold is not None and seg.score < policy.score_threshold:
            continue
        grid = seg.mask.to_array()
        pixels = {y * width + x for y in range(height) for x in range(width) if grid[y, x]}
        if not pixels:
            continue
        free = pixels - claimed
        if policy.min_remaining_fraction is not None and len(free) / len(pixels) < policy.min_remaining_fraction:
            continue
        for p in free:
            labels[p] = seg.class_id
        claimed |= free
    return labels


A = segment({5, 6, 9, 10}, CAR, 0.9)
B = segment({6, 7, 10, 11}, PERSON, 0.7)


def test_empty_segment_list_is_all_holes():
    fg = resolve_instances([], (4, 4), CAT)
    assert fg.holes.all()
    assert (fg.labels.data == IGNORE_ID).all()


def test_overlap_goes_to_higher_score():
    """A keeps its four pixels; B loses the two it shares with A."""
    fg = resolve_instances([B, A], (4, 4), CAT)
    flat = fg.labels.data.ravel()
    assert [i for i in range(16) if flat[i] == CAR] == [5, 6, 9, 10]
    assert [i for i in range(16) if flat[i] == PERSON] == [7, 11]
    assert fg.kept == (1, 0)
    assert fg.surviving_pixels(0) == 2


def test_min_remaining_fraction_drops_segment():
    fg = resolve_instances([A, B], (4, 4), CAT, FusionPolicy(min_remaining_fraction=0.6))
    assert set(fg.labels.data.ravel().tolist()) == {CAR, IGNORE_ID}
    assert fg.dropped == (1,)


def test_score_threshold_skips_segment():
    fg = resolve_instances([A, B], (4, 4), CAT, FusionPolicy(score_threshold=0.8))
    assert fg.skipped == (1,)
    assert PERSON not in fg.labels.data


def test_equal_scores_keep_input_order():
    first = segment({0, 1}, CAR, 0.5)
    second = segment({1, 2}, TRUCK, 0.5)
    fg = resolve_instances([first, second], (4, 4), CAT)
    assert fg.labels.data.ravel()[1] == CAR
    fg = resolve_instances([second, first], (4, 4), CAT)
    assert fg.labels.data.ravel()[1] == TRUCK


def test_background_segment_rejected():
    with pytest.raises(ClassRoleError):
        resolve_instances([segment({0}, ROAD, 0.9)], (4, 4), CAT)


def test_dims_mismatch_rejected():
    with pytest.raises(SizeError):
        resolve_instances([segment({0}, CAR, 0.9, width=2, height=2)], (4, 4), CAT)


def test_empty_mask_skipped_with_warning(caplog):
    with caplog.at_level(logging.WARNING):
        fg = resolve_instances([segment(set(), CAR, 0.9), A], (4, 4), CAT)
    assert fg.skipped == (0,)
    assert fg.kept == (1,)
    assert "empty mask" in caplog.text


@pytest.mark.parametrize("field, value", [("score_threshold", 1.5), ("min_remaining_fraction", -0.1)])
def test_policy_validation(field, value):
    with pytest.raises(SpecError) as err:
        FusionPolicy(**{field: value})
    assert err.value.field_path == field


def test_fill_holes_example():
    """2x2: fg = [car, hole, hole, hole] + semantic [road, road, sky, person] -> [car, road, sky, person]."""
    fg = resolve_instances([segment({0}, CAR, 0.9, 2, 2)], (2, 2), CAT)
    semantic = LabelMap.from_flat([ROAD, ROAD, SKY, PERSON], 2, 2)
    assert fill_holes(fg, semantic).data.ravel().tolist() == [CAR, ROAD, SKY, PERSON]


def test_fill_holes_without_holes_ignores_semantic():
    fg = resolve_instances([segment(range(4), CAR, 0.9, 2, 2)], (2, 2), CAT)
    assert (fill_holes(fg, LabelMap.filled(SKY, 2, 2)).data == CAR).all()


def test_fill_holes_dims_mismatch():
    fg = resolve_instances([], (2, 2), CAT)
    with pytest.raises(SizeError):
        fill_holes(fg, LabelMap.filled(SKY, 3, 2))


def test_fuse_with_label_map():
    fused, fg = fuse([A, B], LabelMap.filled(BUILDING, 4, 4), CAT)
    flat = fused.data.ravel()
    assert [i for i in range(16) if flat[i] == CAR] == [5, 6, 9, 10]
    assert [i for i in range(16) if flat[i] == PERSON] == [7, 11]
    assert sum(flat == BUILDING) == 10
    assert fg.hole_fraction == pytest.approx(10 / 16)


def test_fuse_with_volume_and_no_segments():
    probs = np.zeros((3, 5, CAT.size))
    probs[:, :, CAT.class_ids.index(ROAD)] = 1.0
    fused, _ = fuse([], ProbVolume(probs), CAT)
    assert (fused.data == ROAD).all()


def test_fuse_full_image_segment_wins():
    fused, _ = fuse([segment(range(16), CAR, 0.1)], LabelMap.filled(SKY, 4, 4), CAT)
    assert (fused.data == CAR).all()


def _random_case(rng, size=16, max_segments=5):
    classes = sorted(CAT.foreground_ids)
    segments = []
    for _ in range(rng.integers(0, max_segments + 1)):
        pixels = rng.random((size, size)) < rng.uniform(0.05, 0.6)
        segments.append(InstanceSegment(
            BinaryMask.from_array(pixels),
            int(rng.choice(classes)),
            float(rng.choice([0.3, 0.6, 0.9])),  # ties on purpose
        ))
    return segments


def test_fused_map_partition_and_priority():
    """No ignore in the fused map; claimed pixels keep their instance label; surviving counts add up."""
    rng = np.random.default_rng(11)
    for _ in range(50):
        segments = _random_case(rng)
        semantic = LabelMap(rng.choice(CAT.class_ids, size=(16, 16)).astype(np.uint8))
        fused, fg = fuse(segments, semantic, CAT)
        assert IGNORE_ID not in fused.data
        claimed = fg.provenance != NO_SEGMENT
        assert np.array_equal(fused.data[claimed], fg.labels.data[claimed])
        assert sum(fg.surviving_pixels(i) for i in fg.kept) == int(claimed.sum())


def test_score_threshold_only_grows_holes():
    rng = np.random.default_rng(12)
    for _ in range(50):
        segments = _random_case(rng)
        base = resolve_instances(segments, (16, 16), CAT).holes
        for t in (0.3, 0.5, 0.7, 0.95):
            holes = resolve_instances(segments, (16, 16), CAT, FusionPolicy(score_threshold=t)).holes
            assert (holes | ~base).all()


@pytest.mark.slow
def test_matches_oracle_exhaustive_small_grid():
    """Up to three segments drawn from a fixed 4x4 shape family, every distinct score assignment."""
    shapes = (
        [{r * 4 + c, r * 4 + c + 1, r * 4 + c + 4, r * 4 + c + 5} for r in range(3) for c in range(3)]
        + [{r * 4 + c for c in range(4)} for r in range(4)]
        + [{r * 4 + c for r in range(4)} for c in range(4)]
    )
    classes = [CAR, PERSON, TRUCK]
    for n in range(1, 4):
        for combo in itertools.product(shapes, repeat=n):
            for scores in itertools.permutations([0.3, 0.6, 0.9], n):
                segments = [segment(s, classes[i], scores[i]) for i, s in enumerate(combo)]
                fg = resolve_instances(segments, (4, 4), CAT)
                assert fg.labels.data.ravel().tolist() == oracle(segments, 4, 4)


@pytest.mark.slow
def test_matches_oracle_random_with_ties():
    rng = np.random.default_rng(3)
    policies = [
        FusionPolicy(),
        FusionPolicy(score_threshold=0.5),
        FusionPolicy(min_remaining_fraction=0.5),
        FusionPolicy(score_threshold=0.6, min_remaining_fraction=0.3),
    ]
    for case in range(10_000):
        segments = _random_case(rng)
        policy = policies[case % len(policies)]
        fg = resolve_instances(segments, (16, 16), CAT, policy)
        assert fg.labels.data.ravel().tolist() == oracle(segments, 16, 16, policy)
