import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lowlight import (BoundingBox, DomainError, ImageGrid,
                      InsufficientAnnotationsError, Manifest, ManifestEntry,
                      ScatterParams, box_iou, box_mask, consensus_region,
                      enhance, load_manifest, save_manifest,
                      smooth_transmission_field, split_manifest, split_summary,
                      synthesize_pair)
from oracles import box_pixels

boxes_st = st.builds(BoundingBox, x=st.integers(0, 40), y=st.integers(0, 40),
                     w=st.integers(1, 30), h=st.integers(1, 30))


def _entry(i, split="train", stage="stage1_7to9pm", obj="single_person"):
    return ManifestEntry(image=f"img_{i}.png", gt=f"gt_{i}.png", split=split,
                         stage=stage, object_type=obj)


def _manifest(n):
    stages = ("stage1_7to9pm", "stage2_9to11pm")
    objs = ("single_person", "multiple_persons", "vehicle")
    return Manifest(tuple(_entry(i, stage=stages[i % 2], obj=objs[i % 3])
                          for i in range(n)))


class TestBoxIou:
    def test_identical(self):
        b = BoundingBox(3, 4, 10, 12)
        assert box_iou(b, b) == 1.0

    def test_disjoint(self):
        assert box_iou(BoundingBox(0, 0, 5, 5), BoundingBox(10, 10, 5, 5)) == 0.0

    def test_half_width_overlap(self):
        # two 10x10 boxes overlapping in a 5x10 strip: 50 / 150
        a = BoundingBox(0, 0, 10, 10)
        b = BoundingBox(5, 0, 10, 10)
        assert box_iou(a, b) == pytest.approx(1 / 3, abs=1e-12)

    @given(boxes_st, boxes_st)
    def test_symmetric_and_bounded(self, a, b):
        v = box_iou(a, b)
        assert v == box_iou(b, a)
        assert 0.0 <= v <= 1.0

    @given(boxes_st, boxes_st)
    def test_matches_pixel_arithmetic(self, a, b):
        pa = box_pixels(a.x, a.y, a.w, a.h)
        pb = box_pixels(b.x, b.y, b.w, b.h)
        want = len(pa & pb) / len(pa | pb)
        assert box_iou(a, b) == pytest.approx(want, abs=1e-12)

    def test_invalid_box(self):
        with pytest.raises(DomainError):
            BoundingBox(0, 0, 0, 5)
        with pytest.raises(DomainError):
            BoundingBox(-1, 0, 5, 5)


class TestConsensusRegion:
    def test_identical_boxes(self):
        b = BoundingBox(5, 5, 20, 20)
        assert consensus_region([b, b, b]) == b

    def test_disjoint_pair_rejected(self):
        boxes = [BoundingBox(0, 0, 10, 10), BoundingBox(30, 30, 10, 10),
                 BoundingBox(0, 0, 10, 10)]
        assert consensus_region(boxes) is None

    def test_too_few_boxes(self):
        with pytest.raises(InsufficientAnnotationsError):
            consensus_region([BoundingBox(0, 0, 5, 5)])

    def test_five_jittered_boxes(self):
        # 50x40 boxes shifted by up to 5px: worst pairwise IoU ~ 0.818
        shifts = [0, 1, 2, 3, 5]
        boxes = [BoundingBox(10 + s, 10, 50, 40) for s in shifts]
        for i in range(len(boxes)):
            for j in range(i + 1, len(boxes)):
                assert box_iou(boxes[i], boxes[j]) > 0.8
        region = consensus_region(boxes, threshold=0.8)
        assert region == BoundingBox(15, 10, 45, 40)
        # pixel-set oracle: region pixels = intersection of all box pixels
        sets = [box_pixels(b.x, b.y, b.w, b.h) for b in boxes]
        want = set.intersection(*sets)
        got = box_pixels(region.x, region.y, region.w, region.h)
        assert got == want

    def test_region_subset_of_every_box(self):
        rng = np.random.default_rng(0)
        for _ in range(25):
            x0, y0 = rng.integers(5, 20, size=2)
            boxes = [BoundingBox(int(x0 + rng.integers(0, 3)),
                                 int(y0 + rng.integers(0, 3)), 40, 40)
                     for _ in range(5)]
            region = consensus_region(boxes)
            assert region is not None
            rp = box_pixels(region.x, region.y, region.w, region.h)
            for b in boxes:
                assert rp <= box_pixels(b.x, b.y, b.w, b.h)

    def test_threshold_is_strict(self):
        # IoU exactly at the threshold must reject
        a = BoundingBox(0, 0, 10, 10)
        b = BoundingBox(5, 0, 10, 10)  # IoU = 1/3
        assert consensus_region([a, b], threshold=1 / 3) is None
        assert consensus_region([a, b], threshold=0.33) is not None


class TestSplitManifest:
    def test_577_entry_split(self):
        m = _manifest(577)
        tagged = split_manifest(m, 457 / 577, seed=0)
        counts = split_summary(tagged)
        assert counts["train"]["count"] == 457
        assert counts["test"]["count"] == 120

    def test_two_entry_ceiling(self):
        m = _manifest(2)
        tagged = split_manifest(m, 0.5, seed=1)
        # ceil(0.5 * 2) = 1
        assert split_summary(tagged)["train"]["count"] == 1
        tagged = split_manifest(m, 0.75, seed=1)
        # ceil(1.5) = 2
        assert split_summary(tagged)["train"]["count"] == 2

    def test_same_seed_same_assignment(self):
        m = _manifest(40)
        t1 = split_manifest(m, 0.7, seed=9)
        t2 = split_manifest(m, 0.7, seed=9)
        assert [e.split for e in t1.entries] == [e.split for e in t2.entries]

    def test_partition_complete(self):
        m = _manifest(33)
        tagged = split_manifest(m, 0.6, seed=2)
        assert all(e.split in ("train", "test") for e in tagged.entries)
        assert len(tagged) == 33
        assert [e.image for e in tagged.entries] == [e.image for e in m.entries]

    def test_fraction_bounds(self):
        with pytest.raises(DomainError):
            split_manifest(_manifest(4), 1.0, seed=0)

    def test_summary_counts_stages_and_types(self):
        tagged = split_manifest(_manifest(30), 0.5, seed=3)
        summary = split_summary(tagged)
        for split in ("train", "test"):
            assert sum(summary[split]["stage"].values()) == summary[split]["count"]
            assert sum(summary[split]["object_type"].values()) == summary[split]["count"]


class TestManifestIO:
    def test_json_round_trip(self, tmp_path):
        m = _manifest(7)
        path = tmp_path / "manifest.json"
        save_manifest(m, path)
        assert load_manifest(path) == m

    def test_json_schema_keys(self, tmp_path):
        path = tmp_path / "manifest.json"
        save_manifest(_manifest(2), path)
        rows = json.loads(path.read_text())
        assert isinstance(rows, list)
        assert set(rows[0]) == {"image", "gt", "split", "stage", "object_type"}

    def test_duplicate_paths_rejected(self):
        with pytest.raises(ValueError):
            Manifest((_entry(1), _entry(1)))

    def test_invalid_stage_rejected(self):
        with pytest.raises(DomainError):
            ManifestEntry(image="a.png", gt="b.png", split="train",
                          stage="midnight", object_type="vehicle")

    def test_no_temp_files_left(self, tmp_path):
        save_manifest(_manifest(3), tmp_path / "m.json")
        assert sorted(p.name for p in tmp_path.iterdir()) == ["m.json"]


class TestAnnotationRecord:
    def test_consensus_attached_after_acceptance(self):
        from dataclasses import replace

        from lowlight import AnnotationRecord

        boxes = [BoundingBox(10, 10, 30, 30), BoundingBox(11, 10, 30, 30)]
        record = AnnotationRecord(
            image_id="img_001",
            annotator_boxes=(("v1", (boxes[0],)), ("v2", (boxes[1],))))
        assert record.consensus is None
        region = consensus_region(boxes)
        assert region is not None
        accepted = replace(record, consensus=region)
        assert accepted.consensus == BoundingBox(11, 10, 29, 30)


class TestSynthesizePair:
    def test_flat_transmission_limit(self):
        # a radius covering the whole image flattens t to its mean; with
        # alpha=0 the light map is 1, so i = j * tbar + (1 - tbar)
        rng = np.random.default_rng(4)
        j = ImageGrid(rng.random((6, 6, 3)))
        params = ScatterParams(alpha=0.0, seed=5)
        i, a, t = synthesize_pair(j, params, t_smoothness=10, seed=6)
        tbar = t.values[0, 0]
        np.testing.assert_allclose(t.values, tbar, atol=1e-12)
        np.testing.assert_allclose(i.data, j.data * tbar + (1 - tbar),
                                   atol=1e-12)

    def test_deterministic(self):
        rng = np.random.default_rng(7)
        j = ImageGrid(rng.random((5, 5, 3)))
        params = ScatterParams(alpha=0.5, seed=1)
        first = synthesize_pair(j, params, t_smoothness=2, seed=2)
        second = synthesize_pair(j, params, t_smoothness=2, seed=2)
        for x, y in zip(first, second):
            arr_x = x.data if isinstance(x, ImageGrid) else x.values
            arr_y = y.data if isinstance(y, ImageGrid) else y.values
            assert np.array_equal(arr_x, arr_y)

    def test_enhance_recovers_source(self):
        rng = np.random.default_rng(8)
        j = ImageGrid(rng.random((8, 8, 3)))
        i, a, t = synthesize_pair(j, ScatterParams(alpha=0.5, seed=3),
                                  t_smoothness=1, seed=4)
        back = enhance(i, t, a)
        assert np.abs(back.data - j.data).max() <= 1e-5

    def test_outputs_satisfy_invariants(self):
        j = ImageGrid(np.random.default_rng(9).random((5, 7, 3)))
        i, a, t = synthesize_pair(j, ScatterParams(alpha=0.9, seed=10),
                                  t_smoothness=3, seed=11)
        assert 0.0 <= i.data.min() and i.data.max() <= 1.0
        assert 0.0 <= a.values.min() and a.values.max() <= 1.0
        assert t.t_min <= t.values.min() and t.values.max() <= 1.0

    def test_smooth_field_reproducible(self):
        f1 = smooth_transmission_field(6, 6, 2, seed=12)
        f2 = smooth_transmission_field(6, 6, 2, seed=12)
        assert np.array_equal(f1.values, f2.values)
