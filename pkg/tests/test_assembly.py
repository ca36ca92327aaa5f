import numpy as np
import pytest

from webact.assembly import (MixQuota, QuotaBucket, inject_noise, mix_sources,
                             split_train_val)
from webact.errors import ShortageError, ValidationError
from webact.records import SampleRecord, SampleSet, Source


def build_source_set(prefix, label, source, count, start_row=0):
    return SampleSet(tuple(
        SampleRecord(f"{prefix}{i:04d}", label, source, start_row + i)
        for i in range(count)))


def default_parts(rng, classes=("archery",), n_img=450, n_vid=520, n_gif=110):
    parts = []
    row = 0
    for label in classes:
        for prefix, source, count in (
                (f"{label}_g", Source.GOOGLE_IMAGE, n_img // 2),
                (f"{label}_f", Source.FLICKR, n_img - n_img // 2),
                (f"{label}_y", Source.YOUTUBE_FRAME, n_vid),
                (f"{label}_a", Source.GIF_FRAME, n_gif)):
            samples = build_source_set(prefix, label, source, count, row)
            row += count
            parts.append((samples, rng.random(count)))
    return parts


class TestMixQuota:
    def test_default_totals_1000(self):
        quota = MixQuota.default()
        assert quota.total == 1000
        assert [b.count for b in quota.buckets] == [400, 500, 100]

    def test_source_in_two_buckets_rejected(self):
        with pytest.raises(ValidationError, match="two buckets"):
            MixQuota((
                QuotaBucket("a", (Source.FLICKR,), 1),
                QuotaBucket("b", (Source.FLICKR,), 1),
            ))

    def test_zero_total_rejected(self):
        with pytest.raises(ValidationError, match="total"):
            MixQuota((QuotaBucket("a", (Source.FLICKR,), 0),))


class TestMixSources:
    def test_paper_quota_yields_1000_per_class(self):
        rng = np.random.default_rng(0)
        parts = default_parts(rng, classes=("archery", "diving"))
        mixed = mix_sources(parts, MixQuota.default())
        assert len(mixed) == 2000
        for label in ("archery", "diving"):
            assert mixed.indices_for_class(label).shape[0] == 1000

    def test_zero_quota_bucket_absent(self):
        rng = np.random.default_rng(1)
        parts = default_parts(rng)
        quota = MixQuota((
            QuotaBucket("web_images", (Source.GOOGLE_IMAGE, Source.FLICKR), 400),
            QuotaBucket("video_frames", (Source.YOUTUBE_FRAME,), 500),
            QuotaBucket("gif_frames", (Source.GIF_FRAME,), 0),
        ))
        mixed = mix_sources(parts, quota)
        assert len(mixed) == 900
        assert not any(rec.source is Source.GIF_FRAME for rec in mixed)

    def test_exact_expected_manifest_on_small_fixture(self):
        # two classes, tiny quotas, hand-enumerated relevance ordering
        quota = MixQuota((
            QuotaBucket("web_images", (Source.GOOGLE_IMAGE, Source.FLICKR), 2),
            QuotaBucket("video_frames", (Source.YOUTUBE_FRAME,), 1),
        ))
        imgs_a = SampleSet((
            SampleRecord("a_img0", "a", Source.GOOGLE_IMAGE, 0),
            SampleRecord("a_img1", "a", Source.FLICKR, 1),
            SampleRecord("a_img2", "a", Source.GOOGLE_IMAGE, 2),
        ))
        vids_a = SampleSet((
            SampleRecord("a_vid0", "a", Source.YOUTUBE_FRAME, 3, video_id="v", frame_index=0),
            SampleRecord("a_vid1", "a", Source.YOUTUBE_FRAME, 4, video_id="v", frame_index=1),
        ))
        imgs_b = SampleSet((
            SampleRecord("b_img0", "b", Source.FLICKR, 5),
            SampleRecord("b_img1", "b", Source.FLICKR, 6),
        ))
        vids_b = SampleSet((
            SampleRecord("b_vid0", "b", Source.YOUTUBE_FRAME, 7, video_id="w", frame_index=0),
        ))
        parts = [
            (imgs_a, np.array([0.2, 0.5, 0.3])),
            (vids_a, np.array([0.1, 0.9])),
            (imgs_b, np.array([0.4, 0.6])),
            (vids_b, np.array([1.0])),
        ]
        mixed = mix_sources(parts, quota)
        assert mixed.ids == ("a_img1", "a_img2", "a_vid1",
                             "b_img1", "b_img0", "b_vid0")

    def test_shortage_names_class_and_bucket(self):
        imgs = SampleSet((SampleRecord("x0", "kayaking", Source.FLICKR, 0),))
        quota = MixQuota((QuotaBucket("web_images", (Source.FLICKR,), 5),))
        with pytest.raises(ShortageError, match="kayaking.*web_images"):
            mix_sources([(imgs, np.array([1.0]))], quota)

    def test_allow_short_takes_everything(self):
        imgs = SampleSet((SampleRecord("x0", "kayaking", Source.FLICKR, 0),))
        quota = MixQuota((QuotaBucket("web_images", (Source.FLICKR,), 5),))
        mixed = mix_sources([(imgs, np.array([1.0]))], quota, allow_short=True)
        assert mixed.ids == ("x0",)

    def test_output_only_contains_inputs(self):
        rng = np.random.default_rng(2)
        parts = default_parts(rng)
        mixed = mix_sources(parts, MixQuota.default())
        all_ids = {rec.id for samples, _ in parts for rec in samples}
        assert set(mixed.ids) <= all_ids


class TestSplitTrainVal:
    def test_80_20_per_class(self):
        samples = SampleSet(tuple(
            SampleRecord(f"{label}{i}", label, Source.OTHER, 0)
            for label in ("a", "b") for i in range(10)))
        train, val = split_train_val(samples, 0.8, seed=3)
        assert len(train) == 16 and len(val) == 4
        for label in ("a", "b"):
            assert train.indices_for_class(label).shape[0] == 8
            assert val.indices_for_class(label).shape[0] == 2

    def test_same_seed_same_split(self):
        samples = SampleSet(tuple(
            SampleRecord(f"s{i}", "x", Source.OTHER, 0) for i in range(30)))
        a = split_train_val(samples, 0.8, seed=7)
        b = split_train_val(samples, 0.8, seed=7)
        assert a[0].ids == b[0].ids and a[1].ids == b[1].ids
        c = split_train_val(samples, 0.8, seed=8)
        assert c[0].ids != a[0].ids

    def test_partition_property(self):
        rng = np.random.default_rng(4)
        samples = SampleSet(tuple(
            SampleRecord(f"s{i}", f"c{int(rng.integers(3))}", Source.OTHER, 0)
            for i in range(57)))
        train, val = split_train_val(samples, 0.7, seed=1)
        assert set(train.ids) | set(val.ids) == set(samples.ids)
        assert set(train.ids) & set(val.ids) == set()
        for label in samples.class_labels:
            n = samples.indices_for_class(label).shape[0]
            n_train = train.indices_for_class(label).shape[0]
            assert abs(n_train - 0.7 * n) <= 1

    def test_tiny_class_rejected(self):
        samples = SampleSet((SampleRecord("only", "x", Source.OTHER, 0),
                             SampleRecord("b0", "y", Source.OTHER, 1),
                             SampleRecord("b1", "y", Source.OTHER, 2)))
        with pytest.raises(ValidationError, match="'x'"):
            split_train_val(samples, 0.8, seed=0)

    def test_ratio_bounds(self):
        samples = SampleSet((SampleRecord("a", "x", Source.OTHER, 0),
                             SampleRecord("b", "x", Source.OTHER, 1)))
        for ratio in (0.0, 1.0, -0.2):
            with pytest.raises(ValidationError):
                split_train_val(samples, ratio, seed=0)


class TestInjectNoise:
    def make_sets(self, n_clean=100, n_pool=40):
        clean = build_source_set("c", "target", Source.OTHER, n_clean)
        pool = SampleSet(tuple(
            SampleRecord(f"d{i:04d}", f"other{i % 5}", Source.OTHER, n_clean + i)
            for i in range(n_pool)))
        return clean, pool

    def test_zero_fraction_identity(self):
        clean, pool = self.make_sets()
        bench = inject_noise(clean, pool, 0.0, seed=0)
        assert bench.samples.ids == clean.ids
        assert bench.inlier_mask.all()

    def test_fifteen_percent(self):
        clean, pool = self.make_sets()
        bench = inject_noise(clean, pool, 0.15, seed=0)
        assert len(bench.samples) == 115
        assert int(bench.inlier_mask.sum()) == 100
        assert int((~bench.inlier_mask).sum()) == 15

    def test_injected_masquerade_as_clean_class(self):
        clean, pool = self.make_sets()
        bench = inject_noise(clean, pool, 0.1, seed=0)
        assert all(rec.class_label == "target" for rec in bench.samples)

    def test_seeded_determinism(self):
        clean, pool = self.make_sets()
        a = inject_noise(clean, pool, 0.2, seed=5)
        b = inject_noise(clean, pool, 0.2, seed=5)
        assert a.samples.ids == b.samples.ids

    def test_insufficient_distractors(self):
        clean, pool = self.make_sets(n_clean=100, n_pool=5)
        with pytest.raises(ShortageError):
            inject_noise(clean, pool, 0.2, seed=0)

    def test_multi_class_clean_rejected(self):
        clean = SampleSet((SampleRecord("a", "x", Source.OTHER, 0),
                           SampleRecord("b", "y", Source.OTHER, 1)))
        _, pool = self.make_sets()
        with pytest.raises(ValidationError, match="one class"):
            inject_noise(clean, pool, 0.1, seed=0)
