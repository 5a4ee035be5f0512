import numpy as np
import pytest

from aura.core import HoleMask, area, complement
from aura.sampler import (
    MaskBatch,
    SamplerConfig,
    dump_batch,
    mask_stream,
    sample_batch,
    sample_mask,
)


def single_pixel_target(size=64):
    bits = np.zeros((size, size), bool)
    bits[size // 2, size // 2] = True
    return HoleMask(bits)


class TestConfig:
    def test_defaults_match_operating_point(self):
        cfg = SamplerConfig()
        assert cfg.n_samples == 2000
        assert (cfg.patch_count_min, cfg.patch_count_max) == (3, 5)
        assert cfg.anchored_patch_count == 3
        assert (cfg.radius_min, cfg.radius_max) == (10, 40)

    @pytest.mark.parametrize("kwargs", [
        dict(n_samples=0),
        dict(patch_count_min=5, patch_count_max=3),
        dict(patch_count_min=-1),
        dict(radius_min=0),
        dict(radius_min=9, radius_max=5),
        dict(anchored_patch_count=4),  # exceeds patch_count_min
    ])
    def test_invalid(self, kwargs):
        with pytest.raises(ValueError):
            SamplerConfig(**kwargs)


class TestSampleMask:
    def test_target_always_holed(self, center_target):
        cfg = SamplerConfig(radius_min=2, radius_max=4)
        for i in range(25):
            mask = sample_mask(center_target, cfg, mask_stream(3, i))
            assert not mask.bits[center_target.bits].any()

    def test_hole_never_shrinks(self, center_target):
        cfg = SamplerConfig(radius_min=2, radius_max=4)
        for i in range(25):
            mask = sample_mask(center_target, cfg, mask_stream(4, i))
            holes = ~mask.bits
            assert holes.sum() >= area(center_target)

    def test_no_patches_override_gives_bare_complement(self, center_target):
        cfg = SamplerConfig(patch_count_min=0, patch_count_max=0, anchored_patch_count=0)
        mask = sample_mask(center_target, cfg, mask_stream(0, 0))
        assert np.array_equal(mask.bits, complement(center_target).bits)

    def test_empty_target_rejected(self):
        with pytest.raises(ValueError):
            sample_mask(HoleMask.zeros(8, 8), SamplerConfig(), mask_stream(0, 0))

    def test_draws_replayable_from_published_stream(self):
        """Re-derive one mask from the documented per-index draw order."""
        target = single_pixel_target(32)
        cfg = SamplerConfig(patch_count_min=2, patch_count_max=4,
                            anchored_patch_count=1, radius_min=3, radius_max=6, seed=9)
        index = 5
        mask = sample_mask(target, cfg, mask_stream(cfg.seed, index))

        rng = mask_stream(cfg.seed, index)
        expected = ~target.bits
        k = int(rng.integers(cfg.patch_count_min, cfg.patch_count_max + 1))
        anchors = np.argwhere(target.bits)
        height, width = target.bits.shape
        for j in range(k):
            r = int(rng.integers(cfg.radius_min, cfg.radius_max + 1))
            if j < cfg.anchored_patch_count:
                ay, ax = anchors[int(rng.integers(0, len(anchors)))]
                cx = ax + rng.uniform(-r, r)
                cy = ay + rng.uniform(-r, r)
            else:
                cx = rng.uniform(-r, width + r)
                cy = rng.uniform(-r, height + r)
            yy, xx = np.mgrid[0:height, 0:width]
            expected &= ~((yy - cy) ** 2 + (xx - cx) ** 2 <= r * r)
        assert np.array_equal(mask.bits, expected)

    def test_mean_disk_area_matches_analytic_expectation(self):
        """One anchored unit patch of fixed radius around a single-pixel target.

        With the center jittered uniformly in a box the patch never reaches
        the border, so the expected pixel count of the rasterized disk is
        exactly pi*r^2; the target pixel itself escapes the disk with
        probability 1 - pi/4 (it then adds one hole of its own).
        """
        r = 5
        target = single_pixel_target(64)
        cfg = SamplerConfig(patch_count_min=1, patch_count_max=1,
                            anchored_patch_count=1, radius_min=r, radius_max=r, seed=7)
        draws = 10_000
        base = area(target)
        extra = np.empty(draws)
        for i in range(draws):
            mask = sample_mask(target, cfg, mask_stream(cfg.seed, i))
            extra[i] = (~mask.bits).sum() - base
        expected = np.pi * r * r + (1.0 - np.pi / 4.0) - 1.0
        assert abs(extra.mean() - expected) <= 0.05 * expected


class TestBatch:
    def test_same_seed_identical(self, center_target):
        cfg = SamplerConfig(n_samples=16, radius_min=2, radius_max=4, seed=11)
        a = sample_batch(center_target, cfg)
        b = sample_batch(center_target, cfg)
        assert all(np.array_equal(x.bits, y.bits) for x, y in zip(a.masks, b.masks))

    def test_adjacent_seeds_differ(self, center_target):
        cfg = SamplerConfig(n_samples=16, radius_min=2, radius_max=4, seed=11)
        other = SamplerConfig(n_samples=16, radius_min=2, radius_max=4, seed=12)
        a = sample_batch(center_target, cfg)
        b = sample_batch(center_target, other)
        assert any(not np.array_equal(x.bits, y.bits) for x, y in zip(a.masks, b.masks))

    def test_default_length_is_2000(self):
        target = single_pixel_target(24)
        batch = sample_batch(target, SamplerConfig(radius_min=2, radius_max=3, seed=0))
        assert len(batch) == 2000

    def test_index_streams_are_order_independent(self, center_target):
        cfg = SamplerConfig(n_samples=8, radius_min=2, radius_max=4, seed=5)
        batch = sample_batch(center_target, cfg)
        # regenerating any single index in isolation reproduces that mask
        for i in (7, 0, 3):
            lone = sample_mask(center_target, cfg, mask_stream(cfg.seed, i))
            assert np.array_equal(lone.bits, batch.masks[i].bits)

    def test_default_config_covers_every_pixel(self):
        """2000 default-config masks hole every pixel of a 256x256 fixture."""
        size = 256
        bits = np.zeros((size, size), bool)
        bits[100:180, 90:174] = True  # ~10% of the image
        target = HoleMask(bits)
        cfg = SamplerConfig(seed=3)
        covered = np.zeros((size, size), bool)
        for i in range(cfg.n_samples):
            covered |= ~sample_mask(target, cfg, mask_stream(cfg.seed, i)).bits
            if covered.all():
                break
        assert covered.all()

    def test_dump_writes_masks_and_manifest(self, center_target, tmp_path):
        cfg = SamplerConfig(n_samples=3, radius_min=2, radius_max=3, seed=2)
        batch = sample_batch(center_target, cfg)
        dump_batch(batch, tmp_path)
        assert (tmp_path / "manifest.json").exists()
        assert len(list(tmp_path.glob("mask_*.pgm"))) == 3
