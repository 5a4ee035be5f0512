import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aura.candidate import (
    Candidate,
    candidate_mask,
    generate_candidates,
    percentile_threshold,
    save_candidates,
    select_best,
    target_count,
)
from aura.core import HoleMask, Image, KeepMask, area
from aura.importance import ImportanceMap
from aura.judge import JudgeBreakdown


def ramp_map(h=4, w=4):
    return ImportanceMap(values=np.arange(h * w, dtype=float).reshape(h, w))


def top_pixel_target(h=4, w=4):
    bits = np.zeros((h, w), bool)
    bits[h - 1, w - 1] = True  # the ramp's maximum
    return HoleMask(bits)


class StubJudge:
    def __init__(self, totals):
        self.totals = list(totals)
        self.calls = 0

    def score(self, keep):
        total = self.totals[self.calls]
        self.calls += 1
        return JudgeBreakdown(background=total, afterimage=0.0, detect=0.0,
                              lambda_a=0.0, lambda_d=0.0)


def sort_oracle_top_k(values: np.ndarray, k: int) -> np.ndarray:
    """Reference top-k selection: sort (value desc, row-major index asc)."""
    flat = values.ravel()
    ranked = sorted(range(flat.size), key=lambda i: (-flat[i], i))
    bits = np.zeros(flat.size, dtype=bool)
    bits[ranked[:k]] = True
    return bits.reshape(values.shape)


class TestPercentileThreshold:
    def test_ramp_second_largest(self):
        imap = ramp_map()
        target = top_pixel_target()
        # percentile chosen so the budget is exactly two pixels
        phi = percentile_threshold(imap, 6.25, target)
        assert phi == 14.0
        assert target_count(imap, 6.25, target) == 2

    def test_constant_map_returns_constant(self):
        imap = ImportanceMap(values=np.full((4, 4), 3.5))
        assert percentile_threshold(imap, 25.0, top_pixel_target()) == 3.5

    def test_max_percentile_selects_everything(self):
        imap = ramp_map()
        target = top_pixel_target()
        limit = 100.0 * (1 - 1 / 16)
        assert target_count(imap, limit, target) == 16
        assert percentile_threshold(imap, limit, target) == imap.values.min()

    @pytest.mark.parametrize("percentile", [0.0, -5.0, 95.0])
    def test_out_of_range_rejected(self, percentile):
        with pytest.raises(ValueError):
            percentile_threshold(ramp_map(), percentile, top_pixel_target())


class TestCandidateMask:
    def test_ramp_top_two(self):
        imap = ramp_map()
        mask = candidate_mask(imap, 14.0, 2)
        assert np.array_equal(mask.bits, sort_oracle_top_k(imap.values, 2))

    def test_full_count_is_all_ones(self):
        imap = ramp_map()
        mask = candidate_mask(imap, 0.0, 16)
        assert mask.bits.all()

    def test_ties_break_row_major(self):
        imap = ImportanceMap(values=np.zeros((3, 3)))
        mask = candidate_mask(imap, 0.0, 4)
        expected = np.zeros(9, bool)
        expected[:4] = True
        assert np.array_equal(mask.bits.ravel(), expected)

    def test_threshold_rank_mismatch_rejected(self):
        with pytest.raises(ValueError):
            candidate_mask(ramp_map(), 13.0, 2)  # rank-2 value is 14


class TestGenerateCandidates:
    @given(st.integers(0, 10_000))
    @settings(max_examples=25, deadline=None)
    def test_nested_with_exact_cardinality(self, seed):
        rng = np.random.default_rng(seed)
        h, w = 8, 8
        values = rng.choice([0.0, 0.5, 1.0, 2.0], size=(h, w))  # plenty of ties
        bits = np.zeros((h, w), bool)
        bits[rng.integers(0, h), rng.integers(0, w)] = True
        target = HoleMask(bits)
        imap = ImportanceMap(values=values)
        cands = generate_candidates(imap, target, p_max=12)
        n_pixels = h * w
        prev = np.zeros((h, w), bool)
        for j, cand in enumerate(cands, start=1):
            expected_k = math.ceil((j / 100 + area(target) / n_pixels) * n_pixels)
            assert area(cand.mask) == expected_k
            assert np.all(cand.mask.bits | ~prev)  # nesting
            prev = cand.mask.bits

    def test_affine_transform_preserves_masks(self):
        rng = np.random.default_rng(4)
        values = rng.normal(size=(6, 6))
        target = HoleMask(np.eye(6, dtype=bool))
        a = generate_candidates(ImportanceMap(values=values), target, 5)
        b = generate_candidates(ImportanceMap(values=3.0 * values + 2.0), target, 5)
        for ca, cb in zip(a, b):
            assert np.array_equal(ca.mask.bits, cb.mask.bits)

    def test_contains_target_flag(self):
        imap = ramp_map()
        cands = generate_candidates(imap, top_pixel_target(), 3)
        assert all(c.contains_target for c in cands)  # top pixel ranks first
        low_target = HoleMask(np.array(np.arange(16).reshape(4, 4) == 0))
        cands = generate_candidates(imap, low_target, 3)
        assert not any(c.contains_target for c in cands)  # bottom pixel never enters


class TestSelectBest:
    def _candidates(self, k=3):
        imap = ramp_map()
        target = top_pixel_target()
        return generate_candidates(imap, target, k), imap, target

    def test_single_candidate(self, gray_image):
        cands, imap, target = self._candidates(1)
        cset = select_best(gray_image, target, cands, StubJudge([1.0]))
        assert cset.selected_index == 0

    def test_argmax_selection(self, gray_image):
        cands, imap, target = self._candidates(3)
        cset = select_best(gray_image, target, cands, StubJudge([0.1, 0.7, 0.3]))
        assert cset.selected_index == 1
        assert cset.selected.score.total == 0.7
        assert all(cset.selected.score.total >= c.score.total for c in cset.candidates)

    def test_tie_takes_smallest_index(self, gray_image):
        cands, imap, target = self._candidates(3)
        cset = select_best(gray_image, target, cands, StubJudge([0.5, 0.5, 0.5]))
        assert cset.selected_index == 0

    def test_constant_shift_keeps_choice(self, gray_image):
        cands, imap, target = self._candidates(3)
        base = [0.2, -0.4, 0.9]
        first = select_best(gray_image, target, cands, StubJudge(base))
        shifted = select_best(gray_image, target, cands, StubJudge([t + 123.0 for t in base]))
        assert first.selected_index == shifted.selected_index

    def test_empty_candidates_rejected(self, gray_image):
        with pytest.raises(ValueError):
            select_best(gray_image, top_pixel_target(), [], StubJudge([]))

    def test_gray_image_argument_unused_shape_ok(self):
        # the judged keep-mask is the complement of each candidate
        imap = ramp_map()
        target = top_pixel_target()
        cands = generate_candidates(imap, target, 2)
        seen = []

        class Spy:
            def score(self, keep):
                seen.append(keep)
                return JudgeBreakdown(0.0, 0.0, 0.0, 0.0, 0.0)

        select_best(Image.constant(0.5, 4, 4), target, cands, Spy())
        for keep, cand in zip(seen, cands):
            assert isinstance(keep, KeepMask)
            assert np.array_equal(keep.bits, ~cand.mask.bits)


class TestSerialization:
    def test_directory_layout(self, gray_image, tmp_path):
        imap = ramp_map()
        target = top_pixel_target()
        cands = generate_candidates(imap, target, 3)
        cset = select_best(gray_image, target, cands, StubJudge([0.0, 1.0, 0.5]))
        out = tmp_path / "cands"
        save_candidates(cset, out)
        assert (out / "aura_mask.pgm").exists()
        assert len(list(out.glob("candidate_*.pgm"))) == 3
        rows = [json.loads(line) for line in (out / "scores.jsonl").read_text().splitlines()]
        assert len(rows) == 3
        assert rows[1]["selected"] is True
        assert rows[1]["total"] == 1.0
        from aura.imageio import load_hole_mask
        saved = load_hole_mask(out / "aura_mask.pgm")
        assert np.array_equal(saved.bits, cset.selected.mask.bits)
