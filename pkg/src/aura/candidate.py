"""Percentile-thresholded candidate hole-masks and judge-based selection.

Candidate j masks the top-k_j pixels of the importance map where

    k_j = ceil((P_j / 100 + area(target) / (H * W)) * H * W)

i.e. the percentile budget plus the target's own area share.  Ranking
is by (value descending, row-major pixel index ascending); the
deterministic tie-break makes candidate cardinalities exact and masks
nested as P_j grows.  The best candidate is the one whose completion
the judge scores highest, ties resolved toward the smallest index.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import HoleMask, Image, area, complement
from .imageio import save_mask
from .importance import ImportanceMap
from .judge import Judge, JudgeBreakdown


@dataclass(frozen=True)
class Candidate:
    percentile: float
    threshold: float
    mask: HoleMask
    score: JudgeBreakdown | None = None
    contains_target: bool | None = None


@dataclass(frozen=True)
class CandidateSet:
    candidates: tuple
    selected_index: int

    @property
    def selected(self) -> Candidate:
        return self.candidates[self.selected_index]

    def __len__(self) -> int:
        return len(self.candidates)


def _ranking(imap: ImportanceMap) -> np.ndarray:
    """Flat pixel indices ordered by value descending, index ascending on ties."""
    flat = imap.values.ravel()
    return np.argsort(-flat, kind="stable")


def target_count(imap: ImportanceMap, percentile: float, target: HoleMask) -> int:
    n_pixels = imap.height * imap.width
    target_share = area(target) / n_pixels
    limit = 100.0 * (1.0 - target_share)
    if not 0.0 < percentile <= limit:
        raise ValueError(
            f"percentile {percentile} outside (0, {limit:.6g}]; the mask would exceed the image"
        )
    return math.ceil((percentile / 100.0 + target_share) * n_pixels)


def percentile_threshold(imap: ImportanceMap, percentile: float, target: HoleMask) -> float:
    """Value of the k-th ranked pixel, k from the percentile-plus-target budget."""
    k = target_count(imap, percentile, target)
    order = _ranking(imap)
    return float(imap.values.ravel()[order[k - 1]])


def candidate_mask(imap: ImportanceMap, threshold: float, count: int) -> HoleMask:
    """Hole mask of exactly the top-``count`` ranked pixels.

    ``threshold`` must be the value at rank ``count``; the count carries the
    tie-break information that the bare threshold cannot.
    """
    order = _ranking(imap)
    flat = imap.values.ravel()
    if not 1 <= count <= flat.size:
        raise ValueError(f"count {count} out of range")
    if flat[order[count - 1]] != threshold:
        raise ValueError("threshold does not match the value at the requested rank")
    bits = np.zeros(flat.size, dtype=bool)
    bits[order[:count]] = True
    return HoleMask(bits.reshape(imap.values.shape))


def generate_candidates(imap: ImportanceMap, target: HoleMask, p_max: int = 20) -> list:
    """Unscored candidates for percentiles 1..p_max."""
    if p_max < 1:
        raise ValueError("p_max must be >= 1")
    order = _ranking(imap)
    flat = imap.values.ravel()
    out = []
    for percentile in range(1, p_max + 1):
        k = target_count(imap, float(percentile), target)
        threshold = float(flat[order[k - 1]])
        bits = np.zeros(flat.size, dtype=bool)
        bits[order[:k]] = True
        mask = HoleMask(bits.reshape(imap.values.shape))
        contains = bool(mask.bits[target.bits].all())
        out.append(Candidate(float(percentile), threshold, mask, None, contains))
    return out


def select_best(image: Image, target: HoleMask, candidates, judge: Judge) -> CandidateSet:
    """Score every candidate's completion and pick the argmax total.

    Candidates are hole masks; the inpainter sees their complements.
    """
    candidates = list(candidates)
    if not candidates:
        raise ValueError("need at least one candidate")
    scored = []
    best_index = 0
    best_total = -math.inf
    for i, cand in enumerate(candidates):
        score = judge.score(complement(cand.mask))
        contains = (
            cand.contains_target
            if cand.contains_target is not None
            else bool(cand.mask.bits[target.bits].all())
        )
        scored.append(Candidate(cand.percentile, cand.threshold, cand.mask, score, contains))
        if score.total > best_total:
            best_total = score.total
            best_index = i
    return CandidateSet(candidates=tuple(scored), selected_index=best_index)


def save_candidates(cset: CandidateSet, out_dir) -> None:
    """One PGM per candidate, a JSON-lines score table, `aura_mask.pgm` for the pick."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = []
    for i, cand in enumerate(cset.candidates):
        save_mask(cand.mask, out_dir / f"candidate_{int(cand.percentile):02d}.pgm")
        row = {
            "index": i,
            "percentile": cand.percentile,
            "threshold": cand.threshold,
            "hole_area": area(cand.mask),
            "contains_target": cand.contains_target,
            "selected": i == cset.selected_index,
        }
        if cand.score is not None:
            row.update(
                background=cand.score.background,
                afterimage=cand.score.afterimage,
                detect=cand.score.detect,
                total=cand.score.total,
            )
        rows.append(row)
    with open(out_dir / "scores.jsonl", "w") as fh:
        for row in rows:
            fh.write(json.dumps(row) + "\n")
    save_mask(cset.selected.mask, out_dir / "aura_mask.pgm")
