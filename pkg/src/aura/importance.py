"""Per-pixel importance estimation from scored random masks.

The importance of a pixel is the expected judge total conditioned on
that pixel being holed.  (Conditioning on the pixel being *visible*
gives the familiar saliency-style dual; this module implements the
hole-conditioned form, which is the one the mask generator needs.)
The Monte-Carlo estimate accumulates, per pixel, the sum of judge
totals of every sample that holed it, then divides by the per-pixel
hole count.  Pixels never holed by any sample get a sentinel value one
below the smallest finalized value, so they can never enter a
candidate mask.

Determinism: accumulation folds per-sample contributions with a fixed
pairwise tree over sample indices (binary-carry merging), so the
finalized map is bit-identical for any worker count or evaluation
order.  ``exact_importance`` evaluates the same conditional expectation
by full enumeration of a small weighted mask family and serves as the
test oracle for the estimator.
"""
from __future__ import annotations

import multiprocessing
import struct
import sys
from dataclasses import dataclass

import numpy as np

from .core import HoleMask, Image, KeepMask
from .imageio import save_image
from .judge import Judge, JudgeBreakdown

_MAGIC = b"AIM1"
_HEADER = struct.Struct("<4sIIIq")


@dataclass(frozen=True)
class ScoredSample:
    mask: KeepMask
    score: JudgeBreakdown

    def __post_init__(self):
        if not np.isfinite(self.score.total):
            raise ValueError("sample score must be finite")


@dataclass(frozen=True, eq=False)
class ImportanceMap:
    values: np.ndarray
    coverage: np.ndarray | None = None
    standard_error: np.ndarray | None = None
    n_samples: int = 0
    seed: int = 0

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]

    def variance_diagnostic(self) -> float:
        """Mean squared standard error of the per-pixel estimates."""
        if self.standard_error is None or self.coverage is None:
            return float("nan")
        covered = self.coverage > 0
        if not covered.any():
            return float("nan")
        sem = self.standard_error[covered]
        return float((sem * sem).mean())


class ImportanceAccumulator:
    """Running per-pixel sums: score totals, their squares, hole counts."""

    def __init__(self, height: int, width: int):
        self.values = np.zeros((height, width))
        self.sumsq = np.zeros((height, width))
        self.coverage = np.zeros((height, width), dtype=np.int64)

    def add(self, sample: ScoredSample) -> "ImportanceAccumulator":
        hole = ~sample.mask.bits
        if hole.shape != self.values.shape:
            raise ValueError("sample mask does not match accumulator dimensions")
        total = sample.score.total
        self.values[hole] += total
        self.sumsq[hole] += total * total
        self.coverage[hole] += 1
        return self

    def merge(self, other: "ImportanceAccumulator") -> "ImportanceAccumulator":
        self.values += other.values
        self.sumsq += other.sumsq
        self.coverage += other.coverage
        return self


def accumulate(acc: ImportanceAccumulator, sample: ScoredSample) -> ImportanceAccumulator:
    return acc.add(sample)


def finalize(acc: ImportanceAccumulator, n_samples: int = 0, seed: int = 0) -> ImportanceMap:
    covered = acc.coverage > 0
    if not covered.any():
        raise ValueError("no sample holed any pixel; importance undefined everywhere")
    values = np.empty_like(acc.values)
    counts = acc.coverage[covered]
    means = acc.values[covered] / counts
    values[covered] = means
    values[~covered] = means.min() - 1.0  # sentinel: rank below all evidence
    sem = np.zeros_like(acc.values)
    variances = np.maximum(acc.sumsq[covered] / counts - means * means, 0.0)
    sem[covered] = np.sqrt(variances / counts)
    return ImportanceMap(
        values=values,
        coverage=acc.coverage.copy(),
        standard_error=sem,
        n_samples=n_samples,
        seed=seed,
    )


def _pairwise_fold(contributions) -> ImportanceAccumulator:
    """Binary-carry pairwise reduction in index order (fixed tree shape)."""
    stack = []  # (level, accumulator)
    for acc in contributions:
        level = 0
        while stack and stack[-1][0] == level:
            prev_level, prev = stack.pop()
            acc = prev.merge(acc)
            level = prev_level + 1
        stack.append((level, acc))
    result = None
    while stack:
        _, acc = stack.pop()
        result = acc if result is None else acc.merge(result)
    return result


_WORKER_STATE = {}


def _pool_init(judge, masks):
    _WORKER_STATE["judge"] = judge
    _WORKER_STATE["masks"] = masks


def _score_range(bounds):
    start, stop = bounds
    judge = _WORKER_STATE["judge"]
    masks = _WORKER_STATE["masks"]
    return [judge.score(masks[i]) for i in range(start, stop)]


def score_batch(masks, judge: Judge, workers: int = 1, progress=None) -> list:
    """Judge every mask; results are index-aligned and worker-count independent."""
    n = len(masks)
    if workers <= 1 or n < 8:
        out = []
        for i, mask in enumerate(masks):
            out.append(judge.score(mask))
            if progress:
                progress(i + 1, n)
        return out
    chunk = max(1, -(-n // (workers * 4)))
    ranges = [(i, min(i + chunk, n)) for i in range(0, n, chunk)]
    ctx = multiprocessing.get_context("fork")
    scores = [None] * n
    done = 0
    with ctx.Pool(workers, initializer=_pool_init, initargs=(judge, tuple(masks))) as pool:
        for (start, stop), part in zip(ranges, pool.imap(_score_range, ranges)):
            scores[start:stop] = part
            done += stop - start
            if progress:
                progress(done, n)
    return scores


def estimate_importance(
    image: Image,
    target: HoleMask,
    batch,
    judge: Judge,
    workers: int = 1,
    progress=None,
) -> ImportanceMap:
    """Monte-Carlo importance over a sampled mask batch."""
    scores = score_batch(batch.masks, judge, workers=workers, progress=progress)
    height, width = image.height, image.width

    def contributions():
        for mask, score in zip(batch.masks, scores):
            yield ImportanceAccumulator(height, width).add(ScoredSample(mask, score))

    acc = _pairwise_fold(contributions())
    return finalize(acc, n_samples=len(batch.masks), seed=getattr(batch, "seed", 0))


def estimate_component_maps(
    image: Image,
    target: HoleMask,
    batch,
    judge: Judge,
    workers: int = 1,
    progress=None,
) -> dict:
    """Optional diagnostics: one conditional-mean map per judge component.

    Returns maps keyed ``total``, ``background``, ``afterimage`` and
    ``detect``; by linearity the total map equals background plus the
    weighted component maps at every covered pixel.
    """
    scores = score_batch(batch.masks, judge, workers=workers, progress=progress)
    height, width = image.height, image.width
    out = {}
    for key in ("total", "background", "afterimage", "detect"):
        def contributions():
            for mask, score in zip(batch.masks, scores):
                value = getattr(score, key)
                stub = JudgeBreakdown(background=value, afterimage=0.0, detect=0.0,
                                      lambda_a=0.0, lambda_d=0.0)
                yield ImportanceAccumulator(height, width).add(ScoredSample(mask, stub))
        out[key] = finalize(_pairwise_fold(contributions()),
                            n_samples=len(batch.masks), seed=getattr(batch, "seed", 0))
    return out


def exact_importance(
    image: Image,
    target: HoleMask,
    masks,
    judge: Judge,
    probabilities=None,
) -> ImportanceMap:
    """Exact conditional expectation over an enumerable weighted mask family.

    For each pixel: sum of score * P over masks holing it, divided by the
    total P of masks holing it.  Zero-probability-of-holing pixels get the
    same sentinel rule as :func:`finalize`.
    """
    masks = list(masks)
    if probabilities is None:
        probabilities = np.full(len(masks), 1.0 / len(masks))
    else:
        probabilities = np.asarray(probabilities, dtype=np.float64)
        if probabilities.shape != (len(masks),):
            raise ValueError("need one probability per mask")
    height, width = image.height, image.width
    numerator = np.zeros((height, width))
    denominator = np.zeros((height, width))
    coverage = np.zeros((height, width), dtype=np.int64)
    for mask, p in zip(masks, probabilities):
        hole = ~mask.bits
        total = judge.score(mask).total
        numerator[hole] += total * p
        denominator[hole] += p
        coverage[hole] += 1
    covered = denominator > 0
    if not covered.any():
        raise ValueError("no mask in the family holes any pixel")
    values = np.empty((height, width))
    values[covered] = numerator[covered] / denominator[covered]
    values[~covered] = values[covered].min() - 1.0
    return ImportanceMap(values=values, coverage=coverage, n_samples=len(masks))


def save_importance(imap: ImportanceMap, path) -> None:
    """Binary grid: header (magic, H, W, N, seed) then row-major float32."""
    header = _HEADER.pack(_MAGIC, imap.height, imap.width, imap.n_samples, imap.seed)
    payload = imap.values.astype("<f4").tobytes(order="C")
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(payload)


def load_importance(path) -> ImportanceMap:
    with open(path, "rb") as fh:
        raw = fh.read()
    magic, height, width, n_samples, seed = _HEADER.unpack_from(raw, 0)
    if magic != _MAGIC:
        raise ValueError(f"{path}: not an importance grid (magic {magic!r})")
    values = np.frombuffer(raw, dtype="<f4", offset=_HEADER.size, count=height * width)
    return ImportanceMap(
        values=values.reshape(height, width).astype(np.float64),
        n_samples=n_samples,
        seed=seed,
    )


def export_heatmap(imap: ImportanceMap, path) -> None:
    """Min-max normalized grayscale PNG (black = least, white = most important)."""
    values = imap.values
    lo, hi = float(values.min()), float(values.max())
    scale = (values - lo) / (hi - lo) if hi > lo else np.zeros_like(values)
    save_image(Image(scale), path)


def default_workers() -> int:
    """Worker-count default: AURA_WORKERS env var, else the CPU count (max 8)."""
    import os

    env = os.environ.get("AURA_WORKERS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            print(f"ignoring invalid AURA_WORKERS={env!r}", file=sys.stderr)
    return max(1, min(8, os.cpu_count() or 1))
