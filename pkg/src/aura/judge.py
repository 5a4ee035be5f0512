"""Scoring of completed images: background fidelity, afterimage
dissimilarity, and a detection penalty, combined as

    total = background + lambda_a * afterimage + lambda_d * detect

with background <= 0, detect <= 0 and afterimage >= 0 on all inputs.
Higher totals mean better removal.  The afterimage term rewards the
query completion for differing, inside the target region, from the
completion obtained with the bare target mask; when the bare mask
under-covers the object, that baseline completion carries the leaked
object appearance, so dissimilarity from it means the leak is gone.

The detector and the dissimilarity metric are pluggable.  Built-ins are
classical and deterministic; ``external`` kinds shell out per the
protocols described in the respective spec docstrings.
"""
from __future__ import annotations

import subprocess
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .core import HoleMask, Image, KeepMask, _check_same_shape, area, complement
from .errors import OracleProcessError
from .imageio import load_image, save_image
from .inpaint import InpainterSpec, complete

#: Default afterimage weight per metric kind.  The external default
#: suits perceptual-network metrics whose raw values are tiny; the
#: built-in metrics run at a very different scale, so their weights are
#: calibrated on the bundled synthetic fixture suite to balance the
#: afterimage term against the background term (the l2 kind measures
#: roughly 70x larger than patch-stats on the same completions).
DEFAULT_LAMBDA_A = {"l2": 0.055, "patch-stats": 4.0, "external": 90_000.0}

#: Default detection weight (same for every detector kind).
DEFAULT_LAMBDA_D = {"null": 0.5, "residual": 0.5, "external": 0.5}


@dataclass(frozen=True)
class DetectorSpec:
    """Binary detector producing the marked-area map S.

    kinds: ``null`` (S is empty), ``residual`` (marks target pixels whose
    windowed mean absolute difference from the reference image exceeds
    ``threshold``), ``external`` (writes ``input.png`` to a fresh temp
    directory, runs ``command <dir>``, reads back ``detections.pgm``;
    not restricted to the target region).
    """

    kind: str = "null"
    threshold: float = 0.15
    window: int = 7
    command: tuple = ()
    timeout: float = 120.0

    def __post_init__(self):
        if self.kind not in ("null", "residual", "external"):
            raise ValueError(f"unknown detector kind {self.kind!r}")
        if not 0.0 < self.threshold <= 1.0:
            raise ValueError("residual threshold must lie in (0, 1]")
        if self.window < 1:
            raise ValueError("window must be >= 1")
        if self.kind == "external" and not self.command:
            raise ValueError("external detector needs a command")
        object.__setattr__(self, "command", tuple(self.command))


@dataclass(frozen=True)
class MetricSpec:
    """Dissimilarity metric D(a, b) for the afterimage term.

    kinds: ``l2`` (squared-L2 sum over all pixels and channels),
    ``patch-stats`` (sum over a non-overlapping ``window`` tiling,
    restricted to tiles meeting the target region, of squared
    differences of per-tile, per-channel (mean, standard deviation,
    mean gradient magnitude) triples), ``external`` (writes ``a.png``
    and ``b.png``, runs ``command <dir>``, parses one decimal real from
    standard output).
    """

    kind: str = "patch-stats"
    window: int = 8
    command: tuple = ()
    timeout: float = 120.0

    def __post_init__(self):
        if self.kind not in ("l2", "patch-stats", "external"):
            raise ValueError(f"unknown metric kind {self.kind!r}")
        if self.window < 2:
            raise ValueError("window must be >= 2")
        if self.kind == "external" and not self.command:
            raise ValueError("external metric needs a command")
        object.__setattr__(self, "command", tuple(self.command))


@dataclass(frozen=True)
class JudgeBreakdown:
    background: float
    afterimage: float
    detect: float
    lambda_a: float
    lambda_d: float
    total: float = field(init=False)

    def __post_init__(self):
        total = self.background + self.lambda_a * self.afterimage + self.lambda_d * self.detect
        object.__setattr__(self, "total", float(total))


def resolve_lambda_a(metric: MetricSpec, value=None) -> float:
    return float(DEFAULT_LAMBDA_A[metric.kind] if value is None else value)


def resolve_lambda_d(detector: DetectorSpec, value=None) -> float:
    return float(DEFAULT_LAMBDA_D[detector.kind] if value is None else value)


def _box_mean(field2d: np.ndarray, window: int) -> np.ndarray:
    """Mean over the in-bounds part of a window x window box at each pixel."""
    height, width = field2d.shape
    lo = (window - 1) // 2
    hi = window // 2
    integral = np.zeros((height + 1, width + 1))
    integral[1:, 1:] = field2d.cumsum(axis=0).cumsum(axis=1)
    ys = np.arange(height)
    xs = np.arange(width)
    y0 = np.maximum(ys - lo, 0)
    y1 = np.minimum(ys + hi + 1, height)
    x0 = np.maximum(xs - lo, 0)
    x1 = np.minimum(xs + hi + 1, width)
    sums = (
        integral[np.ix_(y1, x1)]
        - integral[np.ix_(y0, x1)]
        - integral[np.ix_(y1, x0)]
        + integral[np.ix_(y0, x0)]
    )
    counts = (y1 - y0)[:, None] * (x1 - x0)[None, :]
    return sums / counts


def _detect_map(completed: Image, target: HoleMask, det: DetectorSpec, reference: Image) -> np.ndarray:
    if det.kind == "null":
        return np.zeros(target.bits.shape, dtype=bool)
    if det.kind == "residual":
        diff = np.abs(completed.data - reference.data).mean(axis=2)
        return (_box_mean(diff, det.window) > det.threshold) & target.bits
    with tempfile.TemporaryDirectory(prefix="aura-detect-") as tmp:
        tmp_path = Path(tmp)
        save_image(completed, tmp_path / "input.png")
        argv = [*det.command, str(tmp_path)]
        try:
            proc = subprocess.run(argv, capture_output=True, timeout=det.timeout)
        except subprocess.TimeoutExpired as exc:
            raise OracleProcessError(f"detector timed out after {det.timeout}s", command=argv) from exc
        if proc.returncode != 0:
            raise OracleProcessError(
                f"detector exited with status {proc.returncode}",
                command=argv,
                returncode=proc.returncode,
                stderr=proc.stderr.decode(errors="replace"),
            )
        out = tmp_path / "detections.pgm"
        if not out.exists():
            raise OracleProcessError("detector produced no detections.pgm", command=argv)
        detections = load_image(out)
    if (detections.height, detections.width) != (completed.height, completed.width):
        raise OracleProcessError("detector output size mismatch", command=argv)
    return detections.data[:, :, 0] > (127.5 / 255.0)


def j_detect(completed: Image, target: HoleMask, det: DetectorSpec, reference: Image) -> float:
    """Negative detected area, normalized by the target area."""
    target_area = area(target)
    if target_area == 0:
        raise ValueError("target mask is empty; detection score undefined")
    marked = _detect_map(completed, target, det, reference)
    return -float(np.count_nonzero(marked)) / target_area


def j_background(original: Image, completed: Image, target: HoleMask) -> float:
    """Negative squared-L2 distance outside the target, per background pixel."""
    _check_same_shape(original, completed)
    _check_same_shape(original, target)
    target_area = area(target)
    n_background = original.height * original.width - target_area
    if n_background == 0:
        raise ValueError("target mask covers the whole image; no background to compare")
    outside = ~target.bits
    diff = (original.data - completed.data)[outside]
    return -float((diff * diff).sum()) / n_background


def _tile_stats(img_data: np.ndarray, y0: int, y1: int, x0: int, x1: int) -> np.ndarray:
    win = img_data[y0:y1, x0:x1]  # (h, w, C)
    mean = win.mean(axis=(0, 1))
    std = win.std(axis=(0, 1))
    gx = np.zeros_like(win)
    gy = np.zeros_like(win)
    gx[:, :-1] = np.diff(win, axis=1)
    gy[:-1, :] = np.diff(win, axis=0)
    grad = np.sqrt(gx * gx + gy * gy).mean(axis=(0, 1))
    return np.concatenate([mean, std, grad])


def _patch_stats_distance(a: np.ndarray, b: np.ndarray, target_bits: np.ndarray, window: int) -> float:
    height, width = target_bits.shape
    total = 0.0
    for y0 in range(0, height, window):
        y1 = min(y0 + window, height)
        for x0 in range(0, width, window):
            x1 = min(x0 + window, width)
            if not target_bits[y0:y1, x0:x1].any():
                continue
            delta = _tile_stats(a, y0, y1, x0, x1) - _tile_stats(b, y0, y1, x0, x1)
            total += float((delta * delta).sum())
    return total


def _external_distance(a: Image, b: Image, metric: MetricSpec) -> float:
    with tempfile.TemporaryDirectory(prefix="aura-metric-") as tmp:
        tmp_path = Path(tmp)
        save_image(a, tmp_path / "a.png")
        save_image(b, tmp_path / "b.png")
        argv = [*metric.command, str(tmp_path)]
        try:
            proc = subprocess.run(argv, capture_output=True, timeout=metric.timeout)
        except subprocess.TimeoutExpired as exc:
            raise OracleProcessError(f"metric timed out after {metric.timeout}s", command=argv) from exc
        if proc.returncode != 0:
            raise OracleProcessError(
                f"metric exited with status {proc.returncode}",
                command=argv,
                returncode=proc.returncode,
                stderr=proc.stderr.decode(errors="replace"),
            )
    try:
        return float(proc.stdout.split()[0])
    except (IndexError, ValueError) as exc:
        raise OracleProcessError(
            f"metric wrote no parseable value: {proc.stdout!r}", command=argv
        ) from exc


def j_afterimage(completed_query: Image, completed_seg: Image, target: HoleMask, metric: MetricSpec) -> float:
    """Dissimilarity of the two completions inside the target, per target pixel."""
    _check_same_shape(completed_query, completed_seg)
    _check_same_shape(completed_query, target)
    target_area = area(target)
    if target_area == 0:
        raise ValueError("target mask is empty; afterimage score undefined")
    inside = target.bits[:, :, None]
    a = completed_query.data * inside
    b = completed_seg.data * inside
    if metric.kind == "l2":
        diff = a - b
        dist = float((diff * diff).sum())
    elif metric.kind == "patch-stats":
        dist = _patch_stats_distance(a, b, target.bits, metric.window)
    else:
        dist = _external_distance(Image(a), Image(b), metric)
    return dist / target_area


def judge(
    original: Image,
    keep: KeepMask,
    target: HoleMask,
    inpainter: InpainterSpec,
    detector: DetectorSpec,
    metric: MetricSpec,
    lambda_a: float,
    lambda_d: float,
    seg_completion: Image,
) -> JudgeBreakdown:
    """Complete the image under ``keep`` and score the result.

    ``seg_completion`` is the completion under the bare target mask,
    computed once per image and reused for every query evaluation.
    """
    completed = complete(original, keep, inpainter)
    return JudgeBreakdown(
        background=j_background(original, completed, target),
        afterimage=j_afterimage(completed, seg_completion, target, metric),
        detect=j_detect(completed, target, detector, original),
        lambda_a=lambda_a,
        lambda_d=lambda_d,
    )


class Judge:
    """Judge bound to one image and target, with the baseline completion cached."""

    def __init__(
        self,
        image: Image,
        target: HoleMask,
        inpainter: InpainterSpec = InpainterSpec(),
        detector: DetectorSpec = DetectorSpec(),
        metric: MetricSpec = MetricSpec(),
        lambda_a: float | None = None,
        lambda_d: float | None = None,
    ):
        _check_same_shape(image, target)
        if area(target) == 0:
            raise ValueError("target mask is empty")
        self.image = image
        self.target = target
        self.inpainter = inpainter
        self.detector = detector
        self.metric = metric
        self.lambda_a = resolve_lambda_a(metric, lambda_a)
        self.lambda_d = resolve_lambda_d(detector, lambda_d)
        self.seg_completion = complete(image, complement(target), inpainter)

    def score(self, keep: KeepMask) -> JudgeBreakdown:
        return judge(
            self.image,
            keep,
            self.target,
            self.inpainter,
            self.detector,
            self.metric,
            self.lambda_a,
            self.lambda_d,
            self.seg_completion,
        )
