"""Random keep-mask generation around a target segmentation.

Each sampled mask starts from the complement of the target hole mask
(targets are always holed) and punches additional filled disks.  The
first few disk centers are anchored near the target: a uniform target
pixel jittered by up to one radius per coordinate.  Remaining centers
land uniformly in the image rectangle grown by one radius on every
side, so patches may straddle the border.

Reproducibility: mask ``i`` of a batch is drawn from a dedicated
counter-based Philox stream keyed by ``(seed, i)``, so the batch is a
pure function of (seed, config, target) and generation order or worker
count cannot change it.  Within a mask the draw order is fixed: patch
count, then per patch radius, anchor index (anchored patches only),
x offset, y offset.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, replace
from pathlib import Path

import numpy as np

from .core import HoleMask, KeepMask, area
from .imageio import save_mask

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class SamplerConfig:
    n_samples: int = 2000
    patch_count_min: int = 3
    patch_count_max: int = 5
    anchored_patch_count: int = 3
    radius_min: int = 10
    radius_max: int = 40
    seed: int = 0

    def __post_init__(self):
        if self.n_samples < 1:
            raise ValueError("n_samples must be >= 1")
        # patch counts of zero are allowed so tests can disable patching
        if not 0 <= self.patch_count_min <= self.patch_count_max:
            raise ValueError("need 0 <= patch_count_min <= patch_count_max")
        if not 1 <= self.radius_min <= self.radius_max:
            raise ValueError("need 1 <= radius_min <= radius_max")
        if not 0 <= self.anchored_patch_count <= max(self.patch_count_min, 0):
            raise ValueError("anchored_patch_count must not exceed patch_count_min")


@dataclass(frozen=True)
class MaskBatch:
    masks: tuple
    seed: int
    config: SamplerConfig

    def __len__(self) -> int:
        return len(self.masks)


def mask_stream(seed: int, index: int) -> np.random.Generator:
    """The published per-mask RNG stream: Philox keyed by (seed, index)."""
    key = np.array([seed & _MASK64, index & _MASK64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _punch_disk(keep_bits: np.ndarray, cy: float, cx: float, radius: float) -> None:
    height, width = keep_bits.shape
    y_lo = max(0, int(np.ceil(cy - radius)))
    y_hi = min(height - 1, int(np.floor(cy + radius)))
    x_lo = max(0, int(np.ceil(cx - radius)))
    x_hi = min(width - 1, int(np.floor(cx + radius)))
    if y_lo > y_hi or x_lo > x_hi:
        return
    ys = np.arange(y_lo, y_hi + 1, dtype=np.float64)
    xs = np.arange(x_lo, x_hi + 1, dtype=np.float64)
    inside = (ys[:, None] - cy) ** 2 + (xs[None, :] - cx) ** 2 <= radius * radius
    region = keep_bits[y_lo : y_hi + 1, x_lo : x_hi + 1]
    region[inside] = False


def sample_mask(target: HoleMask, cfg: SamplerConfig, rng: np.random.Generator) -> KeepMask:
    """Draw one keep-mask: complement(target) minus a few random disks."""
    if area(target) == 0:
        raise ValueError("target mask is empty; no anchor pixels exist")
    height, width = target.bits.shape
    anchors = np.argwhere(target.bits)  # row-major order, deterministic
    keep_bits = ~target.bits

    k = int(rng.integers(cfg.patch_count_min, cfg.patch_count_max + 1))
    for j in range(k):
        radius = int(rng.integers(cfg.radius_min, cfg.radius_max + 1))
        if j < cfg.anchored_patch_count:
            ay, ax = anchors[int(rng.integers(0, len(anchors)))]
            cx = float(ax) + rng.uniform(-radius, radius)
            cy = float(ay) + rng.uniform(-radius, radius)
        else:
            cx = rng.uniform(-radius, width + radius)
            cy = rng.uniform(-radius, height + radius)
        _punch_disk(keep_bits, cy, cx, radius)
    return KeepMask(keep_bits)


def sample_batch(target: HoleMask, cfg: SamplerConfig) -> MaskBatch:
    """Generate cfg.n_samples masks from the per-index streams of cfg.seed."""
    masks = tuple(
        sample_mask(target, cfg, mask_stream(cfg.seed, i)) for i in range(cfg.n_samples)
    )
    return MaskBatch(masks=masks, seed=cfg.seed, config=cfg)


def dump_batch(batch: MaskBatch, out_dir) -> None:
    """Write one PGM per mask plus a manifest with the seed and config."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    digits = max(4, len(str(len(batch.masks) - 1)))
    for i, mask in enumerate(batch.masks):
        save_mask(mask, out_dir / f"mask_{i:0{digits}d}.pgm")
    manifest = {"seed": batch.seed, "n_masks": len(batch.masks), "config": asdict(batch.config)}
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")


def batch_for_seed(target: HoleMask, cfg: SamplerConfig, seed: int) -> MaskBatch:
    """Convenience: resample the batch under a different seed."""
    return sample_batch(target, replace(cfg, seed=seed))


__all__ = [
    "SamplerConfig",
    "MaskBatch",
    "mask_stream",
    "sample_mask",
    "sample_batch",
    "dump_batch",
    "batch_for_seed",
]
