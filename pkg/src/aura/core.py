"""Image and binary-mask value types plus the polarity-safe mask algebra.

Two mask types with opposite polarity are kept deliberately distinct:
``KeepMask`` (1 = pixel visible to the inpainter) and ``HoleMask``
(1 = pixel belongs to the region to synthesize).  Crossing polarities
requires an explicit :func:`complement` call, so mask-sense mistakes
show up as type errors instead of silently inverted masks.

All types are immutable after construction and safe to share across
worker processes; the operations here are pure functions.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.flags.writeable = False
    return arr


def _validate_bits(bits) -> np.ndarray:
    arr = np.asarray(bits)
    if arr.dtype != np.bool_:
        vals = np.unique(arr)
        if not np.all(np.isin(vals, (0, 1))):
            raise ValueError("mask values must be exactly 0 or 1")
        arr = arr.astype(bool)
    if arr.ndim != 2:
        raise ValueError(f"mask must be a 2-D grid, got shape {arr.shape}")
    return _frozen(np.ascontiguousarray(arr))


@dataclass(frozen=True, eq=False)
class Image:
    """H x W x C grid of channel intensities in [0, 1], C in {1, 3}."""

    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.float64)
        if arr.ndim == 2:
            arr = arr[:, :, None]
        if arr.ndim != 3 or arr.shape[2] not in (1, 3):
            raise ValueError(f"expected (H, W) or (H, W, C) with C in {{1, 3}}, got {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("intensities must be finite")
        if arr.min(initial=0.0) < 0.0 or arr.max(initial=0.0) > 1.0:
            raise ValueError("intensities must lie in [0, 1]")
        object.__setattr__(self, "data", _frozen(np.ascontiguousarray(arr)))

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return self.data.shape[2]

    @classmethod
    def constant(cls, value: float, height: int, width: int, channels: int = 1) -> "Image":
        return cls(np.full((height, width, channels), value, dtype=np.float64))


@dataclass(frozen=True, eq=False)
class KeepMask:
    """Binary grid, 1 = pixel visible to the inpainter, 0 = hole."""

    bits: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "bits", _validate_bits(self.bits))

    @property
    def height(self) -> int:
        return self.bits.shape[0]

    @property
    def width(self) -> int:
        return self.bits.shape[1]

    @classmethod
    def ones(cls, height: int, width: int) -> "KeepMask":
        """The everything-visible mask (multiplicative identity on images)."""
        return cls(np.ones((height, width), dtype=bool))


@dataclass(frozen=True, eq=False)
class HoleMask:
    """Binary grid, 1 = pixel masked / region of interest, 0 = background."""

    bits: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "bits", _validate_bits(self.bits))

    @property
    def height(self) -> int:
        return self.bits.shape[0]

    @property
    def width(self) -> int:
        return self.bits.shape[1]

    @classmethod
    def zeros(cls, height: int, width: int) -> "HoleMask":
        return cls(np.zeros((height, width), dtype=bool))


class Region(frozenset):
    """Set of in-bounds (row, col) pixel indices."""

    @classmethod
    def from_mask(cls, mask) -> "Region":
        return cls(map(tuple, np.argwhere(mask.bits)))

    def to_hole_mask(self, height: int, width: int) -> HoleMask:
        bits = np.zeros((height, width), dtype=bool)
        for r, c in self:
            if not (0 <= r < height and 0 <= c < width):
                raise ValueError(f"pixel index {(r, c)} out of bounds for {height}x{width}")
            bits[r, c] = True
        return HoleMask(bits)


def _check_same_shape(a, b):
    if (a.height, a.width) != (b.height, b.width):
        raise ValueError(f"dimension mismatch: {a.height}x{a.width} vs {b.height}x{b.width}")


def apply_mask(img: Image, keep: KeepMask) -> Image:
    """Element-wise product: keep=1 preserves the pixel, keep=0 zeroes all channels."""
    _check_same_shape(img, keep)
    return Image(img.data * keep.bits[:, :, None])


def area(mask) -> int:
    """Number of set bits in a mask of either polarity."""
    return int(np.count_nonzero(mask.bits))


def complement(mask):
    """Bitwise NOT with a polarity flip: HoleMask <-> KeepMask."""
    if isinstance(mask, HoleMask):
        return KeepMask(~mask.bits)
    if isinstance(mask, KeepMask):
        return HoleMask(~mask.bits)
    raise TypeError(f"expected HoleMask or KeepMask, got {type(mask).__name__}")


def dilate(mask: HoleMask, kernel_size: int) -> HoleMask:
    """Morphological dilation by a centered square structuring element.

    The element has odd side ``2 * ((kernel_size + 1) // 2) + 1`` so it can
    be centered per pixel (size 10 dilates with an 11 x 11 square);
    ``kernel_size=0`` is the identity.
    """
    if not isinstance(mask, HoleMask):
        raise TypeError("dilate operates on HoleMask")
    if kernel_size < 0:
        raise ValueError("kernel_size must be >= 0")
    if kernel_size == 0:
        return mask
    side = 2 * ((kernel_size + 1) // 2) + 1
    structure = np.ones((side, side), dtype=bool)
    return HoleMask(ndimage.binary_dilation(mask.bits, structure=structure))
