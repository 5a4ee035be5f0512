"""Image and mask file IO.

Supported formats: 8-bit PNG (gray and RGB) through Pillow, and ASCII
PGM (P2) / PPM (P3) written natively.  The binary variants (P5/P6) are
accepted on read.  8-bit values map to intensities as v / 255 on load
and round(v * 255) on save.  Masks travel as single-channel PNG or PGM
where pixel > 127 means bit 1.
"""
from __future__ import annotations

import re
from pathlib import Path

import numpy as np
from PIL import Image as PILImage

from .core import HoleMask, Image, KeepMask


def _read_pnm(path: Path) -> np.ndarray:
    data = path.read_bytes()
    magic = data[:2]
    if magic not in (b"P2", b"P3", b"P5", b"P6"):
        raise ValueError(f"{path}: unsupported PNM magic {magic!r}")
    # Header tokens may be separated by whitespace and '#' comments.
    pos = 2
    tokens = []
    while len(tokens) < 3:
        m = re.compile(rb"\s*(?:#[^\n]*\n\s*)*(\S+)").match(data, pos)
        if not m:
            raise ValueError(f"{path}: truncated PNM header")
        tokens.append(m.group(1))
        pos = m.end()
    width, height, maxval = (int(t) for t in tokens)
    if maxval <= 0 or maxval > 255:
        raise ValueError(f"{path}: unsupported maxval {maxval}")
    channels = 3 if magic in (b"P3", b"P6") else 1
    count = width * height * channels
    if magic in (b"P2", b"P3"):
        values = np.array(data[pos:].split()[:count], dtype=np.uint16)
    else:
        pos += 1  # single whitespace byte after maxval
        values = np.frombuffer(data, dtype=np.uint8, count=count, offset=pos).astype(np.uint16)
    if values.size != count:
        raise ValueError(f"{path}: expected {count} samples, found {values.size}")
    arr = values.reshape(height, width, channels).astype(np.float64)
    return arr / maxval


def _write_pnm(arr8: np.ndarray, path: Path) -> None:
    height, width, channels = arr8.shape
    magic = "P3" if channels == 3 else "P2"
    lines = [magic, f"{width} {height}", "255"]
    flat = arr8.reshape(height, width * channels)
    for row in flat:
        lines.append(" ".join(str(int(v)) for v in row))
    path.write_text("\n".join(lines) + "\n")


def _to_uint8(img: Image) -> np.ndarray:
    return np.rint(img.data * 255.0).astype(np.uint8)


def load_image(path) -> Image:
    path = Path(path)
    suffix = path.suffix.lower()
    if suffix in (".pgm", ".ppm", ".pnm"):
        return Image(_read_pnm(path))
    with PILImage.open(path) as pil:
        if pil.mode not in ("L", "RGB"):
            pil = pil.convert("RGB" if len(pil.getbands()) >= 3 else "L")
        arr = np.asarray(pil, dtype=np.float64) / 255.0
    return Image(arr)


def save_image(img: Image, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    arr8 = _to_uint8(img)
    suffix = path.suffix.lower()
    if suffix in (".pgm", ".pnm"):
        if img.channels != 1:
            raise ValueError("PGM holds a single channel; use PPM or PNG for color")
        _write_pnm(arr8, path)
    elif suffix == ".ppm":
        if img.channels != 3:
            raise ValueError("PPM holds three channels; use PGM or PNG for gray")
        _write_pnm(arr8, path)
    elif suffix == ".png":
        pil = PILImage.fromarray(arr8[:, :, 0] if img.channels == 1 else arr8, mode="L" if img.channels == 1 else "RGB")
        pil.save(path)
    else:
        raise ValueError(f"unsupported image format: {path.suffix!r}")


def _load_bits(path) -> np.ndarray:
    img = load_image(path)
    if img.channels != 1:
        raise ValueError(f"{path}: masks must be single-channel")
    return img.data[:, :, 0] > (127.5 / 255.0)


def load_hole_mask(path) -> HoleMask:
    return HoleMask(_load_bits(path))


def load_keep_mask(path) -> KeepMask:
    return KeepMask(_load_bits(path))


def save_mask(mask, path) -> None:
    """Write a mask of either polarity as 0/255 single-channel PGM or PNG."""
    save_image(Image(mask.bits.astype(np.float64)), path)
