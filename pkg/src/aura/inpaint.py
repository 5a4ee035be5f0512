"""Pluggable object-remover backends behind a single ``complete`` call.

Built-in backends are deterministic pure functions:

* ``mean-fill``: holes take the per-channel mean of the visible pixels.
* ``diffusion-fill``: holes solve the Laplace equation with the visible
  pixels as Dirichlet data, iterated by Jacobi relaxation (4-neighbor
  stencil) until the largest per-pixel update drops below the tolerance
  or the iteration cap is hit.  The solve is seeded from a coarse-to-fine
  cascade of the same problem, which only changes how fast the fixed
  point is reached, not what it is.  Every produced value is a convex
  combination of boundary values, so filled intensities respect the
  per-channel min/max of the visible data.

The ``external`` backend shells out to a user-supplied command: the
engine writes ``input.png`` and ``keep.pgm`` into a fresh temporary
directory, invokes ``command <dir>``, and reads back ``output.png`` of
identical size.  A nonzero exit status, a timeout, or missing/ill-sized
output raises :class:`~aura.errors.OracleProcessError`.

Whatever the backend returns is composited with the original so that
visible pixels pass through bit-exact; only holes carry synthesized
content.
"""
from __future__ import annotations

import subprocess
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import Image, KeepMask, _check_same_shape
from .errors import OracleProcessError
from .imageio import load_image, save_image, save_mask

_COARSEST_SIDE = 8


@dataclass(frozen=True)
class InpainterSpec:
    kind: str = "diffusion-fill"  # mean-fill | diffusion-fill | external
    tolerance: float = 1e-4
    max_iterations: int = 10_000
    command: tuple = ()
    timeout: float = 120.0

    def __post_init__(self):
        if self.kind not in ("mean-fill", "diffusion-fill", "external"):
            raise ValueError(f"unknown inpainter kind {self.kind!r}")
        if self.tolerance <= 0:
            raise ValueError("tolerance must be > 0")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.kind == "external" and not self.command:
            raise ValueError("external inpainter needs a command")
        object.__setattr__(self, "command", tuple(self.command))


def _neighbor_sums(vals: np.ndarray) -> np.ndarray:
    s = np.zeros_like(vals)
    s[:, 1:, :] += vals[:, :-1, :]
    s[:, :-1, :] += vals[:, 1:, :]
    s[:, :, 1:] += vals[:, :, :-1]
    s[:, :, :-1] += vals[:, :, 1:]
    return s


def _neighbor_counts(height: int, width: int) -> np.ndarray:
    ones = np.ones((1, height, width))
    return _neighbor_sums(ones)[0]


def _jacobi(vals: np.ndarray, free: np.ndarray, tolerance: float, max_iterations: int) -> np.ndarray:
    """Relax free pixels of (C, H, W) values in place; returns the array."""
    if not free.any():
        return vals
    counts = _neighbor_counts(vals.shape[1], vals.shape[2])
    for _ in range(max_iterations):
        candidate = _neighbor_sums(vals) / counts
        delta = np.abs(candidate[:, free] - vals[:, free]).max()
        vals[:, free] = candidate[:, free]
        if delta < tolerance:
            break
    return vals


def _coarsen(vals: np.ndarray, keep: np.ndarray):
    """Halve resolution: 2x2 blocks keep-pool values, any-pool visibility."""
    channels, height, width = vals.shape
    pad_h, pad_w = height % 2, width % 2
    if pad_h or pad_w:
        vals = np.pad(vals, ((0, 0), (0, pad_h), (0, pad_w)))
        keep = np.pad(keep, ((0, pad_h), (0, pad_w)))
    h2, w2 = vals.shape[1] // 2, vals.shape[2] // 2
    kb = keep.reshape(h2, 2, w2, 2)
    keep_c = kb.any(axis=(1, 3))
    counts = kb.sum(axis=(1, 3))
    sums = (vals * keep).reshape(channels, h2, 2, w2, 2).sum(axis=(2, 4))
    vals_c = sums / np.maximum(counts, 1)
    return vals_c, keep_c


def _diffusion_values(vals: np.ndarray, keep: np.ndarray, tolerance: float, max_iterations: int) -> np.ndarray:
    free = ~keep
    if not free.any():
        return vals
    height, width = keep.shape
    if min(height, width) > _COARSEST_SIDE:
        vals_c, keep_c = _coarsen(vals, keep)
        solved_c = _diffusion_values(vals_c, keep_c, tolerance, max_iterations)
        init = np.repeat(np.repeat(solved_c, 2, axis=1), 2, axis=2)[:, :height, :width]
        vals = vals.copy()
        vals[:, free] = init[:, free]
    else:
        boundary_mean = vals[:, keep].mean(axis=1)
        vals = vals.copy()
        vals[:, free] = boundary_mean[:, None]
    return _jacobi(vals, free, tolerance, max_iterations)


def _mean_fill(img: Image, keep: KeepMask) -> np.ndarray:
    data = img.data.copy()
    hole = ~keep.bits
    means = img.data[keep.bits].mean(axis=0)
    data[hole] = means
    return data


def _diffusion_fill(img: Image, keep: KeepMask, spec: InpainterSpec) -> np.ndarray:
    vals = np.moveaxis(img.data, 2, 0).copy()
    # Everything outside the hole bounding box (plus one ring) is fixed
    # Dirichlet data, so solving the crop solves the full problem.
    ys, xs = np.nonzero(~keep.bits)
    y0, y1 = max(ys.min() - 1, 0), min(ys.max() + 2, keep.height)
    x0, x1 = max(xs.min() - 1, 0), min(xs.max() + 2, keep.width)
    sub = vals[:, y0:y1, x0:x1].copy()
    solved = _diffusion_values(sub, keep.bits[y0:y1, x0:x1].copy(), spec.tolerance, spec.max_iterations)
    vals[:, y0:y1, x0:x1] = solved
    return np.clip(np.moveaxis(vals, 0, 2), 0.0, 1.0)


def _external_fill(img: Image, keep: KeepMask, spec: InpainterSpec) -> np.ndarray:
    with tempfile.TemporaryDirectory(prefix="aura-inpaint-") as tmp:
        tmp_path = Path(tmp)
        save_image(img, tmp_path / "input.png")
        save_mask(keep, tmp_path / "keep.pgm")
        argv = [*spec.command, str(tmp_path)]
        try:
            proc = subprocess.run(argv, capture_output=True, timeout=spec.timeout)
        except subprocess.TimeoutExpired as exc:
            raise OracleProcessError(
                f"inpainter timed out after {spec.timeout}s", command=argv
            ) from exc
        if proc.returncode != 0:
            raise OracleProcessError(
                f"inpainter exited with status {proc.returncode}",
                command=argv,
                returncode=proc.returncode,
                stderr=proc.stderr.decode(errors="replace"),
            )
        out_path = tmp_path / "output.png"
        if not out_path.exists():
            raise OracleProcessError("inpainter produced no output.png", command=argv)
        out = load_image(out_path)
    if (out.height, out.width) != (img.height, img.width):
        raise OracleProcessError(
            f"inpainter output is {out.height}x{out.width}, expected {img.height}x{img.width}",
            command=argv,
        )
    data = out.data.copy()
    if data.shape[2] != img.channels:
        if img.channels == 1:
            data = data.mean(axis=2, keepdims=True)
        else:
            data = np.repeat(data, 3, axis=2)
    return data


def complete(img: Image, keep: KeepMask, spec: InpainterSpec = InpainterSpec()) -> Image:
    """Fill the holes of ``img`` (keep=0 pixels) per the configured backend.

    The result always equals ``img`` bit-exact wherever keep=1.
    """
    _check_same_shape(img, keep)
    if not keep.bits.any():
        raise ValueError("keep mask is all zeros; no boundary data to fill from")
    if keep.bits.all():
        return img
    if spec.kind == "mean-fill":
        data = _mean_fill(img, keep)
    elif spec.kind == "diffusion-fill":
        data = _diffusion_fill(img, keep, spec)
    else:
        data = _external_fill(img, keep, spec)
    data[keep.bits] = img.data[keep.bits]  # compositing contract
    return Image(data)
