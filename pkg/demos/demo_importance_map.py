"""What the importance map looks like and how to read it.

Estimates the map on an under-segmented scene and prints how the missed
object skirt ranks against the target and the background.  The heatmap
PNG (white = mask me first) lands in demos/out/importance/.
"""
from pathlib import Path

import numpy as np

from aura.harness import fixture_config, make_scene
from aura.importance import estimate_importance, export_heatmap
from aura.judge import Judge
from aura.sampler import sample_batch

out_dir = Path(__file__).parent / "out" / "importance"
out_dir.mkdir(parents=True, exist_ok=True)

scene = make_scene(background="smooth", halo=2, seed=69)
cfg = fixture_config(n_samples=2000, seed=0).resolved()

judge = Judge(scene.composited, scene.provided_seg_mask, cfg.inpainter,
              cfg.detector, cfg.metric, cfg.lambda_a, cfg.lambda_d)
batch = sample_batch(scene.provided_seg_mask, cfg.sampler)
imap = estimate_importance(scene.composited, scene.provided_seg_mask, batch,
                           judge, workers=cfg.workers)

target = scene.provided_seg_mask.bits
skirt = scene.missed_region.bits
background = ~scene.true_object_mask.bits

# Target pixels are holed by every sample, so they all sit exactly at the
# batch's mean judge total; the skirt should float above, background below.
print(f"target value (all equal): {imap.values[target].mean():+.6f}")
print(f"skirt  mean / min:        {imap.values[skirt].mean():+.6f} / {imap.values[skirt].min():+.6f}")
print(f"background mean:          {imap.values[background].mean():+.6f}")
above = (imap.values > imap.values[target].min()) & background
print(f"background pixels ranking above the target: {int(above.sum())}")
print(f"coverage: min {imap.coverage.min()}, median {int(np.median(imap.coverage))} of {len(batch)} samples")

export_heatmap(imap, out_dir / "importance.png")
print(f"heatmap written to {out_dir / 'importance.png'}")
