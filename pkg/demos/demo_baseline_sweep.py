"""Dilated-segmentation baselines versus the refined mask on one scene.

Reproduces the benchmark comparison at single-scene scale: each row
inpaints the scene under one mask and scores the result against the
ground truth and with the judge.
"""
from aura.harness import RemovalReport, baseline_sweep, fixture_config, make_scene, run_aura

scene = make_scene(background="textured", halo=2, seed=63)
config = fixture_config(n_samples=2000, seed=0)

sweep = baseline_sweep(scene, kernel_sizes=(0, 10, 20, 30, 40), config=config)
aura_row, _ = run_aura(scene, config)
report = RemovalReport(sweep.rows + (aura_row,))
print(report.to_text())

best_baseline = max(r.total for r in sweep.rows if r.mask_name.startswith("kernel"))
print(f"refined-mask judge total {aura_row.total:+.5f} vs best dilation baseline {best_baseline:+.5f}")
