"""End-to-end mask refinement: sample, judge, accumulate, threshold, select.

``PipelineConfig`` aggregates every knob with JSON round-tripping; the
top-level ``seed`` is authoritative and is copied into the sampler when
the config is resolved.  Unset weights resolve to the per-kind defaults
of the judge module, and an unset worker count resolves from the
AURA_WORKERS environment variable (falling back to the CPU count).
"""
from __future__ import annotations

import json
import shlex
from dataclasses import asdict, dataclass, replace
from pathlib import Path

from .candidate import CandidateSet, generate_candidates, save_candidates, select_best
from .core import HoleMask, Image, complement
from .imageio import save_image, save_mask
from .importance import (
    ImportanceMap,
    default_workers,
    estimate_importance,
    export_heatmap,
    save_importance,
)
from .inpaint import InpainterSpec, complete
from .judge import DetectorSpec, Judge, MetricSpec, resolve_lambda_a, resolve_lambda_d
from .sampler import MaskBatch, SamplerConfig, sample_batch


def _spec_with_command(cls, data: dict):
    data = dict(data)
    command = data.get("command")
    if isinstance(command, str):
        data["command"] = tuple(shlex.split(command))
    elif command is None:
        data["command"] = ()
    else:
        data["command"] = tuple(command)
    return cls(**data)


@dataclass(frozen=True)
class PipelineConfig:
    sampler: SamplerConfig = SamplerConfig()
    inpainter: InpainterSpec = InpainterSpec()
    detector: DetectorSpec = DetectorSpec()
    metric: MetricSpec = MetricSpec()
    lambda_a: float | None = None
    lambda_d: float | None = None
    p_max: int = 20
    workers: int | None = None
    seed: int = 0

    def __post_init__(self):
        if self.p_max < 1:
            raise ValueError("p_max must be >= 1")
        if self.workers is not None and self.workers < 1:
            raise ValueError("workers must be >= 1")

    def resolved(self) -> "PipelineConfig":
        """Concrete weights and worker count; seed propagated to the sampler."""
        return replace(
            self,
            sampler=replace(self.sampler, seed=self.seed),
            lambda_a=resolve_lambda_a(self.metric, self.lambda_a),
            lambda_d=resolve_lambda_d(self.detector, self.lambda_d),
            workers=self.workers if self.workers is not None else default_workers(),
        )

    def to_dict(self) -> dict:
        data = asdict(self)
        for key in ("inpainter", "detector", "metric"):
            data[key]["command"] = list(data[key]["command"])
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "PipelineConfig":
        data = dict(data)
        if "sampler" in data:
            data["sampler"] = SamplerConfig(**data["sampler"])
        if "inpainter" in data:
            data["inpainter"] = _spec_with_command(InpainterSpec, data["inpainter"])
        if "detector" in data:
            data["detector"] = _spec_with_command(DetectorSpec, data["detector"])
        if "metric" in data:
            data["metric"] = _spec_with_command(MetricSpec, data["metric"])
        return cls(**data)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "PipelineConfig":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True, eq=False)
class PipelineResult:
    config: PipelineConfig
    batch: MaskBatch
    importance: ImportanceMap
    candidates: CandidateSet
    completed: Image

    @property
    def selected_mask(self) -> HoleMask:
        return self.candidates.selected.mask


def run_pipeline(image: Image, target: HoleMask, config: PipelineConfig | None = None,
                 progress=None) -> PipelineResult:
    """Refine ``target`` into the judge-optimal hole mask for ``image``."""
    cfg = (config or PipelineConfig()).resolved()
    judge = Judge(image, target, cfg.inpainter, cfg.detector, cfg.metric,
                  cfg.lambda_a, cfg.lambda_d)
    batch = sample_batch(target, cfg.sampler)
    imap = estimate_importance(image, target, batch, judge,
                               workers=cfg.workers, progress=progress)
    candidates = generate_candidates(imap, target, cfg.p_max)
    cset = select_best(image, target, candidates, judge)
    completed = complete(image, complement(cset.selected.mask), cfg.inpainter)
    return PipelineResult(config=cfg, batch=batch, importance=imap,
                          candidates=cset, completed=completed)


def score_report(result: PipelineResult) -> dict:
    """Machine-readable run summary (per-candidate scores plus diagnostics)."""
    rows = []
    for i, cand in enumerate(result.candidates.candidates):
        score = cand.score
        rows.append({
            "index": i,
            "percentile": cand.percentile,
            "threshold": cand.threshold,
            "hole_area": int(cand.mask.bits.sum()),
            "contains_target": cand.contains_target,
            "selected": i == result.candidates.selected_index,
            "background": score.background,
            "afterimage": score.afterimage,
            "detect": score.detect,
            "total": score.total,
        })
    return {
        "seed": result.config.seed,
        "n_samples": result.config.sampler.n_samples,
        "lambda_a": result.config.lambda_a,
        "lambda_d": result.config.lambda_d,
        "variance_diagnostic": result.importance.variance_diagnostic(),
        "selected_index": result.candidates.selected_index,
        "candidates": rows,
    }


def write_artifacts(result: PipelineResult, out_dir) -> dict:
    """Emit every run artifact into ``out_dir``; returns the path map."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {
        "config": out_dir / "config.json",
        "importance_grid": out_dir / "importance.f32",
        "importance_heatmap": out_dir / "importance.png",
        "candidates": out_dir / "candidates",
        "aura_mask": out_dir / "aura_mask.pgm",
        "completed": out_dir / "completed.png",
        "report": out_dir / "report.json",
    }
    paths["config"].write_text(result.config.to_json())
    save_importance(result.importance, paths["importance_grid"])
    export_heatmap(result.importance, paths["importance_heatmap"])
    save_candidates(result.candidates, paths["candidates"])
    save_mask(result.selected_mask, paths["aura_mask"])
    save_image(result.completed, paths["completed"])
    paths["report"].write_text(json.dumps(score_report(result), indent=2) + "\n")
    return paths
