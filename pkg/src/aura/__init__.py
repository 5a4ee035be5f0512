"""Automatic hole-mask refinement for object removal.

Given an image and a target segmentation mask, the pipeline samples
random keep-masks around the target, scores each completion with a
pluggable judge, folds the scores into a per-pixel importance map,
thresholds the map into nested candidate masks, and returns the
candidate the judge likes best.
"""

from .candidate import (
    Candidate,
    CandidateSet,
    candidate_mask,
    generate_candidates,
    percentile_threshold,
    select_best,
)
from .core import (
    HoleMask,
    Image,
    KeepMask,
    Region,
    apply_mask,
    area,
    complement,
    dilate,
)
from .errors import OracleProcessError
from .imageio import load_hole_mask, load_image, load_keep_mask, save_image, save_mask
from .importance import (
    ImportanceAccumulator,
    ImportanceMap,
    ScoredSample,
    accumulate,
    estimate_importance,
    exact_importance,
    finalize,
    load_importance,
    save_importance,
)
from .inpaint import InpainterSpec, complete
from .judge import (
    DetectorSpec,
    Judge,
    JudgeBreakdown,
    MetricSpec,
    j_afterimage,
    j_background,
    j_detect,
    judge,
)
from .pipeline import PipelineConfig, PipelineResult, run_pipeline, write_artifacts
from .sampler import MaskBatch, SamplerConfig, sample_batch, sample_mask

__version__ = "0.1.0"

__all__ = [
    "Candidate",
    "CandidateSet",
    "DetectorSpec",
    "HoleMask",
    "Image",
    "ImportanceAccumulator",
    "ImportanceMap",
    "InpainterSpec",
    "Judge",
    "JudgeBreakdown",
    "KeepMask",
    "MaskBatch",
    "MetricSpec",
    "OracleProcessError",
    "PipelineConfig",
    "PipelineResult",
    "Region",
    "SamplerConfig",
    "ScoredSample",
    "accumulate",
    "apply_mask",
    "area",
    "candidate_mask",
    "complement",
    "complete",
    "dilate",
    "estimate_importance",
    "exact_importance",
    "finalize",
    "generate_candidates",
    "j_afterimage",
    "j_background",
    "j_detect",
    "judge",
    "load_hole_mask",
    "load_image",
    "load_importance",
    "load_keep_mask",
    "percentile_threshold",
    "run_pipeline",
    "sample_batch",
    "sample_mask",
    "save_image",
    "save_importance",
    "save_mask",
    "select_best",
    "write_artifacts",
]
