"""Command-line pipeline driver.

Subcommands: ``generate`` (full refinement run), ``bench`` (synthetic
fixture suite with baselines), ``importance-only`` and ``judge-only``
(debugging entry points).  Progress goes to standard error; results are
written to files so standard output stays scriptable.

Exit codes: 0 success, 1 benchmark dominance failure, 2 input error,
3 oracle (inpainter/detector/metric) failure.
"""
from __future__ import annotations

import argparse
import json
import shlex
import sys
from dataclasses import replace
from pathlib import Path

from .core import complement
from .errors import OracleProcessError
from .harness import bench, dominance_failures, fixture_config, scene_suite
from .imageio import load_hole_mask, load_image, save_image
from .importance import export_heatmap, save_importance
from .inpaint import InpainterSpec, complete
from .judge import DetectorSpec, Judge, MetricSpec
from .pipeline import PipelineConfig, run_pipeline, score_report, write_artifacts

EXIT_OK = 0
EXIT_ACCEPTANCE = 1
EXIT_INPUT = 2
EXIT_ORACLE = 3


def _parse_backend(value: str, flag: str, kinds: dict):
    """Map a CLI backend value like ``diffusion`` or ``external:cmd ...``."""
    if value.startswith("external:"):
        command = tuple(shlex.split(value[len("external:"):]))
        if not command:
            raise ValueError(f"{flag}: external backend needs a command")
        return "external", command
    if value in kinds:
        return kinds[value], ()
    expected = ", ".join([*kinds, "external:<cmd>"])
    raise ValueError(f"{flag}: expected one of {expected}, got {value!r}")


def _load_config(args) -> PipelineConfig:
    if getattr(args, "config", None):
        cfg = PipelineConfig.from_json(Path(args.config).read_text())
    else:
        cfg = PipelineConfig()
    if getattr(args, "seed", None) is not None:
        cfg = replace(cfg, seed=args.seed)
    if getattr(args, "n_samples", None) is not None:
        cfg = replace(cfg, sampler=replace(cfg.sampler, n_samples=args.n_samples))
    if getattr(args, "p_max", None) is not None:
        cfg = replace(cfg, p_max=args.p_max)
    if getattr(args, "lambda_a", None) is not None:
        cfg = replace(cfg, lambda_a=args.lambda_a)
    if getattr(args, "lambda_d", None) is not None:
        cfg = replace(cfg, lambda_d=args.lambda_d)
    if getattr(args, "workers", None) is not None:
        cfg = replace(cfg, workers=args.workers)
    if getattr(args, "inpainter", None) is not None:
        kind, command = _parse_backend(args.inpainter, "--inpainter",
                                       {"mean": "mean-fill", "diffusion": "diffusion-fill"})
        cfg = replace(cfg, inpainter=replace(cfg.inpainter, kind=kind, command=command))
    if getattr(args, "detector", None) is not None:
        kind, command = _parse_backend(args.detector, "--detector",
                                       {"null": "null", "residual": "residual"})
        cfg = replace(cfg, detector=replace(cfg.detector, kind=kind, command=command))
    if getattr(args, "metric", None) is not None:
        kind, command = _parse_backend(args.metric, "--metric",
                                       {"l2": "l2", "patch-stats": "patch-stats"})
        cfg = replace(cfg, metric=replace(cfg.metric, kind=kind, command=command))
    return cfg


def _load_inputs(args):
    image = load_image(args.image)
    target = load_hole_mask(args.mask)
    if (target.height, target.width) != (image.height, image.width):
        raise ValueError(
            f"mask is {target.height}x{target.width}, image is {image.height}x{image.width}")
    if not target.bits.any():
        raise ValueError("segmentation mask has zero area: no removal target")
    return image, target


def _progress_printer(label: str):
    def update(done: int, total: int):
        if done == total or done % 50 == 0:
            print(f"\r{label}: {done}/{total}", end="", file=sys.stderr)
            if done == total:
                print(file=sys.stderr)
    return update


def _cmd_generate(args) -> int:
    image, target = _load_inputs(args)
    cfg = _load_config(args).resolved()
    print(f"resolved config: seed={cfg.seed} n_samples={cfg.sampler.n_samples} "
          f"workers={cfg.workers} lambda_a={cfg.lambda_a} lambda_d={cfg.lambda_d}",
          file=sys.stderr)
    result = run_pipeline(image, target, cfg, progress=_progress_printer("scoring"))
    paths = write_artifacts(result, args.out)
    print(f"wrote artifacts to {args.out}", file=sys.stderr)
    del paths
    return EXIT_OK


def _cmd_bench(args) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    halos = tuple(int(h) for h in args.halos.split(","))
    scenes = scene_suite(halos=halos)
    if args.scenes is not None:
        scenes = scenes[: args.scenes]
    kernel_sizes = tuple(int(k) for k in args.kernel_sizes.split(","))
    seeds = tuple(range(args.seeds))
    cfg = fixture_config(n_samples=args.n_samples, workers=args.workers)
    report = bench(scenes, cfg, kernel_sizes, seeds,
                   progress=_progress_printer("scoring"))
    report.to_csv(out_dir / "report.csv")
    (out_dir / "report.txt").write_text(report.to_text())
    print(report.to_text())
    failures = dominance_failures(report)
    if failures:
        print("dominance failures (baseline mean total > refined mean total):")
        for name, base_mean, aura_mean in failures:
            print(f"  {name}: baseline {base_mean:+.6f} vs refined {aura_mean:+.6f}")
        return EXIT_ACCEPTANCE
    return EXIT_OK


def _cmd_importance_only(args) -> int:
    image, target = _load_inputs(args)
    cfg = _load_config(args).resolved()
    from .importance import estimate_importance
    from .sampler import sample_batch

    judge = Judge(image, target, cfg.inpainter, cfg.detector, cfg.metric,
                  cfg.lambda_a, cfg.lambda_d)
    batch = sample_batch(target, cfg.sampler)
    imap = estimate_importance(image, target, batch, judge, workers=cfg.workers,
                               progress=_progress_printer("scoring"))
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "config.json").write_text(cfg.to_json())
    save_importance(imap, out_dir / "importance.f32")
    export_heatmap(imap, out_dir / "importance.png")
    print(f"wrote importance grid and heatmap to {args.out}", file=sys.stderr)
    return EXIT_OK


def _cmd_judge_only(args) -> int:
    image, target = _load_inputs(args)
    cfg = _load_config(args).resolved()
    if args.query_mask:
        query = load_hole_mask(args.query_mask)
    else:
        query = target
    judge = Judge(image, target, cfg.inpainter, cfg.detector, cfg.metric,
                  cfg.lambda_a, cfg.lambda_d)
    score = judge.score(complement(query))
    completed = complete(image, complement(query), cfg.inpainter)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "config.json").write_text(cfg.to_json())
    save_image(completed, out_dir / "completed.png")
    report = {
        "background": score.background,
        "afterimage": score.afterimage,
        "detect": score.detect,
        "lambda_a": score.lambda_a,
        "lambda_d": score.lambda_d,
        "total": score.total,
    }
    (out_dir / "report.json").write_text(json.dumps(report, indent=2) + "\n")
    print(f"judge total {score.total:+.6f}; report in {args.out}", file=sys.stderr)
    return EXIT_OK


def _add_config_flags(parser, with_inputs=True):
    if with_inputs:
        parser.add_argument("--image", required=True, help="input image (PNG/PGM/PPM)")
        parser.add_argument("--mask", required=True, help="target segmentation mask (hole polarity)")
    parser.add_argument("--config", help="JSON config file; flags override its values")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--n-samples", type=int)
    parser.add_argument("--p-max", type=int)
    parser.add_argument("--lambda-a", type=float)
    parser.add_argument("--lambda-d", type=float)
    parser.add_argument("--inpainter", help="mean | diffusion | external:<cmd>")
    parser.add_argument("--detector", help="null | residual | external:<cmd>")
    parser.add_argument("--metric", help="l2 | patch-stats | external:<cmd>")
    parser.add_argument("--workers", type=int, help="worker processes (default: AURA_WORKERS or CPU count)")
    parser.add_argument("--out", required=True, help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="aura", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_gen = sub.add_parser("generate", help="refine a segmentation mask for object removal")
    _add_config_flags(p_gen)
    p_gen.set_defaults(func=_cmd_generate)

    p_bench = sub.add_parser("bench", help="run the synthetic fixture benchmark")
    p_bench.add_argument("--scenes", type=int, help="limit the suite to the first N scenes")
    p_bench.add_argument("--seeds", type=int, default=1, help="sampler seeds per scene")
    p_bench.add_argument("--kernel-sizes", default="0,10,20,30,40")
    p_bench.add_argument("--halos", default="0,1,2,4")
    p_bench.add_argument("--n-samples", type=int, default=2000)
    p_bench.add_argument("--workers", type=int)
    p_bench.add_argument("--out", required=True)
    p_bench.set_defaults(func=_cmd_bench)

    p_imp = sub.add_parser("importance-only", help="emit the importance grid and heatmap")
    _add_config_flags(p_imp)
    p_imp.set_defaults(func=_cmd_importance_only)

    p_judge = sub.add_parser("judge-only", help="score one mask with the judge")
    _add_config_flags(p_judge)
    p_judge.add_argument("--query-mask", help="hole mask to score (default: the target mask)")
    p_judge.set_defaults(func=_cmd_judge_only)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except OracleProcessError as exc:
        print(f"oracle failure: {exc}", file=sys.stderr)
        if exc.stderr:
            print(exc.stderr, file=sys.stderr)
        return EXIT_ORACLE
    except (ValueError, OSError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
