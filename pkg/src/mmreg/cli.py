"""Command-line entry point: register, synth, and bench subcommands."""

import argparse
import json
import os
import sys

from .errors import StageError
from .imaging import save_image
from .pipeline import PipelineConfig, evaluate_recovery, run_registration
from .synth import synth_pair, truth_summary


def _parse_binarize(value):
    if value in ("otsu", "none"):
        return value, None
    if value.startswith("fixed:"):
        return "fixed", int(value.split(":", 1)[1])
    raise argparse.ArgumentTypeError("binarize must be otsu, none, or fixed:<t>")


def _parse_seeds(value):
    if ".." in value:
        lo, hi = value.split("..", 1)
        return list(range(int(lo), int(hi) + 1))
    return [int(v) for v in value.split(",") if v]


def _add_common_knobs(p):
    p.add_argument("--features", choices=["harris", "fast", "tensor"], default="harris")
    p.add_argument("--binarize", type=_parse_binarize, default=("otsu", None),
                   metavar="otsu|none|fixed:<t>")
    p.add_argument("--min-area", type=int, default=0)
    p.add_argument("--top-fraction", type=float, default=0.2)
    p.add_argument("--transform", choices=["tps", "similarity"], default="tps")
    p.add_argument("--lambda", dest="regularization", type=float, default=0.0)
    p.add_argument("--max-points", type=int, default=200)
    p.add_argument("--harris-k", type=float, default=0.04)
    p.add_argument("--fast-threshold", type=int, default=20)
    p.add_argument("--kr", type=int, default=5, help="shape-context radial bins")
    p.add_argument("--ktheta", type=int, default=12, help="shape-context angular bins")
    p.add_argument("--rmin", type=float, default=0.125)
    p.add_argument("--rmax", type=float, default=2.0)
    p.add_argument("--working-size", type=int, default=224)


def _knob_overrides(args) -> dict:
    mode, threshold = args.binarize
    return {
        "feature_source": args.features,
        "binarize": mode,
        "binarize_threshold": threshold,
        "min_component_area": args.min_area,
        "top_fraction": args.top_fraction,
        "transform": args.transform,
        "regularization": args.regularization,
        "max_points": args.max_points,
        "harris_k": args.harris_k,
        "fast_threshold": args.fast_threshold,
        "sc_radial_bins": args.kr,
        "sc_angular_bins": args.ktheta,
        "sc_r_min": args.rmin,
        "sc_r_max": args.rmax,
        "working_size": args.working_size,
    }


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mmreg", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    reg = sub.add_parser("register", help="register a moving image onto a fixed image")
    reg.add_argument("--fixed", required=True)
    reg.add_argument("--moving", required=True)
    reg.add_argument("--tensor-fixed", default=None)
    reg.add_argument("--tensor-moving", default=None)
    reg.add_argument("--out", required=True)
    reg.add_argument("--seed", type=int, default=0)
    _add_common_knobs(reg)

    syn = sub.add_parser("synth", help="generate a synthetic pair with known deformation")
    syn.add_argument("--seed", type=int, required=True)
    syn.add_argument("--deform", type=float, default=10.0)
    syn.add_argument("--out", required=True)

    ben = sub.add_parser("bench", help="synthetic recovery benchmark over many seeds")
    ben.add_argument("--seeds", type=_parse_seeds, required=True, metavar="n0..n1|a,b,c")
    ben.add_argument("--deform", type=float, default=10.0)
    ben.add_argument("--out", required=True)
    _add_common_knobs(ben)
    return parser


def _cmd_register(args) -> int:
    cfg = PipelineConfig(
        fixed_path=args.fixed,
        moving_path=args.moving,
        tensor_fixed=args.tensor_fixed,
        tensor_moving=args.tensor_moving,
        out_dir=args.out,
        seed=args.seed,
        **_knob_overrides(args),
    )
    report = run_registration(cfg)
    pre, post = report.metrics_pre, report.metrics_post
    print(f"inliers: {report.stages['inliers']} / {report.stages['candidates']} candidates")
    print(f"pre : rmse={pre['rmse']} aaid={pre['aaid']} ssim={pre['ssim']}")
    print(f"post: rmse={post['rmse']} aaid={post['aaid']} ssim={post['ssim']}")
    print(f"report: {report.outputs['report']}")
    return 0


def _cmd_synth(args) -> int:
    fixed, moving, truth = synth_pair(args.seed, args.deform)
    os.makedirs(args.out, exist_ok=True)
    fixed_path = os.path.join(args.out, "fixed.png")
    moving_path = os.path.join(args.out, "moving.png")
    truth_path = os.path.join(args.out, "truth.json")
    save_image(fixed, fixed_path)
    save_image(moving, moving_path)
    with open(truth_path, "w", encoding="utf-8") as fh:
        json.dump(truth_summary(truth), fh, indent=2)
        fh.write("\n")
    print(f"wrote {fixed_path}, {moving_path}, {truth_path}")
    return 0


def _cmd_bench(args) -> int:
    summary = evaluate_recovery(args.seeds, args.deform, _knob_overrides(args), args.out)
    for row in summary["rows"]:
        mark = "+" if row["improved"] else "-"
        print(
            f"seed {row['seed']:>4} [{mark}] "
            f"rmse {row['pre']['rmse']:>8} -> {row['post']['rmse']:>8}  "
            f"aaid {row['pre']['aaid']:>8} -> {row['post']['aaid']:>8}  "
            f"ssim {row['pre']['ssim']:>8} -> {row['post']['ssim']:>8}"
        )
    print(f"improvement fraction: {summary['improvement_fraction']:.2f}")
    print(f"median post ssim: {summary['median_post_ssim']}")
    summary_path = os.path.join(args.out, "summary.json")
    with open(summary_path, "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2)
        fh.write("\n")
    print(f"summary: {summary_path}")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {"register": _cmd_register, "synth": _cmd_synth, "bench": _cmd_bench}
    try:
        return handlers[args.command](args)
    except StageError as exc:
        print(f"error [{exc.stage}]: {exc.message}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
