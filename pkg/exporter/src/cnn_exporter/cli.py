"""Command line for the activation exporter."""

import argparse
import sys

from .export import export_feature_stack, list_supported_layers, supported_models


def build_parser():
    parser = argparse.ArgumentParser(prog="cnn-exporter", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    exp = sub.add_parser("export", help="write a 3-scale FMAP file for an image")
    exp.add_argument("--model", required=True, help=f"one of: {', '.join(supported_models())}")
    exp.add_argument("--image", required=True)
    exp.add_argument("--out", required=True)
    exp.add_argument("--weights", choices=["pretrained", "random"], default="pretrained")

    lay = sub.add_parser("layers", help="show which layers the exporter selects")
    lay.add_argument("--model", required=True)
    lay.add_argument("--weights", choices=["pretrained", "random"], default="random")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "export":
            rows = export_feature_stack(args.model, args.image, args.out, args.weights)
            for r in rows:
                print(f"{r.spatial:>3}x{r.spatial:<3} {r.channels:>4} ch  {r.name}")
            print(f"wrote {args.out}")
        else:
            for r in list_supported_layers(args.model, args.weights):
                print(f"{r.spatial:>3}x{r.spatial:<3} {r.channels:>4} ch  {r.name}")
        return 0
    except (ValueError, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
