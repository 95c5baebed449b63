import argparse
import sys

from .render import PlotSpec, render_boxplot
from .stats import DEFAULT_ORDER, METRICS, PlotError


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="plot_results",
        description="Render a per-mechanism box plot from an experiment CSV.",
    )
    parser.add_argument("--in", dest="input", required=True, help="results CSV")
    parser.add_argument("--metric", required=True, choices=METRICS)
    parser.add_argument("--out", required=True, help="output image path")
    parser.add_argument(
        "--order",
        default=",".join(DEFAULT_ORDER),
        help="comma list of mechanisms, left to right",
    )
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    spec = PlotSpec(
        input=args.input,
        metric=args.metric,
        output=args.out,
        order=tuple(args.order.split(",")),
    )
    try:
        stats = render_boxplot(spec)
    except (PlotError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    print(f"wrote {spec.output} ({len(stats)} box groups)", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
