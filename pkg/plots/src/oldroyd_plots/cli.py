"""Command-line entry point: render figures from a JSON spec file.

The spec file holds either a single figure object or ``{"figures":
[...]}``; each object follows FigureSpec.from_dict. Exit code 0 on
success, 2 on any spec or input error.
"""

import argparse
import json
import sys

from .errors import PlotError
from .figures import FigureSpec, render


def _load_specs(path) -> list:
    with open(path) as fh:
        doc = json.load(fh)
    docs = doc["figures"] if isinstance(doc, dict) and "figures" in doc else [doc]
    return [FigureSpec.from_dict(d) for d in docs]


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="oldroyd-plots",
        description="Render decay, heatmap, and overlay figures from "
                    "oldroyd-lab output files.")
    parser.add_argument("--spec", required=True,
                        help="JSON figure spec (single object or "
                             "{'figures': [...]})")
    args = parser.parse_args(argv)
    try:
        for spec in _load_specs(args.spec):
            for path in render(spec):
                print(path)
    except (PlotError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
