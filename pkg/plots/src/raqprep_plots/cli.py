"""Figure-rendering CLI: `raqprep-plots render --spec <file>` with an INI
spec, or the positional shorthand `raqprep-plots <kind> <csv> <out>`.

Exit codes: 0 rendered, 1 bad arguments or spec file, 2 unusable CSV
(missing columns are named in the error)."""

from __future__ import annotations

import configparser
import sys
from pathlib import Path
from typing import Optional, Sequence

from .figures import FIGURE_KINDS, FigureSpec, RenderError, render

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2

USAGE = (
    "usage: raqprep-plots render --spec <file>\n"
    "       raqprep-plots <kind> <csv> <out>\n"
    f"kinds: {', '.join(FIGURE_KINDS)}\n"
    "spec file: [figure] section with kind, csv, out, and optional\n"
    "x_scale, y_scale, title keys"
)

_SPEC_KEYS = {"kind", "csv", "out", "x_scale", "y_scale", "title"}


def load_spec(path: Path) -> FigureSpec:
    parser = configparser.ConfigParser(interpolation=None)
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except (OSError, configparser.Error) as exc:
        raise RenderError(f"cannot parse spec {path}: {exc}") from exc
    if not parser.has_section("figure"):
        raise RenderError(f"spec {path} needs a [figure] section")
    section = parser["figure"]
    unknown = set(section) - _SPEC_KEYS
    if unknown:
        raise RenderError(f"unknown spec key(s): {', '.join(sorted(unknown))}")
    for key in ("kind", "csv", "out"):
        if key not in section:
            raise RenderError(f"spec {path} is missing {key!r}")
    base = path.parent
    csv_path = Path(section["csv"])
    out_path = Path(section["out"])
    return FigureSpec(
        kind=section["kind"].strip(),
        csv_path=csv_path if csv_path.is_absolute() else base / csv_path,
        output_path=out_path if out_path.is_absolute() else base / out_path,
        x_scale=section.get("x_scale", "").strip() or None,
        y_scale=section.get("y_scale", "").strip() or None,
        title=section.get("title", "").strip(),
    )


def cli_run(argv: Optional[Sequence[str]] = None) -> int:
    args = list(sys.argv[1:] if argv is None else argv)
    try:
        if args and args[0] == "render":
            if len(args) != 3 or args[1] != "--spec":
                print(USAGE, file=sys.stderr)
                return EXIT_USAGE
            spec = load_spec(Path(args[2]))
        elif len(args) == 3:
            spec = FigureSpec(kind=args[0], csv_path=Path(args[1]),
                              output_path=Path(args[2]))
        else:
            print(USAGE, file=sys.stderr)
            return EXIT_USAGE
    except RenderError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        out = render(spec)
    except RenderError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    print(out)
    return EXIT_OK


def main() -> None:
    sys.exit(cli_run())
