"""Command-line front door.

Exit codes: 0 success / no findings, 1 lint findings present, 2 usage or
file/parse error, 3 cycle detected by a tool that requires acyclicity.
stdout carries the document; stderr carries human messages.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import analysis, report
from .addressing import Region, parse_region
from .depgraph import build_graph
from .errors import SheetLensError
from .workbook import Workbook, load_grid, load_json

EXIT_OK = 0
EXIT_FINDINGS = 1
EXIT_USAGE = 2
EXIT_CYCLE = 3

# CLI subcommand -> canonical tool name
_SUBCOMMAND_TOOLS = {
    "classify": "classify",
    "precedents": "multi_precedents",
    "dependents": "multi_dependents",
    "blockprec": "block_precedents",
    "inblock": "in_block_links",
    "components": "separated_blocks",
    "levels": "level_overlay",
    "lint": "lint",
}


def _depth(value: str) -> int | None:
    if value == "all":
        return None
    try:
        depth = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"depth must be a positive integer or 'all', got {value!r}")
    if depth < 1:
        raise argparse.ArgumentTypeError("depth must be >= 1")
    return depth


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sheetlens",
        description="Make the formula-dependency structure of a spreadsheet visible.",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="subcommand")

    def tool_parser(name: str, help_text: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("file", help="input document (.grid or .json)")
        p.add_argument("--region", help="region in A1 text, e.g. B1:B5")
        p.add_argument("--block", help="block in A1 text, e.g. B20:G20")
        p.add_argument("--depth", type=_depth, default=None, help="N or 'all' (default all)")
        p.add_argument("--checks", help="comma-separated lint checks (broken,irregular,recompute)")
        p.add_argument("--format", choices=("json", "svg", "text"), default="json")
        p.add_argument("-o", "--output", help="write the document here instead of stdout")
        return p

    tool_parser("classify", "color cells input/output/processing/standalone")
    tool_parser("precedents", "arrows to everything a block depends on")
    tool_parser("dependents", "arrows to everything depending on a block")
    tool_parser("blockprec", "precedent relationships between blocks")
    tool_parser("inblock", "only the links inside a region")
    tool_parser("components", "separated groups of connected cells")
    tool_parser("levels", "longest-distance-from-input level labels")
    tool_parser("lint", "run the error-detection checks")
    svg = tool_parser("svg", "render a tool overlay as SVG")
    svg.add_argument(
        "--tool",
        choices=sorted(_SUBCOMMAND_TOOLS),
        default="classify",
        help="which analysis to render (default classify)",
    )
    svg.set_defaults(format="svg")

    serve = sub.add_parser("serve", help="start the HTTP analysis service")
    serve.add_argument("--port", type=int, default=8000)
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--ui", help="directory with the built UI bundle to serve at /")
    return parser


def _load_workbook(path_text: str) -> Workbook:
    path = Path(path_text)
    suffix = path.suffix.lower()
    if suffix not in (".grid", ".json"):
        raise SheetLensError(f"cannot sniff file type of {path.name!r}; use .grid or .json")
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise SheetLensError(f"cannot read {path}: {exc.strerror}") from exc
    return load_json(text) if suffix == ".json" else load_grid(text)


def _parse_optional_region(text: str | None, default_sheet: str) -> Region | None:
    return None if text is None else parse_region(text, default_sheet)


def _emit(text: str, output: str | None) -> None:
    if output is None:
        sys.stdout.write(text)
    else:
        Path(output).write_text(text, encoding="utf-8")


def run(argv: list[str]) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE

    if args.command == "serve":
        return _serve(args)

    command = args.command
    tool = _SUBCOMMAND_TOOLS[command if command != "svg" else args.tool]
    try:
        wb = _load_workbook(args.file)
        graph = build_graph(wb)
        region = _parse_optional_region(args.region, graph.default_sheet)
        block = _parse_optional_region(args.block, graph.default_sheet)
        checks = args.checks.split(",") if args.checks else None
        doc = analysis.build_document(
            wb, graph, tool, region=region, block=block, depth=args.depth, checks=checks
        )
        if args.format == "json":
            text = report.to_json(doc)
        elif args.format == "text":
            text = report.to_text(doc)
        else:
            text = report.to_svg(wb, doc.overlay)
        _emit(text, args.output)
    except analysis.UsageError as exc:
        print(f"sheetlens: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SheetLensError as exc:
        print(f"sheetlens: {exc}", file=sys.stderr)
        return EXIT_USAGE

    if tool == "level_overlay" and analysis.has_cycle_diagnostic(doc):
        for diag in doc.diagnostics:
            print(f"sheetlens: {diag.message}", file=sys.stderr)
        return EXIT_CYCLE
    if tool == "lint" and doc.diagnostics:
        return EXIT_FINDINGS
    return EXIT_OK


def _serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(ui_dir=args.ui)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return EXIT_OK


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
