"""sheetlens: make the formula-dependency structure of a spreadsheet visible.

The library exposes the building blocks directly; the ``sheetlens`` CLI and
the HTTP service (``sheetlens serve``) are thin front doors over them.
"""

from .addressing import CellAddress, Region, parse_region
from .analysis import build_document
from .depgraph import DepGraph, build_graph, components, dependents, detect_cycles, level_labels, precedents
from .formula import evaluate, extract_references, normalize_pattern, parse_formula, to_source
from .report import ReportDocument, to_json, to_svg, workbook_digest
from .service import create_app
from .tools import (
    classify,
    in_block_links,
    block_precedents,
    level_overlay,
    lint_broken_links,
    lint_irregular,
    lint_recompute,
    multi_dependents,
    multi_precedents,
    separated_blocks,
)
from .workbook import Workbook, dump_grid, dump_json, load_grid, load_json

__version__ = "0.1.0"

__all__ = [
    "CellAddress",
    "Region",
    "parse_region",
    "Workbook",
    "load_grid",
    "load_json",
    "dump_grid",
    "dump_json",
    "parse_formula",
    "to_source",
    "extract_references",
    "normalize_pattern",
    "evaluate",
    "DepGraph",
    "build_graph",
    "precedents",
    "dependents",
    "components",
    "detect_cycles",
    "level_labels",
    "classify",
    "multi_precedents",
    "multi_dependents",
    "block_precedents",
    "in_block_links",
    "separated_blocks",
    "level_overlay",
    "lint_broken_links",
    "lint_irregular",
    "lint_recompute",
    "build_document",
    "ReportDocument",
    "to_json",
    "to_svg",
    "workbook_digest",
    "create_app",
    "__version__",
]
