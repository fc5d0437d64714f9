"""Tool dispatch shared by the CLI and the HTTP service.

Both front doors funnel requests through :func:`build_document`, so a given
(workbook, tool, parameters) triple always produces the same report bytes.
"""

from __future__ import annotations

from . import depgraph as dg
from . import tools
from .addressing import Region
from .report import ReportDocument, workbook_digest
from .workbook import Workbook

TOOLS = (
    "classify",
    "multi_precedents",
    "multi_dependents",
    "block_precedents",
    "in_block_links",
    "separated_blocks",
    "level_overlay",
    "lint",
)

ALL_CHECKS = ("broken", "irregular", "recompute")

_NEEDS_BLOCK = {"multi_precedents", "multi_dependents", "block_precedents"}
_TAKES_DEPTH = _NEEDS_BLOCK


class UsageError(ValueError):
    """A request names an unknown tool or omits a required parameter."""


def canonical_checks(checks: list[str] | None, block: Region | None) -> list[str]:
    """Validate and order the lint check names.

    Defaults to every check, except that ``irregular`` needs a block: it is
    skipped from the default set when no block is given, and asking for it
    explicitly without one is an error.
    """
    if checks is None:
        selected = [c for c in ALL_CHECKS if c != "irregular" or block is not None]
    else:
        unknown = [c for c in checks if c not in ALL_CHECKS]
        if unknown:
            raise UsageError(f"unknown checks: {', '.join(unknown)}")
        if "irregular" in checks and block is None:
            raise UsageError("the irregular check needs a block")
        selected = [c for c in ALL_CHECKS if c in checks]
    return selected


def build_document(
    wb: Workbook,
    graph: dg.DepGraph,
    tool: str,
    region: Region | None = None,
    block: Region | None = None,
    depth: int | None = None,
    checks: list[str] | None = None,
) -> ReportDocument:
    if tool not in TOOLS:
        raise UsageError(f"unknown tool {tool!r}")
    if tool in _NEEDS_BLOCK and block is None:
        raise UsageError(f"tool {tool} needs a block")
    if tool == "in_block_links" and region is None:
        raise UsageError("tool in_block_links needs a region")

    ds = graph.default_sheet
    params: dict = {}
    if region is not None:
        params["region"] = region.text(ds)
    if block is not None:
        params["block"] = block.text(ds)
    if tool in _TAKES_DEPTH:
        params["depth"] = "all" if depth is None else depth

    if tool == "classify":
        _, result = tools.classify(graph, region)
    elif tool == "multi_precedents":
        result = tools.multi_precedents(graph, block, depth)
    elif tool == "multi_dependents":
        result = tools.multi_dependents(graph, block, depth)
    elif tool == "block_precedents":
        result = tools.block_precedents(graph, block, depth)
    elif tool == "in_block_links":
        result = tools.in_block_links(graph, region)
    elif tool == "separated_blocks":
        result = tools.separated_blocks(graph, region)
    elif tool == "level_overlay":
        result = tools.level_overlay(graph, region)
    else:
        selected = canonical_checks(checks, block)
        params["checks"] = selected
        diagnostics: list[tools.Diagnostic] = []
        if "broken" in selected:
            diagnostics.extend(tools.lint_broken_links(wb, graph))
        if "irregular" in selected:
            diagnostics.extend(tools.lint_irregular(wb, graph, block))
        if "recompute" in selected:
            diagnostics.extend(tools.lint_recompute(wb, graph))
        diagnostics.sort(key=lambda d: (d.cells[0].sort_key(), d.code))
        result = tools.ToolResult(tools.Overlay(), diagnostics)

    return ReportDocument(
        tool=tool,
        params=params,
        digest=workbook_digest(wb),
        overlay=result.overlay,
        diagnostics=result.diagnostics,
        default_sheet=ds,
    )


def has_cycle_diagnostic(doc: ReportDocument) -> bool:
    return any(d.code == tools.CYCLE for d in doc.diagnostics)
