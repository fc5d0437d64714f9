"""The six visual analyses and the strategy-derived lints.

Each analysis yields an :class:`Overlay` (fills, arrows, blocks, levels,
components) and possibly a list of :class:`Diagnostic`. Everything here is a
pure read-only function of an immutable workbook and graph.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from decimal import Decimal
from enum import Enum
from typing import Union

from . import depgraph as dg
from .addressing import CellAddress, Region, bounding_region
from .errors import EvalError
from .formula import evaluate, normalize_pattern
from .workbook import Formula, Number, Workbook

# Diagnostic codes (one per debugging strategy, plus plumbing).
STANDALONE_VALUE = "STANDALONE_VALUE"
PATTERN_BREAK = "PATTERN_BREAK"
IRREGULAR_PATTERN = "IRREGULAR_PATTERN"
AMBIGUOUS_MAJORITY = "AMBIGUOUS_MAJORITY"
VALUE_MISMATCH = "VALUE_MISMATCH"
CYCLE = "CYCLE"
DANGLING_REF = "DANGLING_REF"

# Pattern-run lint thresholds (see lint_broken_links).
RUN_MIN_CELLS = 3
RUN_MIN_FORMULA_SHARE = (3, 5)  # >= 60%, kept as an exact fraction

# Recompute tolerance: |stored - evaluated| > max(ABS_TOL, REL_TOL * |evaluated|).
ABS_TOL = Decimal("1E-9")
REL_TOL = Decimal("0.000001")


class Kind(Enum):
    INPUT = "input"
    OUTPUT = "output"
    PROCESSING = "processing"
    STANDALONE = "standalone"


@dataclass(frozen=True)
class Classification:
    """Per-cell functional kind, decided purely by graph degrees."""

    kinds: dict[CellAddress, Kind]
    text_standalones: frozenset[CellAddress]

    def counts(self) -> dict[Kind, int]:
        out = {kind: 0 for kind in Kind}
        for k in self.kinds.values():
            out[k] += 1
        return out


@dataclass(frozen=True)
class Arrow:
    src: Union[CellAddress, int]
    dst: Union[CellAddress, int]
    kind: str = "cell"  # "cell" or "block"
    component: int | None = None


@dataclass
class Overlay:
    fills: list[tuple[CellAddress, str]] = field(default_factory=list)
    arrows: list[Arrow] = field(default_factory=list)
    blocks: list[tuple[int, Region]] = field(default_factory=list)
    levels: list[tuple[CellAddress, int]] = field(default_factory=list)
    components: list[tuple[int, tuple[CellAddress, ...]]] = field(default_factory=list)


@dataclass(frozen=True)
class Diagnostic:
    code: str
    cells: tuple[CellAddress, ...]
    severity: str
    message: str


@dataclass
class ToolResult:
    overlay: Overlay
    diagnostics: list[Diagnostic] = field(default_factory=list)


def _sorted_addrs(addrs) -> list[CellAddress]:
    return sorted(addrs, key=CellAddress.sort_key)


def _cell_arrows(edges) -> list[Arrow]:
    return [Arrow(p, d) for p, d in edges]


def classify(g: dg.DepGraph, region: Region | None = None) -> tuple[Classification, ToolResult]:
    """Assign Input/Output/Processing/Standalone kinds by in/out degree.

    Degrees always count against the whole graph; ``region`` only restricts
    which cells are reported. Phantom-empty nodes come out as Input (they
    have dependents by construction).
    """
    kinds: dict[CellAddress, Kind] = {}
    text_standalones: set[CellAddress] = set()
    for node in g.nodes:
        if region is not None and not region.contains(node):
            continue
        has_in = bool(g.precedents_of(node))
        has_out = bool(g.dependents_of(node))
        if has_in and has_out:
            kind = Kind.PROCESSING
        elif has_in:
            kind = Kind.OUTPUT
        elif has_out:
            kind = Kind.INPUT
        else:
            kind = Kind.STANDALONE
            if g.node_kind[node] == dg.KIND_TEXT:
                text_standalones.add(node)
        kinds[node] = kind
    overlay = Overlay(fills=[(addr, kinds[addr].value) for addr in _sorted_addrs(kinds)])
    return Classification(kinds, frozenset(text_standalones)), ToolResult(overlay)


def _seed_cells(g: dg.DepGraph, block: Region) -> list[CellAddress]:
    return [n for n in g.nodes if block.contains(n)]


def _mark_seeds(g: dg.DepGraph, seeds: list[CellAddress]) -> list[tuple[CellAddress, str]]:
    classification, _ = classify(g)
    return [(addr, classification.kinds[addr].value) for addr in seeds]


def multi_precedents(g: dg.DepGraph, block: Region, depth: int | None = None) -> ToolResult:
    """Arrows for the precedent closure of every cell in the block."""
    seeds = _seed_cells(g, block)
    closure = dg.precedents(g, seeds, depth)
    overlay = Overlay(fills=_mark_seeds(g, seeds), arrows=_cell_arrows(closure.arrows))
    return ToolResult(overlay)


def multi_dependents(g: dg.DepGraph, block: Region, depth: int | None = None) -> ToolResult:
    """Mirror of :func:`multi_precedents` over forward edges."""
    seeds = _seed_cells(g, block)
    closure = dg.dependents(g, seeds, depth)
    overlay = Overlay(fills=_mark_seeds(g, seeds), arrows=_cell_arrows(closure.arrows))
    return ToolResult(overlay)


def _adjacency_clusters(cells: set[CellAddress]) -> list[list[CellAddress]]:
    """Partition cells into 8-adjacency clusters, ordered by smallest member."""
    remaining = set(cells)
    clusters = []
    for start in _sorted_addrs(cells):
        if start not in remaining:
            continue
        members = []
        stack = [start]
        remaining.discard(start)
        while stack:
            cell = stack.pop()
            members.append(cell)
            for dr in (-1, 0, 1):
                for dc in (-1, 0, 1):
                    if dr == 0 and dc == 0:
                        continue
                    row, col = cell.row + dr, cell.col + dc
                    if row < 1 or col < 1:
                        continue
                    nb = CellAddress(cell.sheet, col, row)
                    if nb in remaining:
                        remaining.discard(nb)
                        stack.append(nb)
        clusters.append(_sorted_addrs(members))
    return clusters


def block_precedents(g: dg.DepGraph, block: Region, depth: int | None = None) -> ToolResult:
    """Relationships among blocks rather than cells.

    Level by level, the frontier blocks' direct precedents are clustered by
    8-adjacency (neighbouring precedents make up one block); each cluster
    becomes a block with one block-arrow to the block it feeds, then the
    clusters form the next frontier. Cells already boxed at an earlier level
    are not boxed again, so the walk terminates on cyclic graphs too.
    """
    seeds = _seed_cells(g, block)
    overlay = Overlay(fills=_mark_seeds(g, seeds), blocks=[(0, block)])
    frontier: list[tuple[int, list[CellAddress]]] = [(0, seeds)]
    covered: set[CellAddress] = set()
    next_id = 1
    level = 0
    while frontier and (depth is None or level < depth):
        level += 1
        new_frontier = []
        claimed: set[CellAddress] = set()
        for block_id, members in frontier:
            preds: set[CellAddress] = set()
            for cell in members:
                preds.update(g.precedents_of(cell))
            for cluster in _adjacency_clusters(preds - covered):
                overlay.blocks.append((next_id, bounding_region(cluster)))
                overlay.arrows.append(Arrow(next_id, block_id, kind="block"))
                new_frontier.append((next_id, cluster))
                claimed.update(cluster)
                next_id += 1
        covered |= claimed
        frontier = new_frontier
    return ToolResult(overlay)


def in_block_links(g: dg.DepGraph, region: Region) -> ToolResult:
    """Only the edges with both endpoints inside the region; nothing else."""
    arrows = [
        Arrow(p, d)
        for p, d in g.edges()
        if region.contains(p) and region.contains(d)
    ]
    return ToolResult(Overlay(arrows=arrows))


def separated_blocks(g: dg.DepGraph, scope: Region | None = None) -> ToolResult:
    """Weakly connected components, each with its own fill and arrow group."""
    comps = dg.components(g, scope)
    overlay = Overlay()
    comp_of: dict[CellAddress, int] = {}
    for cid, members in enumerate(comps):
        overlay.components.append((cid, members))
        for addr in members:
            comp_of[addr] = cid
    overlay.fills = [
        (addr, f"component-{comp_of[addr]}") for addr in _sorted_addrs(comp_of)
    ]
    h = g.induced(scope)
    overlay.arrows = [
        Arrow(p, d, component=comp_of[p]) for p, d in h.edges()
    ]
    return ToolResult(overlay)


def level_overlay(g: dg.DepGraph, region: Region | None = None) -> ToolResult:
    """Longest-distance-from-input level per cell.

    Cells inside or downstream of a cycle cannot be leveled; they surface as
    CYCLE diagnostics instead of level entries.
    """
    lm = dg.level_labels(g, region)
    overlay = Overlay(
        levels=[(addr, lm.levels[addr]) for addr in _sorted_addrs(lm.levels)]
    )
    diagnostics = []
    if lm.in_cycle:
        for cycle in dg.detect_cycles(g.induced(region)):
            path = " -> ".join(a.text(g.default_sheet) for a in cycle)
            diagnostics.append(
                Diagnostic(
                    CYCLE,
                    cycle,
                    "error",
                    f"circular reference through {path}",
                )
            )
    return ToolResult(overlay, diagnostics)


def _diag_sort_key(diag: Diagnostic):
    return (diag.cells[0].sort_key(), diag.code)


def _runs(wb: Workbook) -> list[list]:
    """Maximal runs of vertically or horizontally consecutive non-empty cells."""
    runs = []
    for sheet in wb.sheets:
        by_col: dict[int, list] = {}
        by_row: dict[int, list] = {}
        for (row, col), cell in sheet.cells.items():
            by_col.setdefault(col, []).append((row, cell))
            by_row.setdefault(row, []).append((col, cell))
        for groups, _axis in ((by_col, "col"), (by_row, "row")):
            for _key, entries in sorted(groups.items()):
                entries.sort()
                run = []
                prev = None
                for pos, cell in entries:
                    if prev is not None and pos != prev + 1:
                        runs.append(run)
                        run = []
                    run.append(cell)
                    prev = pos
                runs.append(run)
    return [r for r in runs if len(r) >= RUN_MIN_CELLS]


def lint_broken_links(wb: Workbook, g: dg.DepGraph) -> list[Diagnostic]:
    """The broken-link strategy: formulas accidentally replaced by values.

    Flags standalone number cells (text standalones such as headings are
    exempt), number cells interrupting a copy-filled run, and formulas that
    reference empty cells.
    """
    diagnostics = []
    classification, _ = classify(g)
    for addr, kind in classification.kinds.items():
        if kind is Kind.STANDALONE and g.node_kind[addr] == dg.KIND_NUMBER:
            diagnostics.append(
                Diagnostic(
                    STANDALONE_VALUE,
                    (addr,),
                    "warning",
                    f"{addr.text(g.default_sheet)} holds a value that no formula uses"
                    " and no formula produces",
                )
            )
    flagged: set[CellAddress] = set()
    num, den = RUN_MIN_FORMULA_SHARE
    for run in _runs(wb):
        formulas = [c for c in run if isinstance(c.content, Formula)]
        if not formulas or len(formulas) * den < len(run) * num:
            continue
        patterns = {
            normalize_pattern(c.content.ast, c.addr) for c in formulas
        }
        if len(patterns) != 1:
            continue
        (pattern,) = patterns
        for cell in run[1:-1]:
            if isinstance(cell.content, Number) and cell.addr not in flagged:
                flagged.add(cell.addr)
                diagnostics.append(
                    Diagnostic(
                        PATTERN_BREAK,
                        (cell.addr,),
                        "warning",
                        f"{cell.addr.text(g.default_sheet)} is a plain value inside"
                        f" a run of formulas sharing the pattern {pattern}",
                    )
                )
    for cell in wb.iter_cells():
        if not isinstance(cell.content, Formula):
            continue
        missing = _sorted_addrs(
            p for p in g.precedents_of(cell.addr) if g.is_phantom(p)
        )
        if missing:
            names = ", ".join(a.text(g.default_sheet) for a in missing)
            diagnostics.append(
                Diagnostic(
                    DANGLING_REF,
                    (cell.addr, *missing),
                    "warning",
                    f"{cell.addr.text(g.default_sheet)} references empty cells: {names}",
                )
            )
    return sorted(diagnostics, key=_diag_sort_key)


def lint_irregular(wb: Workbook, g: dg.DepGraph, block: Region) -> list[Diagnostic]:
    """The unwanted-link strategy: pattern deviations inside a block.

    Needs at least three formula cells and a strict-majority pattern to
    judge; otherwise the result is a single AMBIGUOUS_MAJORITY warning.
    """
    cells = [
        wb.cell(addr)
        for addr in _seed_cells(g, block)
        if not g.is_phantom(addr)
    ]
    formulas = [c for c in cells if c is not None and isinstance(c.content, Formula)]
    block_text = block.text(g.default_sheet)

    def ambiguous(reason: str) -> list[Diagnostic]:
        subjects = tuple(c.addr for c in formulas) or (block.top_left,)
        return [
            Diagnostic(
                AMBIGUOUS_MAJORITY,
                subjects,
                "warning",
                f"block {block_text} {reason}",
            )
        ]

    if len(formulas) < 3:
        return ambiguous("holds fewer than 3 formulas; no pattern to judge")
    by_pattern: dict[str, list[CellAddress]] = {}
    for cell in formulas:
        pattern = normalize_pattern(cell.content.ast, cell.addr)
        by_pattern.setdefault(pattern, []).append(cell.addr)
    majority, members = max(by_pattern.items(), key=lambda kv: (len(kv[1]), kv[0]))
    if len(members) * 2 <= len(formulas):
        return ambiguous("has no majority pattern")
    diagnostics = []
    for pattern, addrs in by_pattern.items():
        if pattern == majority:
            continue
        for addr in addrs:
            diagnostics.append(
                Diagnostic(
                    IRREGULAR_PATTERN,
                    (addr,),
                    "warning",
                    f"{addr.text(g.default_sheet)} deviates from the majority"
                    f" pattern {majority} of block {block_text} (has {pattern})",
                )
            )
    return sorted(diagnostics, key=_diag_sort_key)


def lint_recompute(wb: Workbook, g: dg.DepGraph) -> list[Diagnostic]:
    """Re-evaluate formulas whose stored value survived a broken edit.

    Only the supported arithmetic subset is checked; formulas the evaluator
    cannot handle are skipped silently.
    """

    def lookup(addr: CellAddress) -> Decimal | None:
        cell = wb.cell(addr)
        if cell is None:
            return None
        if isinstance(cell.content, Number):
            return cell.content.value
        if isinstance(cell.content, Formula):
            return cell.content.stored
        return None

    diagnostics = []
    for cell in wb.iter_cells():
        content = cell.content
        if not isinstance(content, Formula) or content.stored is None:
            continue
        try:
            value = evaluate(content.ast, lookup, cell.addr)
        except EvalError:
            continue
        if abs(content.stored - value) > max(ABS_TOL, REL_TOL * abs(value)):
            diagnostics.append(
                Diagnostic(
                    VALUE_MISMATCH,
                    (cell.addr,),
                    "error",
                    f"{cell.addr.text(g.default_sheet)} stores {content.stored}"
                    f" but its formula evaluates to {value}",
                )
            )
    return sorted(diagnostics, key=_diag_sort_key)
