"""The cell dependency graph and its structural queries.

Edges run precedent -> dependent: an edge (p, d) exists iff d's formula
references p. A formula referencing an empty cell still gets a node for the
target, flagged phantom, so arrows stay drawable and the dangling reference
stays visible to the lints.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator

from .addressing import CellAddress, Region
from .formula import extract_references
from .workbook import Formula, Number, Workbook

# Node kinds, by cell content ("empty" marks phantom nodes).
KIND_TEXT = "text"
KIND_NUMBER = "number"
KIND_FORMULA = "formula"
KIND_EMPTY = "empty"


def _addr_key(addr: CellAddress) -> tuple[str, int, int]:
    return addr.sort_key()


def _edge_key(edge: tuple[CellAddress, CellAddress]) -> tuple:
    return (_addr_key(edge[0]), _addr_key(edge[1]))


class DepGraph:
    """Immutable directed graph over cell addresses with two-way adjacency."""

    def __init__(
        self,
        node_kind: dict[CellAddress, str],
        edges: set[tuple[CellAddress, CellAddress]],
        default_sheet: str,
    ):
        self.node_kind = node_kind
        self.nodes: tuple[CellAddress, ...] = tuple(sorted(node_kind, key=_addr_key))
        self.default_sheet = default_sheet
        ins: dict[CellAddress, list[CellAddress]] = {n: [] for n in self.nodes}
        outs: dict[CellAddress, list[CellAddress]] = {n: [] for n in self.nodes}
        for p, d in sorted(edges, key=_edge_key):
            outs[p].append(d)
            ins[d].append(p)
        self._in = {n: tuple(v) for n, v in ins.items()}
        self._out = {n: tuple(v) for n, v in outs.items()}
        self._edges = tuple(sorted(edges, key=_edge_key))

    def __contains__(self, addr: CellAddress) -> bool:
        return addr in self.node_kind

    def precedents_of(self, addr: CellAddress) -> tuple[CellAddress, ...]:
        return self._in.get(addr, ())

    def dependents_of(self, addr: CellAddress) -> tuple[CellAddress, ...]:
        return self._out.get(addr, ())

    def edges(self) -> tuple[tuple[CellAddress, CellAddress], ...]:
        return self._edges

    def is_phantom(self, addr: CellAddress) -> bool:
        return self.node_kind.get(addr) == KIND_EMPTY

    def induced(self, scope: Region | None) -> "DepGraph":
        """Subgraph on the nodes inside ``scope`` (the whole graph when absent)."""
        if scope is None:
            return self
        kinds = {n: k for n, k in self.node_kind.items() if scope.contains(n)}
        edges = {(p, d) for p, d in self._edges if p in kinds and d in kinds}
        return DepGraph(kinds, edges, self.default_sheet)


def build_graph(wb: Workbook) -> DepGraph:
    """Extract every formula's references into edges; deterministic order."""
    node_kind: dict[CellAddress, str] = {}
    edges: set[tuple[CellAddress, CellAddress]] = set()
    for cell in wb.iter_cells():
        content = cell.content
        if isinstance(content, Formula):
            node_kind[cell.addr] = KIND_FORMULA
        elif isinstance(content, Number):
            node_kind[cell.addr] = KIND_NUMBER
        else:
            node_kind[cell.addr] = KIND_TEXT
    for cell in wb.iter_cells():
        if not isinstance(cell.content, Formula):
            continue
        for ref in extract_references(cell.content.ast, cell.addr).cells:
            # Sheet qualifiers match workbook sheets case-insensitively.
            canonical = wb.resolve_sheet(ref.sheet)
            if canonical is not None and canonical != ref.sheet:
                ref = CellAddress(canonical, ref.col, ref.row)
            if ref not in node_kind:
                node_kind[ref] = KIND_EMPTY
            edges.add((ref, cell.addr))
    return DepGraph(node_kind, edges, wb.default_sheet)


@dataclass(frozen=True)
class Closure:
    cells: tuple[CellAddress, ...]
    arrows: tuple[tuple[CellAddress, CellAddress], ...]


def _walk(
    g: DepGraph,
    seeds: Iterable[CellAddress],
    depth: int | None,
    backwards: bool,
) -> Closure:
    frontier = sorted({s for s in seeds if s in g}, key=_addr_key)
    visited = set(frontier)
    arrows: set[tuple[CellAddress, CellAddress]] = set()
    cells: set[CellAddress] = set()
    steps = 0
    while frontier and (depth is None or steps < depth):
        nxt = []
        for node in frontier:
            neighbours = g.precedents_of(node) if backwards else g.dependents_of(node)
            for nb in neighbours:
                arrows.add((nb, node) if backwards else (node, nb))
                cells.add(nb)
                if nb not in visited:
                    visited.add(nb)
                    nxt.append(nb)
        frontier = nxt
        steps += 1
    return Closure(
        tuple(sorted(cells, key=_addr_key)),
        tuple(sorted(arrows, key=_edge_key)),
    )


def precedents(g: DepGraph, seeds: Iterable[CellAddress], depth: int | None = None) -> Closure:
    """Cells reachable walking edges backwards at most ``depth`` steps
    (unbounded when None), plus every traversed edge. Cycles are traversed
    at most once per node."""
    return _walk(g, seeds, depth, backwards=True)


def dependents(g: DepGraph, seeds: Iterable[CellAddress], depth: int | None = None) -> Closure:
    """Mirror of :func:`precedents` over forward edges."""
    return _walk(g, seeds, depth, backwards=False)


def components(g: DepGraph, scope: Region | None = None) -> list[tuple[CellAddress, ...]]:
    """Weakly connected components of the induced subgraph.

    Standalone cells form singleton components. Components come out ordered
    by their smallest member, members in address order.
    """
    h = g.induced(scope)
    seen: set[CellAddress] = set()
    result: list[tuple[CellAddress, ...]] = []
    for start in h.nodes:
        if start in seen:
            continue
        members = []
        stack = [start]
        seen.add(start)
        while stack:
            node = stack.pop()
            members.append(node)
            for nb in h.precedents_of(node) + h.dependents_of(node):
                if nb not in seen:
                    seen.add(nb)
                    stack.append(nb)
        result.append(tuple(sorted(members, key=_addr_key)))
    return result


def _tarjan_sccs(g: DepGraph) -> list[list[CellAddress]]:
    index = 0
    idx: dict[CellAddress, int] = {}
    low: dict[CellAddress, int] = {}
    on_stack: set[CellAddress] = set()
    stack: list[CellAddress] = []
    sccs: list[list[CellAddress]] = []
    for root in g.nodes:
        if root in idx:
            continue
        work: list[tuple[CellAddress, int]] = [(root, 0)]
        while work:
            node, nxt = work[-1]
            if nxt == 0:
                idx[node] = low[node] = index
                index += 1
                stack.append(node)
                on_stack.add(node)
            descended = False
            succs = g.dependents_of(node)
            for i in range(nxt, len(succs)):
                succ = succs[i]
                if succ not in idx:
                    work[-1] = (node, i + 1)
                    work.append((succ, 0))
                    descended = True
                    break
                if succ in on_stack:
                    low[node] = min(low[node], idx[succ])
            if descended:
                continue
            if low[node] == idx[node]:
                scc = []
                while True:
                    member = stack.pop()
                    on_stack.discard(member)
                    scc.append(member)
                    if member == node:
                        break
                sccs.append(scc)
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[node])
    return sccs


def detect_cycles(g: DepGraph) -> list[tuple[CellAddress, ...]]:
    """Strongly connected components of size >= 2, plus self-loops."""
    cycles = []
    for scc in _tarjan_sccs(g):
        if len(scc) >= 2 or scc[0] in g.dependents_of(scc[0]):
            cycles.append(tuple(sorted(scc, key=_addr_key)))
    cycles.sort(key=lambda c: _addr_key(c[0]))
    return cycles


@dataclass(frozen=True)
class LevelMap:
    """Partition of a (sub)graph's cells by longest distance from inputs.

    ``levels`` maps each acyclic, connected cell to 1 + the longest
    precedent-path length to it; input cells sit at level 1. Standalone
    cells are unleveled; cells inside or downstream of a cycle have no
    defined longest path and land in ``in_cycle``.
    """

    levels: dict[CellAddress, int]
    unleveled: frozenset[CellAddress]
    in_cycle: frozenset[CellAddress]


def level_labels(g: DepGraph, scope: Region | None = None) -> LevelMap:
    h = g.induced(scope)
    in_cycle: set[CellAddress] = set()
    for cycle in detect_cycles(h):
        in_cycle.update(cycle)
    stack = list(in_cycle)
    while stack:
        node = stack.pop()
        for nb in h.dependents_of(node):
            if nb not in in_cycle:
                in_cycle.add(nb)
                stack.append(nb)
    levels: dict[CellAddress, int] = {}
    unleveled: set[CellAddress] = set()
    pending = {n: len(h.precedents_of(n)) for n in h.nodes if n not in in_cycle}
    queue = [n for n in h.nodes if n not in in_cycle and pending[n] == 0]
    head = 0
    while head < len(queue):
        node = queue[head]
        head += 1
        precs = h.precedents_of(node)
        if not precs:
            if not h.dependents_of(node):
                unleveled.add(node)
                continue
            levels[node] = 1
        else:
            levels[node] = 1 + max(levels[p] for p in precs)
        for nb in h.dependents_of(node):
            if nb in in_cycle:
                continue
            pending[nb] -= 1
            if pending[nb] == 0:
                queue.append(nb)
    return LevelMap(levels, frozenset(unleveled), frozenset(in_cycle))
