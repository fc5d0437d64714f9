"""Random workbook generation and independent oracles for property tests.

Workbooks are generated acyclic by construction: a formula may only
reference cells placed before it. All generated references are relative, so
translating a workbook is a pure offset rewrite.
"""

from __future__ import annotations

import random

from sheetlens import formula as fm
from sheetlens.addressing import CellAddress
from sheetlens.depgraph import DepGraph
from sheetlens.workbook import Cell, Formula, Sheet, Workbook, load_json

GRID_SPAN = 12


def random_workbook(rng: random.Random, max_cells: int = 100, max_refs: int = 3) -> Workbook:
    n = rng.randint(2, max_cells)
    span = GRID_SPAN
    positions = rng.sample(
        [(r, c) for r in range(1, span + 1) for c in range(1, span + 1)], n
    )
    placed: list[str] = []
    cells = []
    for row, col in positions:
        ref = f"{_letters(col)}{row}"
        roll = rng.random()
        if placed and roll < 0.45:
            k = rng.randint(1, min(max_refs, len(placed)))
            targets = rng.sample(placed, k)
            op = rng.choice("+-*")
            cells.append({"ref": ref, "formula": "=" + op.join(targets)})
        elif roll < 0.9:
            cells.append({"ref": ref, "value": rng.randint(0, 9999)})
        else:
            cells.append({"ref": ref, "text": f"label {len(placed)}"})
        placed.append(ref)
    doc = {"sheets": [{"name": "Sheet1", "cells": cells}]}
    import json

    return load_json(json.dumps(doc))


def _letters(col: int) -> str:
    out = ""
    while col > 0:
        col, rem = divmod(col - 1, 26)
        out = chr(ord("A") + rem) + out
    return out


def translate_workbook(wb: Workbook, dr: int, dc: int) -> Workbook:
    """Shift every cell by (dr, dc), rewriting relative references to match."""
    sheets = []
    for sheet in wb.sheets:
        moved = Sheet(sheet.name)
        for (row, col), cell in sorted(sheet.cells.items()):
            addr = CellAddress(sheet.name, col + dc, row + dr)
            content = cell.content
            if isinstance(content, Formula):
                ast = fm.shift_relative(content.ast, dr, dc)
                content = Formula(fm.to_source(ast), ast, content.stored)
            moved.cells[(addr.row, addr.col)] = Cell(addr, content)
        sheets.append(moved)
    return Workbook(sheets)


# ---------------------------------------------------------------------------
# Oracles: same answers, different route.


def oracle_closure(g: DepGraph, seeds, backwards: bool):
    """Recursive DFS transitive closure plus the traversed edge set."""
    neighbours = g.precedents_of if backwards else g.dependents_of
    seeds = [s for s in seeds if s in g]
    reached: set = set()

    def visit(node):
        for nb in neighbours(node):
            if nb not in reached:
                reached.add(nb)
                visit(nb)

    for seed in seeds:
        visit(seed)
    boundary = reached | set(seeds)
    if backwards:
        arrows = {(p, d) for p, d in g.edges() if d in boundary and p in reached}
    else:
        arrows = {(p, d) for p, d in g.edges() if p in boundary and d in reached}
    return reached, arrows


def oracle_components(g: DepGraph):
    """Union-find partition over undirected edges."""
    parent = {n: n for n in g.nodes}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for p, d in g.edges():
        rp, rd = find(p), find(d)
        if rp != rd:
            parent[rp] = rd
    groups: dict = {}
    for node in g.nodes:
        groups.setdefault(find(node), set()).add(node)
    return sorted(
        (frozenset(members) for members in groups.values()),
        key=lambda s: min(a.sort_key() for a in s),
    )


def oracle_levels(g: DepGraph):
    """Memoized longest-distance-from-inputs recursion (acyclic graphs only)."""
    memo: dict = {}

    def level(node):
        if node in memo:
            return memo[node]
        precs = g.precedents_of(node)
        value = 1 if not precs else 1 + max(level(p) for p in precs)
        memo[node] = value
        return value

    levels = {}
    unleveled = set()
    for node in g.nodes:
        if not g.precedents_of(node) and not g.dependents_of(node):
            unleveled.add(node)
        else:
            levels[node] = level(node)
    return levels, unleveled
