"""Workbook data model and ingestion of the two input formats.

Grid format: UTF-8, one line per row, comma-separated fields with
RFC-4180-style double-quote escaping. A line ``## sheet:NAME`` starts a new
sheet (the default sheet is "Sheet1"). A field starting with "=" is a
formula; a field parsing as a plain decimal (optional sign, decimal point,
exponent, trailing "%") is a number; anything else is text. Thousands
separators, currency symbols, and parenthesized negatives deliberately fall
through to text — no locale guessing.

Workbook JSON format::

    {"sheets": [{"name": str, "cells": [
        {"ref": "A1", "text": str}
      | {"ref": "A1", "value": num}
      | {"ref": "A1", "formula": "=..", "value": optional num}
    ]}]}

Workbooks are immutable after load and safe to share across readers.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from decimal import Decimal
from typing import Iterator, Union

from . import formula as fm
from . import jsontext
from .addressing import (
    MAX_COLS,
    MAX_ROWS,
    CellAddress,
    Region,
    column_letters,
    parse_cell_text,
    parse_region,
)
from .errors import DuplicateCellError, FormatError, ParseError

__all__ = [
    "Text",
    "Number",
    "Formula",
    "Cell",
    "Sheet",
    "Workbook",
    "load_grid",
    "load_json",
    "dump_grid",
    "dump_json",
    "parse_region",
]

DEFAULT_SHEET = "Sheet1"


@dataclass(frozen=True)
class Text:
    value: str


@dataclass(frozen=True)
class Number:
    value: Decimal


@dataclass(frozen=True)
class Formula:
    source: str
    ast: fm.Node
    stored: Decimal | None = None


Content = Union[Text, Number, Formula]


@dataclass(frozen=True)
class Cell:
    addr: CellAddress
    content: Content

    @property
    def is_formula(self) -> bool:
        return isinstance(self.content, Formula)

    @property
    def is_number(self) -> bool:
        return isinstance(self.content, Number)

    @property
    def is_text(self) -> bool:
        return isinstance(self.content, Text)

    def display_text(self) -> str:
        """What the grid UI / SVG shows inside the cell."""
        c = self.content
        if isinstance(c, Text):
            return c.value
        if isinstance(c, Number):
            return str(c.value)
        return str(c.stored) if c.stored is not None else c.source


@dataclass
class Sheet:
    name: str
    cells: dict[tuple[int, int], Cell] = field(default_factory=dict)

    def bounds(self) -> Region | None:
        """Bounding box of non-empty cells, or None for an empty sheet."""
        if not self.cells:
            return None
        rows = [rc[0] for rc in self.cells]
        cols = [rc[1] for rc in self.cells]
        return Region(
            CellAddress(self.name, min(cols), min(rows)),
            CellAddress(self.name, max(cols), max(rows)),
        )


@dataclass
class Workbook:
    sheets: list[Sheet]

    @property
    def default_sheet(self) -> str:
        return self.sheets[0].name

    def sheet(self, name: str) -> Sheet | None:
        for s in self.sheets:
            if s.name == name:
                return s
        return None

    def resolve_sheet(self, name: str) -> str | None:
        """Canonical sheet name for a case-insensitive match, else None."""
        lowered = name.lower()
        for s in self.sheets:
            if s.name.lower() == lowered:
                return s.name
        return None

    def cell(self, addr: CellAddress) -> Cell | None:
        s = self.sheet(addr.sheet)
        if s is None:
            return None
        return s.cells.get((addr.row, addr.col))

    def iter_cells(self) -> Iterator[Cell]:
        """All cells in the global address order (sheet, row, col)."""
        for s in sorted(self.sheets, key=lambda s: s.name):
            for key in sorted(s.cells):
                yield s.cells[key]

    def cell_count(self) -> int:
        return sum(len(s.cells) for s in self.sheets)

    def used_bounds(self) -> Region | None:
        """Row/column envelope across all sheets (reported without a sheet)."""
        regions = [s.bounds() for s in self.sheets]
        regions = [r for r in regions if r is not None]
        if not regions:
            return None
        lo_row = min(r.top_left.row for r in regions)
        lo_col = min(r.top_left.col for r in regions)
        hi_row = max(r.bottom_right.row for r in regions)
        hi_col = max(r.bottom_right.col for r in regions)
        sheet = self.default_sheet
        return Region(CellAddress(sheet, lo_col, lo_row), CellAddress(sheet, hi_col, hi_row))


_NUMBER_FIELD_RE = re.compile(
    r"[+-]?(?:[0-9]+(?:\.[0-9]*)?|\.[0-9]+)(?:[eE][+-]?[0-9]+)?%?\Z"
)

_SHEET_MARKER = "## sheet:"


def _parse_number_field(text: str) -> Decimal | None:
    if not _NUMBER_FIELD_RE.match(text):
        return None
    if text.endswith("%"):
        return Decimal(text[:-1]) / Decimal(100)
    return Decimal(text)


def _split_fields(line: str, line_no: int) -> list[tuple[str, int]]:
    """Split one grid line into (field, 1-based start column) pairs."""
    fields: list[tuple[str, int]] = []
    i = 0
    n = len(line)
    while True:
        start = i
        if i < n and line[i] == '"':
            buf = []
            i += 1
            closed = False
            while i < n:
                ch = line[i]
                if ch == '"':
                    if i + 1 < n and line[i + 1] == '"':
                        buf.append('"')
                        i += 2
                        continue
                    i += 1
                    closed = True
                    break
                buf.append(ch)
                i += 1
            if not closed:
                raise FormatError("unbalanced quotes", line_no, start + 1)
            if i < n and line[i] != ",":
                raise FormatError("text after closing quote", line_no, i + 1)
            fields.append(("".join(buf), start + 1))
        else:
            j = line.find(",", i)
            end = n if j < 0 else j
            body = line[i:end]
            if '"' in body:
                raise FormatError(
                    "quote inside unquoted field", line_no, i + body.index('"') + 1
                )
            fields.append((body, start + 1))
            i = end
        if i >= n:
            return fields
        i += 1  # skip the comma


def load_grid(text: str) -> Workbook:
    """Parse a grid document into a workbook; empty fields stay absent."""
    sheets: list[Sheet] = []
    seen_names: set[str] = set()
    current: Sheet | None = None
    row = 0
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()  # trailing newline, not an empty row
    for line_no, line in enumerate(lines, start=1):
        line = line.rstrip("\r")
        if line.startswith(_SHEET_MARKER):
            name = line[len(_SHEET_MARKER):].strip()
            if not name:
                raise FormatError("empty sheet name", line_no, 1)
            if name in seen_names:
                raise FormatError(f"duplicate sheet name {name!r}", line_no, 1)
            current = Sheet(name)
            sheets.append(current)
            seen_names.add(name)
            row = 0
            continue
        row += 1
        if row > MAX_ROWS:
            raise FormatError(f"more than {MAX_ROWS} rows", line_no, 1)
        for col, (body, col_pos) in enumerate(_split_fields(line, line_no), start=1):
            if col > MAX_COLS:
                raise FormatError(f"more than {MAX_COLS} columns", line_no, col_pos)
            if body == "":
                continue
            if current is None:
                current = Sheet(DEFAULT_SHEET)
                sheets.append(current)
                seen_names.add(DEFAULT_SHEET)
            addr = CellAddress(current.name, col, row)
            if body.startswith("="):
                try:
                    ast = fm.parse_formula(body)
                except ParseError as exc:
                    raise FormatError(
                        f"bad formula in {addr.a1}: {exc}", line_no, col_pos
                    ) from exc
                content: Content = Formula(body, ast)
            else:
                value = _parse_number_field(body)
                content = Number(value) if value is not None else Text(body)
            current.cells[(row, col)] = Cell(addr, content)
    if not sheets:
        sheets.append(Sheet(DEFAULT_SHEET))
    return Workbook(sheets)


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise FormatError(message)


def load_json(text: str) -> Workbook:
    """Parse a workbook JSON document. Numbers keep their exact decimal text."""
    try:
        doc = json.loads(text, parse_float=Decimal)
    except json.JSONDecodeError as exc:
        raise FormatError(f"invalid JSON: {exc}") from exc
    _require(isinstance(doc, dict), "top level must be an object")
    _require(set(doc) == {"sheets"}, 'top level must have exactly the "sheets" key')
    raw_sheets = doc["sheets"]
    _require(isinstance(raw_sheets, list) and raw_sheets, '"sheets" must be a non-empty array')
    sheets: list[Sheet] = []
    seen_names: set[str] = set()
    for raw in raw_sheets:
        _require(isinstance(raw, dict), "sheet entry must be an object")
        _require(set(raw) == {"name", "cells"}, 'sheet needs exactly "name" and "cells"')
        name = raw["name"]
        _require(isinstance(name, str) and name != "", "sheet name must be a non-empty string")
        _require(name not in seen_names, f"duplicate sheet name {name!r}")
        seen_names.add(name)
        _require(isinstance(raw["cells"], list), '"cells" must be an array')
        sheet = Sheet(name)
        for entry in raw["cells"]:
            _require(isinstance(entry, dict), "cell entry must be an object")
            keys = set(entry)
            _require("ref" in keys, 'cell entry needs a "ref"')
            ref = entry["ref"]
            _require(isinstance(ref, str), '"ref" must be a string')
            _require("!" not in ref, f"ref {ref!r} must not carry a sheet qualifier")
            addr = parse_cell_text(ref, name)
            body = keys - {"ref"}
            if "formula" in body:
                _require(body <= {"formula", "value"}, f"unexpected keys in cell {ref}")
                source = entry["formula"]
                _require(
                    isinstance(source, str) and source.startswith("="),
                    f'formula in {ref} must be a string starting with "="',
                )
                stored = None
                if "value" in entry:
                    stored = _as_decimal(entry["value"], ref)
                try:
                    ast = fm.parse_formula(source)
                except ParseError as exc:
                    raise FormatError(f"bad formula in {ref}: {exc}") from exc
                content: Content = Formula(source, ast, stored)
            elif body == {"value"}:
                content = Number(_as_decimal(entry["value"], ref))
            elif body == {"text"}:
                _require(isinstance(entry["text"], str), f'"text" in {ref} must be a string')
                content = Text(entry["text"])
            else:
                raise FormatError(f"cell {ref} needs text, value, or formula")
            key = (addr.row, addr.col)
            if key in sheet.cells:
                raise DuplicateCellError(name, addr.a1)
            sheet.cells[key] = Cell(addr, content)
        sheets.append(sheet)
    return Workbook(sheets)


def _as_decimal(value: object, ref: str) -> Decimal:
    if isinstance(value, bool) or not isinstance(value, (int, Decimal)):
        raise FormatError(f'"value" in {ref} must be a number')
    return Decimal(value)


def _cell_json(cell: Cell) -> dict:
    c = cell.content
    if isinstance(c, Text):
        return {"ref": cell.addr.a1, "text": c.value}
    if isinstance(c, Number):
        return {"ref": cell.addr.a1, "value": c.value}
    out: dict = {"ref": cell.addr.a1, "formula": c.source}
    if c.stored is not None:
        out["value"] = c.stored
    return out


def dump_json(wb: Workbook) -> str:
    """Canonical workbook JSON; equal workbooks serialize to equal bytes."""
    doc = {
        "sheets": [
            {
                "name": s.name,
                "cells": [_cell_json(s.cells[key]) for key in sorted(s.cells)],
            }
            for s in wb.sheets
        ]
    }
    return jsontext.dumps(doc) + "\n"


def _grid_field(cell: Cell) -> str:
    c = cell.content
    if isinstance(c, Formula):
        return c.source
    if isinstance(c, Number):
        return str(c.value)
    text = c.value
    if text == "" or text.startswith("=") or _parse_number_field(text) is not None:
        raise FormatError(
            f"text {text!r} in {cell.addr.text()} cannot round-trip through the grid format"
        )
    if any(ch in text for ch in ',"\n'):
        return '"' + text.replace('"', '""') + '"'
    return text


def dump_grid(wb: Workbook) -> str:
    """Grid rendition of a workbook.

    Formula stored values have no grid syntax and are dropped; text that
    would reparse as a number or formula raises FORMAT_ERROR instead of
    silently changing kind.
    """
    lines: list[str] = []
    for index, sheet in enumerate(wb.sheets):
        if index > 0 or sheet.name != DEFAULT_SHEET:
            lines.append(f"{_SHEET_MARKER}{sheet.name}")
        if not sheet.cells:
            continue
        max_row = max(rc[0] for rc in sheet.cells)
        for row in range(1, max_row + 1):
            cols = [rc[1] for rc in sheet.cells if rc[0] == row]
            if not cols:
                lines.append("")
                continue
            fields = []
            for col in range(1, max(cols) + 1):
                cell = sheet.cells.get((row, col))
                fields.append(_grid_field(cell) if cell else "")
            lines.append(",".join(fields))
    return "\n".join(lines) + ("\n" if lines else "")
