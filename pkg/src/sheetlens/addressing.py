"""Cell addresses, rectangular regions, and A1-notation text handling.

Addresses are sheet-qualified and 1-based. The total order used everywhere
for deterministic output is (sheet name, row, col).
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import FormatError

# Standard spreadsheet bounds; anything beyond is rejected at load/parse time.
MAX_COLS = 16384
MAX_ROWS = 1_048_576


def column_letters(col: int) -> str:
    """1 -> "A", 26 -> "Z", 27 -> "AA", ..."""
    if col < 1:
        raise ValueError(f"column index must be >= 1, got {col}")
    out = ""
    while col > 0:
        col, rem = divmod(col - 1, 26)
        out = chr(ord("A") + rem) + out
    return out


def column_index(letters: str) -> int:
    """"A" -> 1, "Z" -> 26, "AA" -> 27; case-insensitive."""
    value = 0
    for ch in letters.upper():
        if not "A" <= ch <= "Z":
            raise ValueError(f"invalid column letters {letters!r}")
        value = value * 26 + (ord(ch) - ord("A") + 1)
    if value < 1:
        raise ValueError("empty column letters")
    return value


@dataclass(frozen=True)
class CellAddress:
    sheet: str
    col: int
    row: int

    def __post_init__(self) -> None:
        if self.col < 1 or self.row < 1:
            raise ValueError(f"addresses are 1-based, got col={self.col} row={self.row}")

    @property
    def a1(self) -> str:
        """Local A1 text without the sheet qualifier, e.g. "B3"."""
        return f"{column_letters(self.col)}{self.row}"

    def text(self, default_sheet: str | None = None) -> str:
        """A1 text, sheet-qualified unless the address lies on default_sheet."""
        if default_sheet is not None and self.sheet == default_sheet:
            return self.a1
        return f"{self.sheet}!{self.a1}"

    def sort_key(self) -> tuple[str, int, int]:
        return (self.sheet, self.row, self.col)

    def offset(self, dr: int, dc: int) -> "CellAddress":
        return CellAddress(self.sheet, self.col + dc, self.row + dr)


_A1_RE = re.compile(r"^\$?([A-Za-z]{1,3})\$?([1-9][0-9]*)$")


def parse_cell_text(text: str, default_sheet: str) -> CellAddress:
    """Parse "B3" or "Sheet!B3" into an address; $ markers are accepted and ignored."""
    sheet = default_sheet
    body = text.strip()
    if "!" in body:
        sheet, _, body = body.partition("!")
        sheet = sheet.strip()
        if not sheet:
            raise FormatError(f"empty sheet name in cell ref {text!r}")
    m = _A1_RE.match(body)
    if not m:
        raise FormatError(f"malformed cell ref {text!r}")
    col = column_index(m.group(1))
    row = int(m.group(2))
    if col > MAX_COLS or row > MAX_ROWS:
        raise FormatError(f"cell ref {text!r} is out of bounds")
    return CellAddress(sheet, col, row)


@dataclass(frozen=True)
class Region:
    """A rectangle on a single sheet, corners inclusive."""

    top_left: CellAddress
    bottom_right: CellAddress

    def __post_init__(self) -> None:
        if self.top_left.sheet != self.bottom_right.sheet:
            raise ValueError("region corners must lie on the same sheet")
        if self.top_left.col > self.bottom_right.col or self.top_left.row > self.bottom_right.row:
            raise ValueError("region corners out of order")

    @property
    def sheet(self) -> str:
        return self.top_left.sheet

    def contains(self, addr: CellAddress) -> bool:
        return (
            addr.sheet == self.sheet
            and self.top_left.col <= addr.col <= self.bottom_right.col
            and self.top_left.row <= addr.row <= self.bottom_right.row
        )

    @property
    def cell_count(self) -> int:
        w = self.bottom_right.col - self.top_left.col + 1
        h = self.bottom_right.row - self.top_left.row + 1
        return w * h

    def text(self, default_sheet: str | None = None) -> str:
        """Canonical region text; 1x1 regions render as a single cell ref."""
        if self.top_left == self.bottom_right:
            return self.top_left.text(default_sheet)
        prefix = ""
        if default_sheet is None or self.sheet != default_sheet:
            prefix = f"{self.sheet}!"
        return f"{prefix}{self.top_left.a1}:{self.bottom_right.a1}"


def bounding_region(addrs: list[CellAddress]) -> Region:
    """Smallest region covering all addresses (which must share one sheet)."""
    if not addrs:
        raise ValueError("no addresses to bound")
    sheet = addrs[0].sheet
    rows = [a.row for a in addrs]
    cols = [a.col for a in addrs]
    return Region(
        CellAddress(sheet, min(cols), min(rows)),
        CellAddress(sheet, max(cols), max(rows)),
    )


def parse_region(text: str, default_sheet: str) -> Region:
    """Parse "B20:G20", a single "B3", or a "Sheet!"-prefixed form.

    Inverted corners are reordered, so "G20:B20" equals "B20:G20".
    """
    body = text.strip()
    if not body:
        raise FormatError("empty region text")
    sheet = default_sheet
    if "!" in body:
        sheet, _, body = body.partition("!")
        sheet = sheet.strip()
        if not sheet:
            raise FormatError(f"empty sheet name in region {text!r}")
    if ":" in body:
        first, _, second = body.partition(":")
        a = parse_cell_text(f"{sheet}!{first}", sheet)
        b = parse_cell_text(f"{sheet}!{second}", sheet)
    else:
        a = b = parse_cell_text(f"{sheet}!{body}", sheet)
    top_left = CellAddress(sheet, min(a.col, b.col), min(a.row, b.row))
    bottom_right = CellAddress(sheet, max(a.col, b.col), max(a.row, b.row))
    return Region(top_left, bottom_right)
