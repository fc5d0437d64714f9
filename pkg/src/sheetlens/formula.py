"""A1-notation formula parsing, serialization, and analysis.

Grammar (operators listed loosest-binding first):

    formula = "=" expr
    expr    = term {("+"|"-") term}
    term    = factor {("*"|"/") factor}
    factor  = ["-"] base ["%"] ["^" factor]
    base    = number | ref | range | call | "(" expr ")"
    call    = ident "(" [expr {"," expr}] ")"
    ref     = [ident "!"] ["$"] letters ["$"] digits
    range   = ref ":" ref

Percent binds tighter than unary minus, which binds tighter than "^"
(right-associative), so "-2^2" is (-2)^2, matching spreadsheet convention.
References and function names are case-insensitive and canonicalized to
uppercase; sheet qualifiers keep their spelling.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from decimal import Decimal, DecimalException, localcontext
from typing import Callable, Iterator, Union

from .addressing import MAX_COLS, MAX_ROWS, CellAddress, column_index, column_letters
from .errors import (
    DivByZeroError,
    EvalError,
    MissingValueError,
    ParseError,
    RangeTooLargeError,
    UnsupportedFunctionError,
)

#: A single range may expand to at most this many precedent cells.
MAX_RANGE_CELLS = 65536


@dataclass(frozen=True)
class Num:
    value: Decimal


@dataclass(frozen=True)
class Ref:
    col: int
    row: int
    col_absolute: bool = False
    row_absolute: bool = False
    sheet: str | None = None

    def text(self) -> str:
        prefix = f"{self.sheet}!" if self.sheet else ""
        cd = "$" if self.col_absolute else ""
        rd = "$" if self.row_absolute else ""
        return f"{prefix}{cd}{column_letters(self.col)}{rd}{self.row}"


@dataclass(frozen=True)
class RangeRef:
    start: Ref
    end: Ref

    def text(self) -> str:
        return f"{self.start.text()}:{self.end.text()}"


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple["Node", ...]


@dataclass(frozen=True)
class Neg:
    operand: "Node"


@dataclass(frozen=True)
class Pct:
    operand: "Node"


@dataclass(frozen=True)
class Bin:
    op: str
    left: "Node"
    right: "Node"


Node = Union[Num, Ref, RangeRef, Call, Neg, Pct, Bin]


@dataclass(frozen=True)
class RefSet:
    """Precedent addresses of a formula, ranges expanded, in address order."""

    cells: tuple[CellAddress, ...]
    via_range: frozenset[CellAddress]


_WS_RE = re.compile(r"[ \t]*")
_NUMBER_RE = re.compile(r"(?:[0-9]+(?:\.[0-9]*)?|\.[0-9]+)(?:[eE][+-]?[0-9]+)?")
_REF_RE = re.compile(
    r"(?:(?P<sheet>[A-Za-z_][A-Za-z0-9_.]*)!)?"
    r"(?P<cabs>\$?)(?P<col>[A-Za-z]{1,3})(?P<rabs>\$?)(?P<row>[1-9][0-9]*)"
    r"(?![A-Za-z0-9_.(])"
)
_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_.]*")


class _Parser:
    def __init__(self, source: str, pos: int):
        self.source = source
        self.pos = pos

    def error(self, expected: str) -> ParseError:
        return ParseError(self.pos, expected)

    def skip_ws(self) -> None:
        self.pos = _WS_RE.match(self.source, self.pos).end()

    def peek(self) -> str:
        return self.source[self.pos] if self.pos < len(self.source) else ""

    def eat(self, ch: str) -> bool:
        self.skip_ws()
        if self.peek() == ch:
            self.pos += 1
            return True
        return False

    def expect(self, ch: str) -> None:
        if not self.eat(ch):
            raise self.error(f'"{ch}"')

    def parse_expr(self) -> Node:
        node = self.parse_term()
        while True:
            self.skip_ws()
            ch = self.peek()
            if ch == "+" or ch == "-":
                self.pos += 1
                node = Bin(ch, node, self.parse_term())
            else:
                return node

    def parse_term(self) -> Node:
        node = self.parse_factor()
        while True:
            self.skip_ws()
            ch = self.peek()
            if ch == "*" or ch == "/":
                self.pos += 1
                node = Bin(ch, node, self.parse_factor())
            else:
                return node

    def parse_factor(self) -> Node:
        negated = self.eat("-")
        node = self.parse_base()
        if self.eat("%"):
            node = Pct(node)
        if negated:
            node = Neg(node)
        if self.eat("^"):
            node = Bin("^", node, self.parse_factor())
        return node

    def parse_base(self) -> Node:
        self.skip_ws()
        ch = self.peek()
        if ch == "(":
            self.pos += 1
            node = self.parse_expr()
            self.expect(")")
            return node
        m = _NUMBER_RE.match(self.source, self.pos)
        if m:
            self.pos = m.end()
            return Num(Decimal(m.group()))
        m = _REF_RE.match(self.source, self.pos)
        if m:
            ref = self._make_ref(m)
            self.pos = m.end()
            if self.eat(":"):
                self.skip_ws()
                m2 = _REF_RE.match(self.source, self.pos)
                if not m2:
                    raise self.error("cell reference after ':'")
                end = self._make_ref(m2)
                self.pos = m2.end()
                if end.sheet is not None and ref.sheet is not None and end.sheet != ref.sheet:
                    raise self.error("range endpoints on one sheet")
                if end.sheet is not None and ref.sheet is None:
                    raise self.error("sheet qualifier on the range start")
                return RangeRef(ref, end)
            return ref
        m = _IDENT_RE.match(self.source, self.pos)
        if m:
            self.pos = m.end()
            self.expect("(")
            args: list[Node] = []
            self.skip_ws()
            if not self.eat(")"):
                args.append(self.parse_expr())
                while self.eat(","):
                    args.append(self.parse_expr())
                self.expect(")")
            return Call(m.group().upper(), tuple(args))
        raise self.error("number, cell reference, function call, or '('")

    def _make_ref(self, m: "re.Match[str]") -> Ref:
        col = column_index(m.group("col"))
        row = int(m.group("row"))
        if col > MAX_COLS:
            raise self.error(f"column within {column_letters(MAX_COLS)}")
        if row > MAX_ROWS:
            raise self.error(f"row within {MAX_ROWS}")
        return Ref(
            col=col,
            row=row,
            col_absolute=m.group("cabs") == "$",
            row_absolute=m.group("rabs") == "$",
            sheet=m.group("sheet"),
        )


def parse_formula(source: str) -> Node:
    """Parse a formula string; the source must start with "="."""
    if not source.startswith("="):
        raise ParseError(0, '"="')
    parser = _Parser(source, 1)
    node = parser.parse_expr()
    parser.skip_ws()
    if parser.pos != len(source):
        raise parser.error("end of formula")
    return node


# Precedence ranks used to decide where serialization needs parentheses.
_ATOM, _PCT, _NEG, _POW, _MUL, _ADD = 6, 5, 4, 3, 2, 1


def _render(node: Node, ref_text: Callable[[Ref], str]) -> tuple[str, int]:
    def wrap(child: Node, min_prec: int) -> str:
        text, prec = _render(child, ref_text)
        return f"({text})" if prec < min_prec else text

    if isinstance(node, Num):
        return str(node.value), _ATOM
    if isinstance(node, Ref):
        return ref_text(node), _ATOM
    if isinstance(node, RangeRef):
        return f"{ref_text(node.start)}:{ref_text(node.end)}", _ATOM
    if isinstance(node, Call):
        args = ",".join(_render(a, ref_text)[0] for a in node.args)
        return f"{node.name}({args})", _ATOM
    if isinstance(node, Pct):
        return f"{wrap(node.operand, _ATOM)}%", _PCT
    if isinstance(node, Neg):
        return f"-{wrap(node.operand, _PCT)}", _NEG
    if node.op == "^":
        return f"{wrap(node.left, _NEG)}^{wrap(node.right, _POW)}", _POW
    if node.op in "*/":
        return f"{wrap(node.left, _MUL)}{node.op}{wrap(node.right, _MUL + 1)}", _MUL
    return f"{wrap(node.left, _ADD)}{node.op}{wrap(node.right, _ADD + 1)}", _ADD


def to_source(ast: Node) -> str:
    """Canonical source text; reparsing it yields an equal tree."""
    return "=" + _render(ast, lambda r: r.text())[0]


def normalize_pattern(ast: Node, host: CellAddress) -> str:
    """Offset-normalized token string for copy-fill comparison.

    Relative axes render as offsets from the host cell (R[dr]/C[dc]),
    absolute axes as fixed coordinates (R{r}/C{c}); everything else renders
    as in the canonical source. Two copy-filled formulas yield equal strings.
    """

    def ref_text(r: Ref) -> str:
        prefix = f"{r.sheet}!" if r.sheet else ""
        rpart = f"R{{{r.row}}}" if r.row_absolute else f"R[{r.row - host.row}]"
        cpart = f"C{{{r.col}}}" if r.col_absolute else f"C[{r.col - host.col}]"
        return f"{prefix}{rpart}{cpart}"

    return _render(ast, ref_text)[0]


def shift_relative(ast: Node, dr: int, dc: int) -> Node:
    """Move every relative reference axis by (dr, dc); absolute axes stay put."""

    def shift(node: Node) -> Node:
        if isinstance(node, Ref):
            row = node.row if node.row_absolute else node.row + dr
            col = node.col if node.col_absolute else node.col + dc
            if row < 1 or col < 1:
                raise ValueError("shift would move a reference off the sheet")
            return Ref(col, row, node.col_absolute, node.row_absolute, node.sheet)
        if isinstance(node, RangeRef):
            return RangeRef(shift(node.start), shift(node.end))
        if isinstance(node, Call):
            return Call(node.name, tuple(shift(a) for a in node.args))
        if isinstance(node, Neg):
            return Neg(shift(node.operand))
        if isinstance(node, Pct):
            return Pct(shift(node.operand))
        if isinstance(node, Bin):
            return Bin(node.op, shift(node.left), shift(node.right))
        return node

    return shift(ast)


def _resolve(ref: Ref, host: CellAddress) -> CellAddress:
    return CellAddress(ref.sheet or host.sheet, ref.col, ref.row)


def _expand_range(rng: RangeRef, host: CellAddress, cap: int) -> Iterator[CellAddress]:
    sheet = rng.start.sheet or rng.end.sheet or host.sheet
    lo_col, hi_col = sorted((rng.start.col, rng.end.col))
    lo_row, hi_row = sorted((rng.start.row, rng.end.row))
    size = (hi_col - lo_col + 1) * (hi_row - lo_row + 1)
    if size > cap:
        raise RangeTooLargeError(rng.text(), size, cap)
    for row in range(lo_row, hi_row + 1):
        for col in range(lo_col, hi_col + 1):
            yield CellAddress(sheet, col, row)


def _walk_refs(node: Node) -> Iterator[Ref | RangeRef]:
    """Brute-force leaf walk; reference leaves in source order."""
    if isinstance(node, (Ref, RangeRef)):
        yield node
    elif isinstance(node, Call):
        for arg in node.args:
            yield from _walk_refs(arg)
    elif isinstance(node, (Neg, Pct)):
        yield from _walk_refs(node.operand)
    elif isinstance(node, Bin):
        yield from _walk_refs(node.left)
        yield from _walk_refs(node.right)


def extract_references(
    ast: Node, host: CellAddress, max_range_cells: int = MAX_RANGE_CELLS
) -> RefSet:
    """All precedent addresses of a formula hosted at ``host``.

    Ranges are expanded cell by cell (capped at ``max_range_cells``); the
    sheet defaults to the host's. Self-references are retained — cycle
    handling lives in the dependency graph. An address referenced both
    directly and through a range counts as direct.
    """
    direct: set[CellAddress] = set()
    ranged: set[CellAddress] = set()
    for leaf in _walk_refs(ast):
        if isinstance(leaf, Ref):
            direct.add(_resolve(leaf, host))
        else:
            ranged.update(_expand_range(leaf, host, max_range_cells))
    cells = sorted(direct | ranged, key=CellAddress.sort_key)
    return RefSet(tuple(cells), frozenset(ranged - direct))


def evaluate(
    ast: Node,
    lookup: Callable[[CellAddress], Decimal | None],
    host: CellAddress,
) -> Decimal:
    """Evaluate the arithmetic subset: + - * / ^, unary minus, percent, SUM.

    ``lookup`` supplies stored or literal values of referenced cells; inside
    SUM ranges a missing value contributes 0, while a directly referenced
    missing value raises MISSING_VALUE. Evaluation is non-recursive:
    precedent formulas contribute their stored values only.
    """

    def ev(node: Node) -> Decimal:
        if isinstance(node, Num):
            return node.value
        if isinstance(node, Ref):
            value = lookup(_resolve(node, host))
            if value is None:
                raise MissingValueError(node.text())
            return value
        if isinstance(node, RangeRef):
            raise EvalError(f"range {node.text()} outside SUM")
        if isinstance(node, Call):
            if node.name != "SUM":
                raise UnsupportedFunctionError(node.name)
            total = Decimal(0)
            for arg in node.args:
                if isinstance(arg, RangeRef):
                    for addr in _expand_range(arg, host, MAX_RANGE_CELLS):
                        value = lookup(addr)
                        if value is not None:
                            total += value
                else:
                    total += ev(arg)
            return total
        if isinstance(node, Neg):
            return -ev(node.operand)
        if isinstance(node, Pct):
            return ev(node.operand) / Decimal(100)
        left = ev(node.left)
        right = ev(node.right)
        if node.op == "+":
            return left + right
        if node.op == "-":
            return left - right
        if node.op == "*":
            return left * right
        if node.op == "/":
            if right == 0:
                raise DivByZeroError()
            return left / right
        if right == 0 and left == 0:
            raise EvalError("0^0 is undefined")
        try:
            with localcontext() as ctx:
                ctx.Emax = 999999
                ctx.Emin = -999999
                return left**right
        except DecimalException as exc:
            if left == 0 and right < 0:
                raise DivByZeroError() from exc
            raise EvalError(f"cannot exponentiate {left}^{right}") from exc

    return ev(ast)
