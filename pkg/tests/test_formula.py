import random
import re
from decimal import Decimal

import pytest

from sheetlens import formula as fm
from sheetlens.addressing import CellAddress, column_index
from sheetlens.errors import (
    DivByZeroError,
    EvalError,
    MissingValueError,
    ParseError,
    RangeTooLargeError,
    UnsupportedFunctionError,
)


def A(a1: str, sheet: str = "Sheet1") -> CellAddress:
    from sheetlens.addressing import parse_cell_text

    return parse_cell_text(a1, sheet)


def refs(source: str, host: str = "A1") -> list[str]:
    ast = fm.parse_formula(source)
    return [a.a1 for a in fm.extract_references(ast, A(host)).cells]


class TestParse:
    def test_subtraction(self):
        ast = fm.parse_formula("=B1-B2")
        assert ast == fm.Bin("-", fm.Ref(2, 1), fm.Ref(2, 2))

    def test_bare_literal(self):
        assert fm.parse_formula("=3") == fm.Num(Decimal(3))

    def test_mixed_absolute_product(self):
        ast = fm.parse_formula("=$E6*F9*A5*C4")
        assert fm.to_source(ast) == "=$E6*F9*A5*C4"
        leftmost = ast
        while isinstance(leftmost, fm.Bin):
            leftmost = leftmost.left
        assert leftmost == fm.Ref(5, 6, col_absolute=True)

    def test_precedence_tree(self):
        assert fm.parse_formula("=2+3*4") == fm.Bin(
            "+", fm.Num(Decimal(2)), fm.Bin("*", fm.Num(Decimal(3)), fm.Num(Decimal(4)))
        )

    def test_power_is_right_associative(self):
        ast = fm.parse_formula("=2^3^2")
        assert ast == fm.Bin(
            "^", fm.Num(Decimal(2)), fm.Bin("^", fm.Num(Decimal(3)), fm.Num(Decimal(2)))
        )

    def test_unary_minus_binds_tighter_than_power(self):
        ast = fm.parse_formula("=-2^2")
        assert ast == fm.Bin("^", fm.Neg(fm.Num(Decimal(2))), fm.Num(Decimal(2)))

    def test_percent_binds_tighter_than_minus(self):
        assert fm.parse_formula("=-50%") == fm.Neg(fm.Pct(fm.Num(Decimal(50))))

    def test_case_insensitive_canonicalized(self):
        ast = fm.parse_formula("=sum(b1:b2)*aa3")
        assert fm.to_source(ast) == "=SUM(B1:B2)*AA3"

    def test_unknown_function_accepted(self):
        ast = fm.parse_formula("=NPV(A1,B2)")
        assert isinstance(ast, fm.Call)
        assert ast.name == "NPV"

    def test_whitespace_tolerated(self):
        assert fm.parse_formula("= B1 - B2") == fm.parse_formula("=B1-B2")

    def test_sheet_qualified_ref(self):
        ast = fm.parse_formula("=Data!A1")
        assert ast == fm.Ref(1, 1, sheet="Data")

    def test_range_endpoint_inherits_sheet(self):
        ast = fm.parse_formula("=SUM(Data!A1:B2)")
        rng = ast.args[0]
        assert rng.start.sheet == "Data"
        assert rng.end.sheet is None

    @pytest.mark.parametrize(
        "source",
        [
            "B1",
            "=",
            "=1+",
            "=()",
            "=A1:Data!B2",
            "=Data!A1:Other!B2",
            "=A0",
            "=XFE1",
            "=A1048577",
            "=1 2",
            "=foo",
            '="text"',
            "=SUM(1,)",
        ],
    )
    def test_parse_errors(self, source):
        with pytest.raises(ParseError):
            fm.parse_formula(source)

    def test_error_position(self):
        with pytest.raises(ParseError) as err:
            fm.parse_formula("=1+*2")
        assert err.value.position == 3


def _random_ast(rng: random.Random, depth: int) -> fm.Node:
    if depth <= 0:
        choice = rng.random()
        if choice < 0.4:
            return fm.Num(Decimal(rng.choice(["0", "3", "12", "0.25", "7.50", "1E+3", "2e-2"])))
        return fm.Ref(
            col=rng.randint(1, 40),
            row=rng.randint(1, 99),
            col_absolute=rng.random() < 0.3,
            row_absolute=rng.random() < 0.3,
            sheet=rng.choice([None, None, None, "Data", "p2"]),
        )
    roll = rng.random()
    if roll < 0.35:
        return fm.Bin(rng.choice("+-*/^"), _random_ast(rng, depth - 1), _random_ast(rng, depth - 1))
    if roll < 0.5:
        return fm.Neg(_random_ast(rng, depth - 1))
    if roll < 0.6:
        return fm.Pct(_random_ast(rng, depth - 1))
    if roll < 0.75:
        name = rng.choice(["SUM", "NPV", "MIN", "F9X"])
        args = tuple(_random_ast(rng, depth - 1) for _ in range(rng.randint(0, 3)))
        return fm.Call(name, args)
    if roll < 0.85:
        sheet = rng.choice([None, "Data"])
        start = fm.Ref(rng.randint(1, 9), rng.randint(1, 9), rng.random() < 0.3, rng.random() < 0.3, sheet)
        end = fm.Ref(rng.randint(1, 9), rng.randint(1, 9), rng.random() < 0.3, rng.random() < 0.3)
        return fm.RangeRef(start, end)
    return _random_ast(rng, depth - 1)


class TestSerializeRoundTrip:
    def test_thousand_random_formulas(self):
        rng = random.Random(20260810)
        for _ in range(1000):
            ast = _random_ast(rng, rng.randint(0, 4))
            source = fm.to_source(ast)
            assert fm.parse_formula(source) == ast, source

    def test_reparse_of_canonical_source_is_stable(self):
        for source in ("=B1-B2", "=-2^2", "=(1+2)*3", "=A1%", "=-(A1+B2)%", "=SUM()"):
            ast = fm.parse_formula(source)
            assert fm.parse_formula(fm.to_source(ast)) == ast


# Independent reference oracle: pull ref tokens straight out of the
# canonical source text with a regex, expanding ranges by hand.
_REF_TOKEN = re.compile(
    r"(?:([A-Za-z_][A-Za-z0-9_.]*)!)?\$?([A-Za-z]{1,3})\$?([0-9]+)"
    r"(?::(?:([A-Za-z_][A-Za-z0-9_.]*)!)?\$?([A-Za-z]{1,3})\$?([0-9]+))?"
)


def _regex_reference_oracle(source: str, host: CellAddress) -> set[CellAddress]:
    found = set()
    for m in _REF_TOKEN.finditer(source):
        s1, c1, r1, _s2, c2, r2 = m.groups()
        sheet = s1 or host.sheet
        if c2 is None:
            found.add(CellAddress(sheet, column_index(c1), int(r1)))
        else:
            lo_c, hi_c = sorted((column_index(c1), column_index(c2)))
            lo_r, hi_r = sorted((int(r1), int(r2)))
            for row in range(lo_r, hi_r + 1):
                for col in range(lo_c, hi_c + 1):
                    found.add(CellAddress(sheet, col, row))
    return found


class TestExtractReferences:
    def test_simple_pair(self):
        assert refs("=B3-B4", host="B5") == ["B3", "B4"]

    def test_no_references(self):
        assert refs("=7+1") == []

    def test_range_expansion_marks_via_range(self):
        ast = fm.parse_formula("=SUM(B5:B9)")
        rs = fm.extract_references(ast, A("B10"))
        assert [a.a1 for a in rs.cells] == ["B5", "B6", "B7", "B8", "B9"]
        assert rs.via_range == frozenset(rs.cells)

    def test_direct_reference_beats_range(self):
        ast = fm.parse_formula("=A1+SUM(A1:A2)")
        rs = fm.extract_references(ast, A("B1"))
        assert [a.a1 for a in rs.cells] == ["A1", "A2"]
        assert {a.a1 for a in rs.via_range} == {"A2"}

    def test_self_reference_retained(self):
        assert refs("=A1+1", host="A1") == ["A1"]

    def test_sheet_defaults_to_host(self):
        ast = fm.parse_formula("=Data!A1+A2")
        rs = fm.extract_references(ast, CellAddress("Main", 2, 1))
        assert [a.text("-") for a in rs.cells] == ["Data!A1", "Main!A2"]

    def test_range_cap(self):
        with pytest.raises(RangeTooLargeError):
            fm.extract_references(fm.parse_formula("=SUM(A1:A65537)"), A("B1"))
        # configurable: a tighter cap rejects smaller ranges
        with pytest.raises(RangeTooLargeError):
            fm.extract_references(fm.parse_formula("=SUM(A1:A10)"), A("B1"), max_range_cells=9)

    def test_inverted_range_corners_normalize(self):
        assert refs("=SUM(B9:B5)", host="B10") == refs("=SUM(B5:B9)", host="B10")

    def test_matches_regex_oracle_on_random_formulas(self):
        rng = random.Random(77)
        host = CellAddress("Sheet1", 4, 7)
        for _ in range(300):
            ast = _random_ast(rng, rng.randint(0, 4))
            source = fm.to_source(ast)
            got = set(fm.extract_references(ast, host).cells)
            assert got == _regex_reference_oracle(source[1:], host), source


class TestNormalizePattern:
    def test_row_product(self):
        ast = fm.parse_formula("=A2*B2")
        assert fm.normalize_pattern(ast, A("C2")) == "R[0]C[-2]*R[0]C[-1]"

    def test_fully_absolute_is_host_independent(self):
        ast = fm.parse_formula("=$A$1")
        assert fm.normalize_pattern(ast, A("Q99")) == "R{1}C{1}"
        assert fm.normalize_pattern(ast, A("B2")) == "R{1}C{1}"

    def test_column_difference(self):
        ast = fm.parse_formula("=B1-B2")
        assert fm.normalize_pattern(ast, A("B3")) == "R[-2]C[0]-R[-1]C[0]"

    def test_mixed_axes(self):
        ast = fm.parse_formula("=$E6")
        assert fm.normalize_pattern(ast, A("F9")) == "R[-3]C{5}"

    def test_copy_fill_property_random(self):
        rng = random.Random(5150)
        for _ in range(200):
            ast = _random_ast(rng, rng.randint(0, 3))
            host = CellAddress("Sheet1", rng.randint(50, 60), rng.randint(200, 220))
            dr, dc = rng.randint(-20, 20), rng.randint(-20, 20)
            shifted = fm.shift_relative(ast, dr, dc)
            assert fm.normalize_pattern(shifted, host.offset(dr, dc)) == fm.normalize_pattern(
                ast, host
            )


class TestEvaluate:
    def ev(self, source, values=None, host="A1"):
        values = {k: Decimal(v) for k, v in (values or {}).items()}

        def lookup(addr):
            return values.get(addr.a1)

        return fm.evaluate(fm.parse_formula(source), lookup, A(host))

    def test_profit_subtraction(self):
        assert self.ev("=B1-B2", {"B1": 30000, "B2": 20000}) == 10000

    def test_zero(self):
        assert self.ev("=0") == 0

    def test_deposit_row(self):
        assert self.ev("=A4*B4", {"A4": 8000, "B4": "0.05"}) == 400

    def test_percent_and_power(self):
        assert self.ev("=200*5%") == 10
        assert self.ev("=2^10") == 1024
        assert self.ev("=-2^2") == 4

    def test_sum_skips_blanks(self):
        assert self.ev("=SUM(A1:A4)", {"A2": 5, "A4": 7}) == 12
        assert self.ev("=SUM(A1:A2,3,B1)", {"B1": 2}) == 5

    def test_division(self):
        assert self.ev("=7/2") == Decimal("3.5")
        with pytest.raises(DivByZeroError):
            self.ev("=1/0")

    def test_missing_value(self):
        with pytest.raises(MissingValueError):
            self.ev("=B9")

    def test_unsupported_function(self):
        with pytest.raises(UnsupportedFunctionError):
            self.ev("=NPV(1,2)")

    def test_bare_range_rejected(self):
        with pytest.raises(EvalError):
            self.ev("=A1:A2*2")

    def test_stored_values_are_not_recursed(self):
        # B1 holds a formula but only its stored value participates
        assert self.ev("=B1*2", {"B1": 50}) == 100
