from decimal import Decimal

import pytest

from sheetlens.addressing import CellAddress, Region, column_index, column_letters, parse_region
from sheetlens.errors import DuplicateCellError, FormatError
from sheetlens.workbook import (
    Formula,
    Number,
    Text,
    dump_grid,
    dump_json,
    load_grid,
    load_json,
)

from conftest import fixture_text, load_fixture


def addr(a1: str, sheet: str = "Sheet1") -> CellAddress:
    from sheetlens.addressing import parse_cell_text

    return parse_cell_text(a1, sheet)


class TestColumnLetters:
    def test_round_trip_of_edges(self):
        for col in (1, 25, 26, 27, 52, 53, 702, 703, 16384):
            assert column_index(column_letters(col)) == col

    def test_known_values(self):
        assert column_letters(1) == "A"
        assert column_letters(26) == "Z"
        assert column_letters(27) == "AA"
        assert column_index("xfd") == 16384


class TestLoadGrid:
    def test_profit_rows(self):
        wb = load_grid("Revenue,30000\nCost,20000\nProfit b/f Tax,=B1-B2")
        assert wb.cell(addr("A1")).content == Text("Revenue")
        assert wb.cell(addr("B1")).content == Number(Decimal(30000))
        b3 = wb.cell(addr("B3")).content
        assert isinstance(b3, Formula)
        assert b3.source == "=B1-B2"
        assert b3.stored is None

    def test_empty_document(self):
        wb = load_grid("")
        assert [s.name for s in wb.sheets] == ["Sheet1"]
        assert wb.cell_count() == 0

    def test_sparse_fields(self):
        wb = load_grid("1,,=A1\n,,=C1")
        refs = sorted(c.addr.a1 for c in wb.iter_cells())
        assert refs == ["A1", "C1", "C2"]

    def test_every_field_maps_to_one_kind(self):
        wb = load_grid('hello,5,=A1,,"quoted, text",5%')
        kinds = {c.addr.a1: type(c.content).__name__ for c in wb.iter_cells()}
        assert kinds == {
            "A1": "Text",
            "B1": "Number",
            "C1": "Formula",
            "E1": "Text",
            "F1": "Number",
        }

    def test_quoted_field_with_escapes(self):
        wb = load_grid('"a ""b"", c",2')
        assert wb.cell(addr("A1")).content == Text('a "b", c')

    def test_unbalanced_quote_reports_position(self):
        with pytest.raises(FormatError) as err:
            load_grid('x\n1,"oops')
        assert err.value.line == 2
        assert err.value.column == 3

    def test_text_after_closing_quote(self):
        with pytest.raises(FormatError):
            load_grid('"ok"junk,1')

    def test_formula_error_names_cell(self):
        with pytest.raises(FormatError) as err:
            load_grid("1\n2,=1+")
        assert "B2" in str(err.value)
        assert err.value.line == 2

    def test_sheet_markers(self):
        wb = load_grid("1\n## sheet:Data\n2\n3")
        assert [s.name for s in wb.sheets] == ["Sheet1", "Data"]
        assert wb.cell(CellAddress("Data", 1, 2)).content == Number(Decimal(3))

    def test_marker_on_first_line_skips_default_sheet(self):
        wb = load_grid("## sheet:Data\n7")
        assert [s.name for s in wb.sheets] == ["Data"]

    def test_duplicate_sheet_marker(self):
        with pytest.raises(FormatError):
            load_grid("## sheet:D\n1\n## sheet:D\n2")

    def test_too_many_columns(self):
        with pytest.raises(FormatError):
            load_grid("," * 16384 + "1")


class TestNumberFields:
    @pytest.mark.parametrize(
        "field,value",
        [
            ("30000", Decimal(30000)),
            ("-5", Decimal(-5)),
            ("+2.5", Decimal("2.5")),
            (".5", Decimal("0.5")),
            ("3.", Decimal(3)),
            ("1e3", Decimal("1e3")),
            ("16.2%", Decimal("0.162")),
            ("5%", Decimal("0.05")),
        ],
    )
    def test_numeric(self, field, value):
        wb = load_grid(field)
        assert wb.cell(addr("A1")).content == Number(value)

    @pytest.mark.parametrize("field", ["1,000", "$5", "(438150)", "12 000", "Nan", "five"])
    def test_text_fallthrough(self, field):
        quoted = f'"{field}"' if "," in field else field
        wb = load_grid(quoted)
        assert wb.cell(addr("A1")).content == Text(field)


class TestLoadJson:
    def test_formula_with_stored_value(self):
        wb = load_json(
            '{"sheets":[{"name":"S","cells":[{"ref":"B3","formula":"=B1-B2","value":10000}]}]}'
        )
        content = wb.cell(CellAddress("S", 2, 3)).content
        assert isinstance(content, Formula)
        assert content.stored == Decimal(10000)

    def test_empty_sheet(self):
        wb = load_json('{"sheets":[{"name":"S","cells":[]}]}')
        assert wb.cell_count() == 0
        assert wb.sheets[0].name == "S"

    def test_duplicate_ref(self):
        doc = (
            '{"sheets":[{"name":"S","cells":['
            '{"ref":"B3","value":1},{"ref":"B3","value":2}]}]}'
        )
        with pytest.raises(DuplicateCellError):
            load_json(doc)

    def test_exact_decimal_text_preserved(self):
        wb = load_json('{"sheets":[{"name":"S","cells":[{"ref":"A1","value":0.05}]}]}')
        assert str(wb.cell(CellAddress("S", 1, 1)).content.value) == "0.05"

    @pytest.mark.parametrize(
        "doc",
        [
            "[]",
            "{}",
            '{"sheets":[]}',
            '{"sheets":[{"name":"S"}]}',
            '{"sheets":[{"name":"S","cells":[{"ref":"A1"}]}]}',
            '{"sheets":[{"name":"S","cells":[{"ref":"A1","value":true}]}]}',
            '{"sheets":[{"name":"S","cells":[{"ref":"A1","text":"x","value":1}]}]}',
            '{"sheets":[{"name":"S","cells":[{"ref":"T!A1","value":1}]}]}',
            '{"sheets":[{"name":"S","cells":[{"ref":"A1048577","value":1}]}]}',
            '{"sheets":[{"name":"S","cells":[{"ref":"A1","formula":"B1"}]}]}',
            '{"sheets":[{"name":"S","cells":[]},{"name":"S","cells":[]}]}',
        ],
    )
    def test_schema_violations(self, doc):
        with pytest.raises(FormatError):
            load_json(doc)


class TestParseRegion:
    def test_plain_range(self):
        region = parse_region("B20:G20", "Sheet1")
        assert region.top_left == CellAddress("Sheet1", 2, 20)
        assert region.bottom_right == CellAddress("Sheet1", 7, 20)

    def test_single_cell_is_degenerate(self):
        region = parse_region("B3", "Sheet1")
        assert region.top_left == region.bottom_right == CellAddress("Sheet1", 2, 3)

    def test_inverted_corners_normalize(self):
        assert parse_region("G20:B20", "S") == parse_region("B20:G20", "S")
        assert parse_region("B20:G5", "S") == parse_region("B5:G20", "S")

    def test_sheet_prefix(self):
        region = parse_region("Data!A1:B2", "Sheet1")
        assert region.sheet == "Data"

    @pytest.mark.parametrize("text", ["", "B", "3", "B0", "B3:", "B3:!", "!A1:B2", "A1:B2:C3"])
    def test_malformed(self, text):
        with pytest.raises(FormatError):
            parse_region(text, "Sheet1")

    def test_region_text_round_trip(self):
        for text in ("B20:G20", "B3", "Data!A1:C9"):
            region = parse_region(text, "Sheet1")
            assert parse_region(region.text("Sheet1"), "Sheet1") == region


class TestRoundTrips:
    @pytest.mark.parametrize(
        "name",
        [
            "profit.grid",
            "profit_broken.grid",
            "profit.json",
            "deposit.json",
            "four_models.grid",
            "localization.grid",
            "stratification.grid",
            "cyclic.grid",
        ],
    )
    def test_grid_json_round_trip(self, name):
        wb = load_fixture(name)
        assert load_json(dump_json(wb)) == wb

    @pytest.mark.parametrize(
        "name",
        ["profit.grid", "four_models.grid", "localization.grid", "cyclic.grid"],
    )
    def test_grid_dump_round_trip(self, name):
        wb = load_fixture(name)
        assert load_grid(dump_grid(wb)) == wb

    def test_double_serialization_is_byte_identical(self):
        wb = load_fixture("deposit.json")
        assert dump_json(wb) == dump_json(wb)
        assert dump_json(load_json(dump_json(wb))) == dump_json(wb)

    def test_unrepresentable_text_raises(self):
        wb = load_json('{"sheets":[{"name":"Sheet1","cells":[{"ref":"A1","text":"30000"}]}]}')
        with pytest.raises(FormatError):
            dump_grid(wb)


class TestAddressOrder:
    def test_iter_cells_is_sorted(self):
        wb = load_grid("## sheet:Zed\n1,2\n3\n## sheet:Alpha\n4")
        order = [c.addr.text("-") for c in wb.iter_cells()]
        assert order == ["Alpha!A1", "Zed!A1", "Zed!B1", "Zed!A2"]

    def test_sort_key_total_order(self):
        cells = [addr("B1"), addr("A2"), addr("A1"), addr("B2")]
        assert sorted(a.a1 for a in cells) != [
            a.a1 for a in sorted(cells, key=CellAddress.sort_key)
        ]
        assert [a.a1 for a in sorted(cells, key=CellAddress.sort_key)] == [
            "A1",
            "B1",
            "A2",
            "B2",
        ]
