"""Error types shared across the package.

Every error carries a stable ``code`` string; the CLI and HTTP service map
codes to exit codes and status codes without inspecting messages.
"""

from __future__ import annotations


class SheetLensError(Exception):
    """Base class for all errors raised by this package."""

    code = "ERROR"


class FormatError(SheetLensError):
    """A document does not follow the grid or workbook JSON format."""

    code = "FORMAT_ERROR"

    def __init__(self, reason: str, line: int | None = None, column: int | None = None):
        self.reason = reason
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}" + (f", column {column}" if column is not None else "")
            where = f" ({where})"
        super().__init__(f"{reason}{where}")


class DuplicateCellError(SheetLensError):
    """The same cell ref appears twice within one sheet of a JSON workbook."""

    code = "DUPLICATE_CELL"

    def __init__(self, sheet: str, ref: str):
        self.sheet = sheet
        self.ref = ref
        super().__init__(f"cell {ref} defined twice in sheet {sheet!r}")


class ParseError(SheetLensError):
    """A formula violates the grammar."""

    code = "PARSE_ERROR"

    def __init__(self, position: int, expected: str):
        self.position = position
        self.expected = expected
        super().__init__(f"expected {expected} at position {position}")


class RangeTooLargeError(SheetLensError):
    code = "RANGE_TOO_LARGE"

    def __init__(self, range_text: str, size: int, limit: int):
        self.range_text = range_text
        self.size = size
        self.limit = limit
        super().__init__(f"range {range_text} expands to {size} cells (limit {limit})")


class EvalError(SheetLensError):
    """A formula cannot be evaluated by the arithmetic subset."""

    code = "EVAL_ERROR"


class UnsupportedFunctionError(EvalError):
    code = "UNSUPPORTED_FUNCTION"

    def __init__(self, name: str):
        self.name = name
        super().__init__(f"function {name} is not supported by the evaluator")


class MissingValueError(EvalError):
    code = "MISSING_VALUE"

    def __init__(self, ref_text: str):
        self.ref_text = ref_text
        super().__init__(f"no numeric value available for {ref_text}")


class DivByZeroError(EvalError):
    code = "DIV_BY_ZERO"

    def __init__(self) -> None:
        super().__init__("division by zero")


class RegionTooLargeError(SheetLensError):
    code = "REGION_TOO_LARGE"

    def __init__(self, cells: int, limit: int):
        self.cells = cells
        self.limit = limit
        super().__init__(f"refusing to render {cells} cells (limit {limit})")
