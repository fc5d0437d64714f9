"""Report documents: canonical JSON and static SVG renditions of overlays.

JSON schema (version 1, keys always in this order)::

    {"version":1,"tool":str,"params":{...},"digest":hex,
     "fills":[{"ref":str,"class":str}],
     "arrows":[{"from":str,"to":str,"kind":"cell"|"block"}],
     "blocks":[{"id":int,"region":str}],
     "levels":[{"ref":str,"level":int}],
     "components":[{"id":int,"cells":[str]}],
     "diagnostics":[{"code":str,"cells":[str],"severity":str,"message":str}]}

Block endpoints in arrows use ``"#<id>"``. Serialization is byte-identical
for equal documents; the CLI and the HTTP service share this exact path.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

from . import depgraph as dg
from . import jsontext, tools
from .addressing import CellAddress, Region, parse_cell_text, parse_region
from .errors import FormatError, RegionTooLargeError
from .workbook import Workbook, dump_json

SCHEMA_VERSION = 1

# Fixed fill colors; the paper names the hues, these hex values are frozen
# here once so golden outputs and the UI agree.
FILL_COLORS = {
    "input": "#C6EFCE",
    "output": "#2E7D32",
    "processing": "#D9D9D9",
    "standalone": "#FFC7CE",
}
COMPONENT_COLORS = (
    "#4E79A7",
    "#F28E2B",
    "#E15759",
    "#76B7B2",
    "#59A14F",
    "#EDC948",
    "#B07AA1",
    "#9C755F",
)

#: Hard cap on SVG size, in rendered grid cells.
MAX_SVG_CELLS = 10_000


def fill_color(fill_class: str) -> str:
    if fill_class.startswith("component-"):
        return COMPONENT_COLORS[int(fill_class.split("-", 1)[1]) % len(COMPONENT_COLORS)]
    return FILL_COLORS[fill_class]


def workbook_digest(wb: Workbook) -> str:
    """Content hash; changes iff any cell content changes."""
    return hashlib.sha256(dump_json(wb).encode("utf-8")).hexdigest()


@dataclass
class ReportDocument:
    tool: str
    params: dict
    digest: str
    overlay: tools.Overlay
    diagnostics: list[tools.Diagnostic] = field(default_factory=list)
    default_sheet: str = "Sheet1"


def _endpoint_text(endpoint, default_sheet: str) -> str:
    if isinstance(endpoint, int):
        return f"#{endpoint}"
    return endpoint.text(default_sheet)


def to_json(doc: ReportDocument) -> str:
    """Canonical report JSON text (trailing newline included)."""
    ds = doc.default_sheet
    overlay = doc.overlay
    payload = {
        "version": SCHEMA_VERSION,
        "tool": doc.tool,
        "params": doc.params,
        "digest": doc.digest,
        "fills": [
            {"ref": addr.text(ds), "class": cls} for addr, cls in overlay.fills
        ],
        "arrows": [
            {
                "from": _endpoint_text(a.src, ds),
                "to": _endpoint_text(a.dst, ds),
                "kind": a.kind,
            }
            for a in overlay.arrows
        ],
        "blocks": [
            {"id": bid, "region": region.text(ds)} for bid, region in overlay.blocks
        ],
        "levels": [
            {"ref": addr.text(ds), "level": n} for addr, n in overlay.levels
        ],
        "components": [
            {"id": cid, "cells": [a.text(ds) for a in members]}
            for cid, members in overlay.components
        ],
        "diagnostics": [
            {
                "code": d.code,
                "cells": [a.text(ds) for a in d.cells],
                "severity": d.severity,
                "message": d.message,
            }
            for d in doc.diagnostics
        ],
    }
    return jsontext.dumps(payload) + "\n"


def _endpoint_from_text(text: str, default_sheet: str):
    if text.startswith("#"):
        return int(text[1:])
    return parse_cell_text(text, default_sheet)


def from_json(text: str, default_sheet: str = "Sheet1") -> ReportDocument:
    """Parse report JSON back into an equal ReportDocument."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"invalid report JSON: {exc}") from exc
    if raw.get("version") != SCHEMA_VERSION:
        raise FormatError(f"unsupported report version {raw.get('version')!r}")
    overlay = tools.Overlay(
        fills=[
            (parse_cell_text(f["ref"], default_sheet), f["class"]) for f in raw["fills"]
        ],
        arrows=[
            tools.Arrow(
                _endpoint_from_text(a["from"], default_sheet),
                _endpoint_from_text(a["to"], default_sheet),
                a["kind"],
            )
            for a in raw["arrows"]
        ],
        blocks=[
            (b["id"], parse_region(b["region"], default_sheet)) for b in raw["blocks"]
        ],
        levels=[
            (parse_cell_text(lv["ref"], default_sheet), lv["level"])
            for lv in raw["levels"]
        ],
        components=[
            (
                c["id"],
                tuple(parse_cell_text(ref, default_sheet) for ref in c["cells"]),
            )
            for c in raw["components"]
        ],
    )
    diagnostics = [
        tools.Diagnostic(
            d["code"],
            tuple(parse_cell_text(ref, default_sheet) for ref in d["cells"]),
            d["severity"],
            d["message"],
        )
        for d in raw["diagnostics"]
    ]
    return ReportDocument(
        tool=raw["tool"],
        params=raw["params"],
        digest=raw["digest"],
        overlay=overlay,
        diagnostics=diagnostics,
        default_sheet=default_sheet,
    )


def to_text(doc: ReportDocument) -> str:
    """Plain-text report for terminals."""
    ds = doc.default_sheet
    lines = [f"tool: {doc.tool}"]
    for key, value in doc.params.items():
        if isinstance(value, list):
            value = ",".join(str(v) for v in value)
        lines.append(f"{key}: {value}")
    lines.append(f"digest: {doc.digest}")
    for addr, cls in doc.overlay.fills:
        lines.append(f"fill {addr.text(ds)} {cls}")
    for arrow in doc.overlay.arrows:
        src = _endpoint_text(arrow.src, ds)
        dst = _endpoint_text(arrow.dst, ds)
        lines.append(f"arrow {src} -> {dst}")
    for bid, region in doc.overlay.blocks:
        lines.append(f"block #{bid} {region.text(ds)}")
    for addr, level in doc.overlay.levels:
        lines.append(f"level {addr.text(ds)} {level}")
    for cid, members in doc.overlay.components:
        cells = " ".join(a.text(ds) for a in members)
        lines.append(f"component {cid}: {cells}")
    for d in doc.diagnostics:
        cells = ",".join(a.text(ds) for a in d.cells)
        lines.append(f"{d.severity} {d.code} [{cells}] {d.message}")
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class SvgOptions:
    cell_w: int = 80
    cell_h: int = 20
    margin: int = 40


def _svg_escape(text: str) -> str:
    return (
        text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
    )


def _sheet_bboxes(wb: Workbook, overlay: tools.Overlay) -> dict[str, tuple[int, int, int, int]]:
    """(min_row, min_col, max_row, max_col) per sheet, covering cells and
    every overlay endpoint (phantom targets may lie outside the used area)."""
    boxes: dict[str, tuple[int, int, int, int]] = {}

    def include(sheet: str, row: int, col: int) -> None:
        lo_r, lo_c, hi_r, hi_c = boxes.get(sheet, (row, col, row, col))
        boxes[sheet] = (min(lo_r, row), min(lo_c, col), max(hi_r, row), max(hi_c, col))

    for sheet in wb.sheets:
        for (row, col) in sheet.cells:
            include(sheet.name, row, col)
    for addr, _cls in overlay.fills:
        include(addr.sheet, addr.row, addr.col)
    for addr, _lvl in overlay.levels:
        include(addr.sheet, addr.row, addr.col)
    for arrow in overlay.arrows:
        for endpoint in (arrow.src, arrow.dst):
            if isinstance(endpoint, CellAddress):
                include(endpoint.sheet, endpoint.row, endpoint.col)
    for _bid, region in overlay.blocks:
        include(region.sheet, region.top_left.row, region.top_left.col)
        include(region.sheet, region.bottom_right.row, region.bottom_right.col)
    for _cid, members in overlay.components:
        for addr in members:
            include(addr.sheet, addr.row, addr.col)
    return boxes


def to_svg(wb: Workbook, overlay: tools.Overlay, options: SvgOptions = SvgOptions()) -> str:
    """Static SVG: one rect per grid cell in the used bounding box, overlay
    fills, arrows between cell centers (block arrows between block centers),
    and level badges. Raises REGION_TOO_LARGE above 10,000 cells."""
    boxes = _sheet_bboxes(wb, overlay)
    total_cells = sum(
        (hi_r - lo_r + 1) * (hi_c - lo_c + 1) for lo_r, lo_c, hi_r, hi_c in boxes.values()
    )
    if total_cells > MAX_SVG_CELLS:
        raise RegionTooLargeError(total_cells, MAX_SVG_CELLS)

    cw, ch, margin = options.cell_w, options.cell_h, options.margin
    label_h = ch if len(boxes) > 1 else 0
    sheet_origin: dict[str, tuple[int, int]] = {}
    y_cursor = margin
    width = 2 * margin
    for name in sorted(boxes):
        lo_r, lo_c, hi_r, hi_c = boxes[name]
        y_cursor += label_h
        sheet_origin[name] = (margin, y_cursor)
        y_cursor += (hi_r - lo_r + 1) * ch + margin
        width = max(width, 2 * margin + (hi_c - lo_c + 1) * cw)
    height = y_cursor if boxes else 2 * margin

    fill_by_addr = {addr: cls for addr, cls in overlay.fills}

    def cell_xy(addr: CellAddress) -> tuple[int, int]:
        lo_r, lo_c, _, _ = boxes[addr.sheet]
        ox, oy = sheet_origin[addr.sheet]
        return ox + (addr.col - lo_c) * cw, oy + (addr.row - lo_r) * ch

    def center(addr: CellAddress) -> tuple[int, int]:
        x, y = cell_xy(addr)
        return x + cw // 2, y + ch // 2

    def region_center(region: Region) -> tuple[int, int]:
        x1, y1 = cell_xy(region.top_left)
        x2, y2 = cell_xy(region.bottom_right)
        return (x1 + x2 + cw) // 2, (y1 + y2 + ch) // 2

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}"'
        f' font-family="sans-serif" font-size="11">',
        "<defs>"
        '<marker id="arrowhead" markerWidth="8" markerHeight="8" refX="7" refY="3"'
        ' orient="auto" markerUnits="strokeWidth">'
        '<path d="M0,0 L7,3 L0,6 z" fill="#1F4E79"/>'
        "</marker>"
        "</defs>",
        f'<rect class="frame" x="1" y="1" width="{width - 2}" height="{height - 2}"'
        ' fill="#FFFFFF" stroke="#333333"/>',
    ]
    for name in sorted(boxes):
        lo_r, lo_c, hi_r, hi_c = boxes[name]
        ox, oy = sheet_origin[name]
        if label_h:
            parts.append(
                f'<text class="sheet-label" x="{ox}" y="{oy - 6}"'
                f' font-weight="bold">{_svg_escape(name)}</text>'
            )
        sheet = wb.sheet(name)
        for row in range(lo_r, hi_r + 1):
            for col in range(lo_c, hi_c + 1):
                addr = CellAddress(name, col, row)
                x, y = cell_xy(addr)
                cls = fill_by_addr.get(addr)
                color = fill_color(cls) if cls else "#FFFFFF"
                parts.append(
                    f'<rect class="cell" x="{x}" y="{y}" width="{cw}" height="{ch}"'
                    f' fill="{color}" stroke="#BBBBBB"/>'
                )
                cell = sheet.cells.get((row, col)) if sheet else None
                if cell is not None:
                    text = _svg_escape(cell.display_text())
                    parts.append(
                        f'<text class="cell-text" x="{x + 3}" y="{y + ch - 6}">{text}</text>'
                    )
    block_regions = dict(overlay.blocks)
    for bid, region in overlay.blocks:
        x1, y1 = cell_xy(region.top_left)
        x2, y2 = cell_xy(region.bottom_right)
        parts.append(
            f'<rect class="block" x="{x1}" y="{y1}" width="{x2 - x1 + cw}"'
            f' height="{y2 - y1 + ch}" fill="none" stroke="#1F4E79"'
            ' stroke-width="2" stroke-dasharray="4,2"/>'
        )
    for arrow in overlay.arrows:
        if arrow.kind == "block":
            x1, y1 = region_center(block_regions[arrow.src])
            x2, y2 = region_center(block_regions[arrow.dst])
        else:
            x1, y1 = center(arrow.src)
            x2, y2 = center(arrow.dst)
        color = "#1F4E79"
        if arrow.component is not None:
            color = COMPONENT_COLORS[arrow.component % len(COMPONENT_COLORS)]
        parts.append(
            f'<line class="arrow" x1="{x1}" y1="{y1}" x2="{x2}" y2="{y2}"'
            f' stroke="{color}" stroke-width="1.5" marker-end="url(#arrowhead)"/>'
        )
    for addr, level in overlay.levels:
        x, y = cell_xy(addr)
        parts.append(
            f'<text class="level" x="{x + cw - 12}" y="{y + 9}" font-size="8"'
            f' fill="#1F4E79">{level}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
