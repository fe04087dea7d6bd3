"""Text renderings of a TableMessage: aligned table, CSV and wire JSON."""

from __future__ import annotations

from . import wire

NULL_MARK = "∅"
JOINED_MARK = "↪"
FORMATS = ("table", "json", "csv")


def _csv_field(cell) -> str:
    # RFC 4180 quoting; an empty string is quoted so it stays distinct from null.
    if cell is None:
        return ""
    if cell == "" or any(ch in cell for ch in ',"\r\n'):
        return '"' + cell.replace('"', '""') + '"'
    return cell


def render_table(table: wire.TableMessage) -> str:
    headers = [f"{JOINED_MARK}{f.title}" if f.is_joined else f.title for f in table.fields]
    rows = [[NULL_MARK if c is None else c for c in row] for row in table.items]
    widths = [len(h) for h in headers]
    for row in rows:
        widths = [max(w, len(c)) for w, c in zip(widths, row)]
    lines = ["  ".join(h.ljust(w) for h, w in zip(headers, widths)).rstrip()]
    for row in rows:
        lines.append("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip())
    return "\n".join(lines) + "\n"


def render_csv(table: wire.TableMessage) -> str:
    lines = [",".join(_csv_field(f.name) for f in table.fields)]
    lines.extend(",".join(_csv_field(c) for c in row) for row in table.items)
    return "".join(line + "\r\n" for line in lines)


def render(table: wire.TableMessage, format: str = "table") -> str:  # noqa: A002
    if format == "table":
        return render_table(table)
    if format == "csv":
        return render_csv(table)
    if format == "json":
        return wire.encode(table) + "\n"
    raise ValueError(f"unknown format {format!r}")
