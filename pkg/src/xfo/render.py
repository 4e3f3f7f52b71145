"""Static SVG rendering of traces: quality timelines and lamp snapshots.

Output is deterministic byte-for-byte: integer coordinates only, fixed
color table, entities in sorted order.
"""
from __future__ import annotations

from .errors import MalformedTraceError, TickOutOfRangeError
from .trace import TraceDoc, replay_spans

COLOR_TABLE = {
    "green": "#2e8b57",
    "yellow": "#e6c200",
    "red": "#c0392b",
    "dark": "#777777",
}
FALLBACK_COLOR = "#bbbbbb"

_LABEL_W = 150
_ROW_H = 26
_ROW_GAP = 10
_TOP = 34
_PX_PER_TICK = 40
_RIGHT = 20


def _color(quality: str) -> str:
    return COLOR_TABLE.get(quality, FALLBACK_COLOR)


def _esc(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def _quality_spans(doc: TraceDoc):
    """entity -> list of (start, end, quality) from Has_Quality links,
    clipped to the horizon."""
    spans = replay_spans(doc.events)
    rows: dict[str, list[tuple[int, int, str]]] = {}
    for (frm, kind, to), ranges in spans.items():
        if kind != "Has_Quality":
            continue
        for start, end in ranges:
            stop = doc.horizon if end is None else min(end, doc.horizon)
            if stop <= start:
                continue
            rows.setdefault(frm, []).append((start, stop, to))
    for row in rows.values():
        row.sort()
    return rows


def _axis(out: list[str], width: int, y: int, horizon: int) -> None:
    out.append(f'<line x1="{_LABEL_W}" y1="{y}" x2="{width - _RIGHT}" y2="{y}" stroke="#333333"/>')
    step = 1 if horizon <= 30 else 5
    for t in range(0, horizon + 1, step):
        x = _LABEL_W + t * _PX_PER_TICK
        out.append(f'<line x1="{x}" y1="{y}" x2="{x}" y2="{y + 5}" stroke="#333333"/>')
        out.append(f'<text x="{x}" y="{y + 18}" font-size="11" text-anchor="middle">{t}</text>')


def render_timeline(doc: TraceDoc, entities: list[str] | None = None) -> str:
    """One band per entity showing its Has_Quality spans over [0, horizon]."""
    rows = _quality_spans(doc)
    if entities is None:
        names = sorted(rows)
    else:
        unknown = sorted(set(entities) - set(rows))
        if unknown:
            raise MalformedTraceError(
                f"no Has_Quality history for entit{'y' if len(unknown) == 1 else 'ies'}: "
                + ", ".join(unknown)
            )
        names = list(entities)
    width = _LABEL_W + doc.horizon * _PX_PER_TICK + _RIGHT
    axis_y = _TOP + len(names) * (_ROW_H + _ROW_GAP) + 8
    height = axis_y + 30
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<text x="{_LABEL_W}" y="20" font-size="13" font-family="sans-serif">'
        f"{_esc(doc.scenario)}: quality timeline</text>",
    ]
    for i, name in enumerate(names):
        y = _TOP + i * (_ROW_H + _ROW_GAP)
        out.append(
            f'<text x="{_LABEL_W - 8}" y="{y + 17}" font-size="12" text-anchor="end" '
            f'font-family="sans-serif">{_esc(name)}</text>'
        )
        for start, stop, quality in rows.get(name, ()):
            x = _LABEL_W + start * _PX_PER_TICK
            w = (stop - start) * _PX_PER_TICK
            out.append(
                f'<rect x="{x}" y="{y}" width="{w}" height="{_ROW_H}" '
                f'fill="{_color(quality)}" stroke="#333333">'
                f"<title>{_esc(name)}: {_esc(quality)} [{start},{stop})</title></rect>"
            )
    _axis(out, width, axis_y, doc.horizon)
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _containers(doc: TraceDoc):
    """container -> sorted member entities, from Continuant_Part_Of links."""
    groups: dict[str, list[str]] = {}
    grouped: set[str] = set()
    for (frm, kind, to), _ranges in replay_spans(doc.events).items():
        if kind != "Continuant_Part_Of":
            continue
        groups.setdefault(to, [])
        if frm not in groups[to]:
            groups[to].append(frm)
        grouped.add(frm)
    for members in groups.values():
        members.sort()
    return groups, grouped


def render_snapshot(doc: TraceDoc, at: int) -> str:
    """Lamp states at one tick: one row per container, a filled circle per
    member colored by its active Has_Quality link."""
    if not 0 <= at <= doc.horizon:
        raise TickOutOfRangeError(f"tick {at} outside [0, {doc.horizon}]")
    rows = _quality_spans(doc)
    groups, grouped = _containers(doc)
    loose = sorted(set(rows) - grouped)
    panels = [(name, groups[name]) for name in sorted(groups)]
    if loose:
        panels.append(("(ungrouped)", loose))

    def quality_at(entity: str) -> str | None:
        for start, stop, quality in rows.get(entity, ()):
            if start <= at < stop:
                return quality
        return None

    r, gap, row_h = 16, 70, 78
    max_members = max((len(m) for _, m in panels), default=0)
    width = _LABEL_W + max(max_members * gap, gap) + _RIGHT
    height = _TOP + max(len(panels), 1) * row_h + 10
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<text x="{_LABEL_W}" y="20" font-size="13" font-family="sans-serif">'
        f"{_esc(doc.scenario)}: state at tick {at}</text>",
    ]
    for i, (container, members) in enumerate(panels):
        y = _TOP + i * row_h + row_h // 2
        out.append(
            f'<text x="{_LABEL_W - 8}" y="{y + 5}" font-size="12" text-anchor="end" '
            f'font-family="sans-serif">{_esc(container)}</text>'
        )
        for j, member in enumerate(members):
            cx = _LABEL_W + gap // 2 + j * gap
            quality = quality_at(member)
            fill = _color(quality) if quality is not None else "#eeeeee"
            out.append(
                f'<circle cx="{cx}" cy="{y}" r="{r}" fill="{fill}" stroke="#333333">'
                f"<title>{_esc(member)}: {_esc(quality or 'none')}</title></circle>"
            )
            out.append(
                f'<text x="{cx}" y="{y + r + 14}" font-size="10" text-anchor="middle" '
                f'font-family="sans-serif">{_esc(member)}</text>'
            )
    out.append("</svg>")
    return "\n".join(out) + "\n"
