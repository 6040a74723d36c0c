"""Row writers: CSV, JSON and a hand-built log-log SVG."""
from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path
from typing import Optional
from xml.sax.saxutils import escape

from .runner import CSV_FIELDS, ResultRow

SIG_DIGITS = 12


def fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        if math.isnan(v):
            return ""
        return format(v, f".{SIG_DIGITS}g")
    return str(v)


def to_csv(rows: list[ResultRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_FIELDS)
    for row in rows:
        w.writerow([fmt(row.values.get(k)) for k in CSV_FIELDS])
    return buf.getvalue()


def to_json(rows: list[ResultRow]) -> str:
    out = []
    for row in rows:
        d = {k: row.values.get(k) for k in CSV_FIELDS}
        d["status"] = row.status
        out.append(d)
    return json.dumps(out, indent=2)


def to_svg(rows: list[ResultRow], x_key: str = "r", y_key: str = "error_lower",
           x_label: Optional[str] = None) -> str:
    """Log-log plot, one polyline per protocol, 800x600, legend top-right."""
    if not rows:
        raise ValueError("no rows to plot")
    W, H, pad = 800, 600, 70
    series: dict = {}
    for row in rows:
        x, y = row.values.get(x_key), row.values.get(y_key)
        if x is None or y is None or x <= 0 or y <= 0:
            continue
        series.setdefault(row.values.get("protocol", "?"), []).append((float(x), float(y)))
    pts = [p for s in series.values() for p in s]
    if pts:
        lx = [math.log10(p[0]) for p in pts]
        ly = [math.log10(p[1]) for p in pts]
    else:
        lx, ly = [0.0, 1.0], [0.0, 1.0]
    x0, x1 = min(lx), max(lx)
    y0, y1 = min(ly), max(ly)
    if x1 - x0 < 1e-12:
        x0, x1 = x0 - 0.5, x1 + 0.5
    if y1 - y0 < 1e-12:
        y0, y1 = y0 - 0.5, y1 + 0.5

    def sx(v):
        return pad + (math.log10(v) - x0) / (x1 - x0) * (W - 2 * pad)

    def sy(v):
        return H - pad - (math.log10(v) - y0) / (y1 - y0) * (H - 2 * pad)

    colors = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"]
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" '
             f'viewBox="0 0 {W} {H}">',
             f'<rect width="{W}" height="{H}" fill="white"/>',
             f'<line x1="{pad}" y1="{H - pad}" x2="{W - pad}" y2="{H - pad}" stroke="black"/>',
             f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{H - pad}" stroke="black"/>',
             f'<text x="{W / 2}" y="{H - 20}" text-anchor="middle">'
             f'{escape(x_label or x_key)} (log10)</text>',
             f'<text x="20" y="{H / 2}" text-anchor="middle" '
             f'transform="rotate(-90 20 {H / 2})">{escape(y_key)} (log10)</text>']
    for k in range(math.floor(x0), math.ceil(x1) + 1):
        if x0 - 1e-9 <= k <= x1 + 1e-9:
            parts.append(f'<text x="{sx(10 ** k):.1f}" y="{H - pad + 18}" '
                         f'text-anchor="middle" font-size="12">1e{k}</text>')
    for k in range(math.floor(y0), math.ceil(y1) + 1):
        if y0 - 1e-9 <= k <= y1 + 1e-9:
            parts.append(f'<text x="{pad - 8}" y="{sy(10 ** k):.1f}" '
                         f'text-anchor="end" font-size="12">1e{k}</text>')
    for i, (name, s) in enumerate(series.items()):
        c = colors[i % len(colors)]
        s = sorted(s)
        coords = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in s)
        parts.append(f'<polyline fill="none" stroke="{c}" stroke-width="2" points="{coords}"/>')
        ly_ = pad + 20 * i
        parts.append(f'<line x1="{W - pad - 120}" y1="{ly_}" x2="{W - pad - 95}" y2="{ly_}" '
                     f'stroke="{c}" stroke-width="2"/>')
        parts.append(f'<text x="{W - pad - 90}" y="{ly_ + 4}" font-size="12">{escape(name)}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def emit(rows: list[ResultRow], fmt_name: str, path, x_key: str = "r",
         x_label: Optional[str] = None) -> Path:
    path = Path(path)
    if fmt_name == "csv":
        text = to_csv(rows)
    elif fmt_name == "json":
        text = to_json(rows)
    elif fmt_name == "svg":
        text = to_svg(rows, x_key=x_key, x_label=x_label)
    else:
        raise ValueError(f"unknown format {fmt_name!r}")
    try:
        path.write_text(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc
    return path
