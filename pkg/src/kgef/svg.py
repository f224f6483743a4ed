"""Dependency-free SVG renderers for the report stage.

Plain string assembly with fixed-precision coordinates, so repeated
renders of the same data are byte-identical and diffable.
"""

from __future__ import annotations

from xml.sax.saxutils import escape

_PALETTE = ("#4C72B0", "#DD8452", "#55A868", "#C44E52", "#8172B3", "#937860")


def _svg(width, height, body) -> str:
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">\n' + body + "</svg>\n"
    )


def bar_chart(data, title: str, width: int = 640, height: int = 360) -> str:
    """Vertical bar chart; data is a list of (label, value)."""
    margin, label_h, title_h = 40, 60, 30
    plot_w = width - 2 * margin
    plot_h = height - title_h - label_h
    peak = max((v for _, v in data), default=0) or 1
    n = max(len(data), 1)
    slot = plot_w / n
    bar_w = slot * 0.7
    parts = [f'<text x="{width / 2:.1f}" y="20" text-anchor="middle" '
             f'font-family="sans-serif" font-size="14">{escape(title)}</text>\n']
    for i, (label, value) in enumerate(data):
        h = plot_h * value / peak
        x = margin + i * slot + (slot - bar_w) / 2
        y = title_h + plot_h - h
        color = _PALETTE[i % len(_PALETTE)]
        parts.append(f'<rect x="{x:.1f}" y="{y:.1f}" width="{bar_w:.1f}" '
                     f'height="{h:.1f}" fill="{color}"/>\n')
        parts.append(f'<text x="{x + bar_w / 2:.1f}" y="{y - 4:.1f}" text-anchor="middle" '
                     f'font-family="sans-serif" font-size="10">{value:g}</text>\n')
        parts.append(f'<text x="{x + bar_w / 2:.1f}" y="{title_h + plot_h + 14:.1f}" '
                     f'text-anchor="middle" font-family="sans-serif" font-size="9" '
                     f'transform="rotate(30 {x + bar_w / 2:.1f} {title_h + plot_h + 14:.1f})">'
                     f"{escape(str(label))}</text>\n")
    return _svg(width, height, "".join(parts))


def treemap(data, title: str, width: int = 640, height: int = 360) -> str:
    """Slice-and-dice treemap; data is a list of (label, value)."""
    title_h = 30
    total = sum(v for _, v in data) or 1
    parts = [f'<text x="{width / 2:.1f}" y="20" text-anchor="middle" '
             f'font-family="sans-serif" font-size="14">{escape(title)}</text>\n']
    x = 0.0
    for i, (label, value) in enumerate(data):
        w = width * value / total
        color = _PALETTE[i % len(_PALETTE)]
        parts.append(f'<rect x="{x:.1f}" y="{title_h}" width="{w:.1f}" '
                     f'height="{height - title_h}" fill="{color}" stroke="#fff"/>\n')
        if w > 30:
            parts.append(f'<text x="{x + w / 2:.1f}" y="{(height + title_h) / 2:.1f}" '
                         f'text-anchor="middle" font-family="sans-serif" font-size="11" '
                         f'fill="#fff">{escape(str(label))} ({value:g})</text>\n')
        x += w
    return _svg(width, height, "".join(parts))
