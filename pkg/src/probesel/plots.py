"""Minimal static SVG boxplot writer for accuracy distributions."""


def _quartiles(values):
    v = sorted(values)
    n = len(v)

    def q(p):
        idx = p * (n - 1)
        lo = int(idx)
        hi = min(lo + 1, n - 1)
        frac = idx - lo
        return v[lo] * (1 - frac) + v[hi] * frac

    return v[0], q(0.25), q(0.5), q(0.75), v[-1]


def svg_boxplot(cells, title="LOIO accuracy", width=900, height=None) -> str:
    """One box per (name, values) pair; y-axis fixed to [0, 1]."""
    cells = list(cells)
    row_h = 26
    margin_left = 260
    margin_top = 40
    plot_w = width - margin_left - 30
    height = height or (margin_top + row_h * len(cells) + 30)

    def x_of(v):
        return margin_left + v * plot_w

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'font-family="monospace" font-size="12">',
        f'<text x="{margin_left}" y="20" font-size="14">{title}</text>',
    ]
    for frac in (0.0, 0.25, 0.5, 0.75, 1.0):
        x = x_of(frac)
        parts.append(
            f'<line x1="{x:.1f}" y1="{margin_top - 8}" x2="{x:.1f}" y2="{height - 24}" '
            f'stroke="#ddd"/>'
        )
        parts.append(f'<text x="{x - 10:.1f}" y="{height - 8}">{frac:.2f}</text>')
    for i, (name, values) in enumerate(cells):
        y = margin_top + i * row_h
        cy = y + row_h / 2
        lo, q1, med, q3, hi = _quartiles(values)
        parts.append(f'<text x="8" y="{cy + 4:.1f}">{name}</text>')
        parts.append(
            f'<line x1="{x_of(lo):.1f}" y1="{cy:.1f}" x2="{x_of(hi):.1f}" y2="{cy:.1f}" '
            f'stroke="#333"/>'
        )
        parts.append(
            f'<rect x="{x_of(q1):.1f}" y="{cy - 7:.1f}" width="{max(x_of(q3) - x_of(q1), 0.5):.1f}" '
            f'height="14" fill="#9ecae1" stroke="#333"/>'
        )
        parts.append(
            f'<line x1="{x_of(med):.1f}" y1="{cy - 7:.1f}" x2="{x_of(med):.1f}" y2="{cy + 7:.1f}" '
            f'stroke="#b30000" stroke-width="2"/>'
        )
    parts.append("</svg>")
    return "\n".join(parts)
