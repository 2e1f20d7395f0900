"""Hand-rolled SVG emission: line plots and categorical heat maps.

Deliberately minimal — enough to eyeball a run's output without pulling
in a plotting stack.  Coordinates are mapped linearly (optionally log10
on y); everything else is fixed styling.
"""

from __future__ import annotations

import math
from pathlib import Path

W, H = 640, 420
ML, MR, MT, MB = 64, 16, 28, 44  # margins

PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
           "#8c564b", "#17becf", "#7f7f7f", "#bcbd22", "#e377c2"]

REGION_COLORS = {"mps_best": "#1b5e20", "qmpso_advantage": "#66bb6a",
                 "trotter_advantage": "#c8e6c9"}


def _ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / n
    mag = 10 ** math.floor(math.log10(raw))
    for mult in (1, 2, 2.5, 5, 10):
        if raw <= mult * mag:
            step = mult * mag
            break
    start = math.ceil(lo / step) * step
    out = []
    v = start
    while v <= hi + 1e-12 * abs(step):
        out.append(round(v, 12))
        v += step
    return out


def _fmt(v: float) -> str:
    return f"{v:.4g}"


def line_plot(path, series: dict, title: str = "", xlabel: str = "",
              ylabel: str = "", ylog: bool = False,
              hlines: list | None = None) -> None:
    """series: label -> (xs, ys).  hlines: dashed horizontal guides."""
    pts = [(x, y) for xs, ys in series.values() for x, y in zip(xs, ys)
           if not ylog or y > 0]
    if not pts:
        raise ValueError("line_plot: nothing to draw")
    ty = (lambda y: math.log10(y)) if ylog else (lambda y: y)
    xlo = min(p[0] for p in pts); xhi = max(p[0] for p in pts)
    ylo = min(ty(p[1]) for p in pts); yhi = max(ty(p[1]) for p in pts)
    for y in (hlines or []):
        ylo = min(ylo, ty(y)); yhi = max(yhi, ty(y))
    if xhi == xlo:
        xhi = xlo + 1.0
    if yhi == ylo:
        yhi = ylo + 1.0
    pad = 0.05 * (yhi - ylo)
    ylo -= pad; yhi += pad

    def px(x): return ML + (x - xlo) / (xhi - xlo) * (W - ML - MR)
    def py(y): return H - MB - (ty(y) - ylo) / (yhi - ylo) * (H - MT - MB)

    e = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" '
         f'font-family="sans-serif" font-size="11">',
         f'<rect width="{W}" height="{H}" fill="white"/>']
    # frame and ticks
    e.append(f'<rect x="{ML}" y="{MT}" width="{W-ML-MR}" height="{H-MT-MB}" '
             f'fill="none" stroke="#333"/>')
    for v in _ticks(xlo, xhi):
        x = px(v)
        e.append(f'<line x1="{x:.1f}" y1="{H-MB}" x2="{x:.1f}" y2="{H-MB+4}" stroke="#333"/>')
        e.append(f'<text x="{x:.1f}" y="{H-MB+16}" text-anchor="middle">{_fmt(v)}</text>')
    for v in _ticks(ylo, yhi):
        y = H - MB - (v - ylo) / (yhi - ylo) * (H - MT - MB)
        lab = _fmt(10 ** v) if ylog else _fmt(v)
        e.append(f'<line x1="{ML-4}" y1="{y:.1f}" x2="{ML}" y2="{y:.1f}" stroke="#333"/>')
        e.append(f'<text x="{ML-7}" y="{y+3.5:.1f}" text-anchor="end">{lab}</text>')
    for yv in (hlines or []):
        y = py(yv)
        e.append(f'<line x1="{ML}" y1="{y:.1f}" x2="{W-MR}" y2="{y:.1f}" '
                 f'stroke="#999" stroke-dasharray="5,4"/>')
    # curves
    for i, (label, (xs, ys)) in enumerate(series.items()):
        col = PALETTE[i % len(PALETTE)]
        coords = " ".join(f"{px(x):.1f},{py(y):.1f}" for x, y in zip(xs, ys)
                          if not ylog or y > 0)
        e.append(f'<polyline points="{coords}" fill="none" stroke="{col}" stroke-width="1.5"/>')
        ly = MT + 14 + 14 * i
        e.append(f'<line x1="{ML+8}" y1="{ly-4}" x2="{ML+28}" y2="{ly-4}" '
                 f'stroke="{col}" stroke-width="1.5"/>')
        e.append(f'<text x="{ML+33}" y="{ly}">{label}</text>')
    if title:
        e.append(f'<text x="{W/2}" y="{MT-10}" text-anchor="middle" '
                 f'font-size="13">{title}</text>')
    if xlabel:
        e.append(f'<text x="{(ML+W-MR)/2}" y="{H-10}" text-anchor="middle">{xlabel}</text>')
    if ylabel:
        e.append(f'<text x="14" y="{(MT+H-MB)/2}" text-anchor="middle" '
                 f'transform="rotate(-90 14 {(MT+H-MB)/2})">{ylabel}</text>')
    e.append("</svg>")
    Path(path).write_text("\n".join(e))


def heat_map(path, xs: list, ys: list, cells: list, title: str = "",
             xlabel: str = "", ylabel: str = "",
             colors: dict | None = None) -> None:
    """Categorical grid: cells[i][j] is the label at (ys[i], xs[j]).
    Row order follows ys; colors maps label -> fill."""
    colors = colors or REGION_COLORS
    nx, ny = len(xs), len(ys)
    if any(len(row) != nx for row in cells) or len(cells) != ny:
        raise ValueError("heat_map: cell grid does not match axes")
    cw = (W - ML - MR) / nx
    ch = (H - MT - MB) / ny
    e = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" '
         f'font-family="sans-serif" font-size="11">',
         f'<rect width="{W}" height="{H}" fill="white"/>']
    for i in range(ny):
        for j in range(nx):
            col = colors.get(cells[i][j], "#cccccc")
            e.append(f'<rect x="{ML+j*cw:.1f}" y="{MT+(ny-1-i)*ch:.1f}" '
                     f'width="{cw:.1f}" height="{ch:.1f}" fill="{col}" '
                     f'stroke="white" stroke-width="0.5"/>')
    for j, x in enumerate(xs):
        e.append(f'<text x="{ML+(j+0.5)*cw:.1f}" y="{H-MB+16}" '
                 f'text-anchor="middle">{_fmt(x)}</text>')
    for i, y in enumerate(ys):
        e.append(f'<text x="{ML-7}" y="{MT+(ny-1-i+0.55)*ch:.1f}" '
                 f'text-anchor="end">{_fmt(y)}</text>')
    ly = MT + 14
    for k, (lab, col) in enumerate(colors.items()):
        e.append(f'<rect x="{W-MR-150}" y="{ly+16*k-9}" width="12" height="12" '
                 f'fill="{col}"/>')
        e.append(f'<text x="{W-MR-134}" y="{ly+16*k}">{lab}</text>')
    if title:
        e.append(f'<text x="{W/2}" y="{MT-10}" text-anchor="middle" font-size="13">{title}</text>')
    if xlabel:
        e.append(f'<text x="{(ML+W-MR)/2}" y="{H-10}" text-anchor="middle">{xlabel}</text>')
    if ylabel:
        e.append(f'<text x="14" y="{(MT+H-MB)/2}" text-anchor="middle" '
                 f'transform="rotate(-90 14 {(MT+H-MB)/2})">{ylabel}</text>')
    e.append("</svg>")
    Path(path).write_text("\n".join(e))
