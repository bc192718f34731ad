"""Volumetric plots as plain SVG 1.1."""
from __future__ import annotations

import json
from dataclasses import dataclass
from xml.sax.saxutils import escape, quoteattr

from .analysis import implied_region, pareto_frontier, quantum_volume
from .errors import EmptyGrid, InvalidParameter, LatticeMismatch

CELL = 26
MARGIN_LEFT = 70
MARGIN_TOP = 70
MARGIN_BOTTOM = 60
LEGEND_WIDTH = 210

RAMP_LOW = (0xBD, 0xBD, 0xBD)
RAMP_HIGH = (0x1F, 0x5F, 0xA8)
LINE_COLORS = ("#1f5fa8", "#c0392b", "#2e8b57", "#8e44ad", "#d35400", "#555555")


@dataclass(frozen=True)
class PlotSpec:
    axes: str = "log"
    shading: str = "binary"
    frontier: bool = True
    qv: bool = False
    frontier_only: bool = False
    ramp_floor: float = 0.5
    output: str | None = None
    title: str | None = None

    def __post_init__(self):
        if self.axes not in ("log", "linear"):
            raise InvalidParameter("axes must be 'log' or 'linear'")
        if self.shading not in ("binary", "score"):
            raise InvalidParameter("shading must be 'binary' or 'score'")
        if not 0 <= self.ramp_floor < 1:
            raise InvalidParameter("ramp_floor must lie in [0, 1)")


def ramp(score, floor=0.5):
    """Hex colour for ``score`` on a linear grey-to-blue ramp over [floor, 1]."""
    t = min(1.0, max(0.0, (score - floor) / (1 - floor)))
    rgb = [round(a + (b - a) * t) for a, b in zip(RAMP_LOW, RAMP_HIGH)]
    return "#" + "".join(f"{c:02x}" for c in rgb)


def _fmt(x):
    return f"{x:.1f}".rstrip("0").rstrip(".")


class _Axes:
    def __init__(self, widths, depths, mode):
        self.widths, self.depths, self.mode = widths, depths, mode
        self.nx = len(depths) if mode == "log" else max(depths) + 1
        self.ny = len(widths) if mode == "log" else max(widths)

    def col(self, d):
        return self.depths.index(d) if self.mode == "log" else d

    def row(self, w):
        return self.widths.index(w) if self.mode == "log" else w - 1

    def x(self, d):
        return MARGIN_LEFT + self.col(d) * CELL

    def y(self, w):
        return MARGIN_TOP + (self.ny - 1 - self.row(w)) * CELL

    def centre(self, w, d):
        return self.x(d) + CELL / 2, self.y(w) + CELL / 2


def _check_lattice(grids):
    keys = set(grids[0].entries)
    for g in grids[1:]:
        if set(g.entries) != keys:
            raise LatticeMismatch("overlaid grids cover different shapes")


def _ident_block(grid):
    info = dict(grid.info)
    keys = ("family", "criterion", "threshold", "confidence", "K", "N", "seed")
    block = {"family": grid.family}
    for k in keys[1:]:
        if k in info:
            block[k] = info[k]
    return block


def _title(spec, grid):
    if spec.title:
        return spec.title
    b = _ident_block(grid)
    parts = [b["family"]]
    for k in ("criterion", "threshold", "confidence"):
        if k in b:
            v = b[k]
            parts.append(f"{k} {_fmt(v) if isinstance(v, float) else v}")
    return ", ".join(parts)


def render_plot(spec, grids, predicted=None):
    """SVG document for ``grids`` (observed) and an optional prediction grid."""
    grids = list(grids)
    if not grids:
        raise InvalidParameter("at least one grid is required")
    _check_lattice(grids + ([predicted] if predicted is not None else []))
    base = grids[0]
    if not base.entries:
        raise EmptyGrid("grid has no entries")
    ax = _Axes(base.widths, base.depths, spec.axes)
    plot_w = ax.nx * CELL
    plot_h = ax.ny * CELL
    width = MARGIN_LEFT + plot_w + 20 + LEGEND_WIDTH
    height = MARGIN_TOP + plot_h + MARGIN_BOTTOM

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="Helvetica, Arial, sans-serif">',
        "<metadata>" + escape(json.dumps(
            {"benchmarks": [_ident_block(g) for g in grids]}, sort_keys=True,
        )) + "</metadata>",
        f'<text x="{MARGIN_LEFT}" y="28" font-size="15">{escape(_title(spec, base))}</text>',
        f'<rect x="{MARGIN_LEFT}" y="{MARGIN_TOP}" width="{plot_w}" height="{plot_h}" '
        'fill="none" stroke="#999" stroke-width="0.5"/>',
    ]

    if spec.qv:
        n = quantum_volume(base)
        out.append('<g class="implied-region">')
        for w, d in implied_region(base, n):
            out.append(
                f'<rect class="implied" data-w="{w}" data-d="{d}" x="{ax.x(d)}" y="{ax.y(w)}" '
                f'width="{CELL}" height="{CELL}" fill="#e2e2e2" stroke="none"/>'
            )
        out.append("</g>")

    if not spec.frontier_only:
        out.append('<g class="cells">')
        for (w, d), e in sorted(base.entries.items()):
            if not e.tested:
                continue
            x, y = ax.x(d) + 3, ax.y(w) + 3
            s = CELL - 6
            attrs = f'data-w="{w}" data-d="{d}" x="{x}" y="{y}" width="{s}" height="{s}"'
            if e.passed:
                fill = ramp(e.score, spec.ramp_floor) if spec.shading == "score" and e.score is not None else "#1f5fa8"
                out.append(f'<rect class="pass" {attrs} fill="{fill}" stroke="#333" stroke-width="1"/>')
            else:
                stroke = ramp(e.score, spec.ramp_floor) if spec.shading == "score" and e.score is not None else "#333"
                out.append(f'<rect class="fail" {attrs} fill="none" stroke="{stroke}" stroke-width="1.5"/>')
        out.append("</g>")
        if predicted is not None:
            out.append('<g class="predicted-cells">')
            for (w, d), e in sorted(predicted.entries.items()):
                if e.tested and e.passed:
                    s = CELL // 4
                    cx, cy = ax.centre(w, d)
                    out.append(
                        f'<rect class="predicted" data-w="{w}" data-d="{d}" x="{_fmt(cx - s / 2)}" '
                        f'y="{_fmt(cy - s / 2)}" width="{s}" height="{s}" fill="#f1c40f" stroke="#333" '
                        'stroke-width="0.5"/>'
                    )
            out.append("</g>")

    if spec.qv:
        n = quantum_volume(base)
        out.append('<g class="qv-squares">')
        for (w, d), e in sorted(base.entries.items()):
            if w == d and w <= n and e.tested:
                out.append(
                    f'<rect class="qv-square" data-w="{w}" data-d="{d}" x="{ax.x(d) + 1}" y="{ax.y(w) + 1}" '
                    f'width="{CELL - 2}" height="{CELL - 2}" fill="none" stroke="#000" stroke-width="2"/>'
                )
        out.append("</g>")

    legend = []
    if spec.frontier or spec.frontier_only:
        lines = [(g, g.info.get("label", g.family)) for g in grids]
        if predicted is not None:
            lines.append((predicted, "predicted"))
        for i, (g, label) in enumerate(lines):
            try:
                front = pareto_frontier(g)
            except EmptyGrid:
                continue
            if not front:
                continue
            color = LINE_COLORS[i % len(LINE_COLORS)]
            pts = []
            for w, d in front:
                pts.append(f"{_fmt(ax.x(d) + CELL)},{_fmt(ax.y(w))}")
                pts.append(f"{_fmt(ax.x(d) + CELL)},{_fmt(ax.y(w) + CELL)}")
            dash = ' stroke-dasharray="5,3"' if g is predicted else ""
            out.append(
                f'<polyline class="frontier" data-label={quoteattr(str(label))} points="{" ".join(pts)}" '
                f'fill="none" stroke="{color}" stroke-width="2"{dash}/>'
            )
            legend.append(("line", color, f"frontier: {label}", dash))

    # axes
    out.append('<g class="ticks" font-size="11" fill="#222">')
    for d in base.depths:
        if spec.axes == "linear" and d not in (0, max(base.depths)) and d & (d - 1):
            continue
        out.append(
            f'<text x="{_fmt(ax.x(d) + CELL / 2)}" y="{MARGIN_TOP + plot_h + 16}" text-anchor="middle">{d}</text>'
        )
    for w in base.widths:
        out.append(f'<text x="{MARGIN_LEFT - 8}" y="{_fmt(ax.y(w) + CELL / 2 + 4)}" text-anchor="end">{w}</text>')
    out.append("</g>")
    out.append(
        f'<text x="{_fmt(MARGIN_LEFT + plot_w / 2)}" y="{MARGIN_TOP + plot_h + 40}" font-size="13" '
        'text-anchor="middle">depth d</text>'
    )
    cy = MARGIN_TOP + plot_h / 2
    out.append(
        f'<text x="22" y="{_fmt(cy)}" font-size="13" text-anchor="middle" '
        f'transform="rotate(-90 22 {_fmt(cy)})">width w</text>'
    )

    if not spec.frontier_only:
        legend.insert(0, ("box", "#1f5fa8", "pass", ""))
        legend.insert(1, ("hollow", "#333", "fail", ""))
        if predicted is not None:
            legend.append(("small", "#f1c40f", "predicted pass", ""))
    if spec.qv:
        legend.append(("box", "#e2e2e2", f"implied by log2 V_Q = {quantum_volume(base)}", ""))
    if spec.shading == "score" and not spec.frontier_only:
        legend.append(("ramp", "", f"score {_fmt(spec.ramp_floor)} (grey) to 1 (blue)", ""))

    lx = MARGIN_LEFT + plot_w + 20
    out.append('<g class="legend" font-size="11">')
    for i, (kind, color, label, dash) in enumerate(legend):
        y = MARGIN_TOP + i * 20
        if kind == "line":
            out.append(f'<line x1="{lx}" y1="{y + 7}" x2="{lx + 18}" y2="{y + 7}" stroke="{color}" stroke-width="2"{dash}/>')
        elif kind == "box":
            out.append(f'<rect x="{lx}" y="{y}" width="14" height="14" fill="{color}" stroke="#333"/>')
        elif kind == "hollow":
            out.append(f'<rect x="{lx}" y="{y}" width="14" height="14" fill="none" stroke="{color}" stroke-width="1.5"/>')
        elif kind == "small":
            out.append(f'<rect x="{lx + 4}" y="{y + 4}" width="6" height="6" fill="{color}" stroke="#333" stroke-width="0.5"/>')
        else:
            out.append(f'<rect x="{lx}" y="{y}" width="7" height="14" fill="{ramp(spec.ramp_floor, spec.ramp_floor)}"/>')
            out.append(f'<rect x="{lx + 7}" y="{y}" width="7" height="14" fill="{ramp(1.0, spec.ramp_floor)}"/>')
        out.append(f'<text x="{lx + 24}" y="{y + 11}">{escape(label)}</text>')
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_plot(spec, grids, predicted=None, path=None):
    svg = render_plot(spec, grids, predicted)
    path = path or spec.output
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(svg)
    return svg
