"""Static SVG figures: stars as slit planes, pasted edges, KN cells."""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

import numpy as np

PALETTE = ("#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f",
           "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac")
PANEL = 160
GAP = 24


def _color(k: int) -> str:
    return PALETTE[k % len(PALETTE)]


def _layout(n: int) -> tuple[int, int]:
    cols = max(1, int(math.ceil(math.sqrt(n))))
    rows = max(1, int(math.ceil(n / cols)))
    return cols, rows


class _Canvas:
    def __init__(self, stars, window):
        self.stars = list(stars)
        self.window = window
        self.cols, self.rows = _layout(len(self.stars))
        self.width = self.cols * (PANEL + GAP) + GAP
        self.height = self.rows * (PANEL + GAP) + GAP
        self.layers = {"stars": [], "slits": [], "edges": [], "labels": []}

    def origin(self, star) -> tuple[float, float]:
        i = self.stars.index(star)
        return GAP + (i % self.cols) * (PANEL + GAP), GAP + (i // self.cols) * (PANEL + GAP)

    def to_px(self, star, z: complex) -> tuple[float, float]:
        x0, x1, y0, y1 = self.window
        ox, oy = self.origin(star)
        px = ox + (z.real - x0) / (x1 - x0) * PANEL
        py = oy + (y1 - z.imag) / (y1 - y0) * PANEL
        return px, py

    def center(self, star) -> tuple[float, float]:
        ox, oy = self.origin(star)
        return ox + PANEL / 2, oy + PANEL / 2

    def render(self) -> str:
        head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.width}" '
                f'height="{self.height}" viewBox="0 0 {self.width} {self.height}">')
        body = []
        for name in ("stars", "slits", "edges", "labels"):
            body.append(f'<g id="{name}">')
            body.extend(self.layers[name])
            body.append("</g>")
        return "\n".join([head] + body + ["</svg>"]) + "\n"


def _slit_segment(canvas: _Canvas, star, c: complex, d: complex):
    x0, x1, y0, y1 = canvas.window
    reach = 2 * math.hypot(x1 - x0, y1 - y0) + abs(c)
    a = canvas.to_px(star, c)
    b = canvas.to_px(star, c + reach * d)
    return a, b


def _exit_time(ax, ay, bx, by, ox, oy) -> float:
    """Parameter at which the segment from an inside point leaves the panel."""
    t = 1.0
    for start, end, lo in ((ax, bx, ox), (ay, by, oy)):
        step = end - start
        if step > 0:
            t = min(t, (lo + PANEL - start) / step)
        elif step < 0:
            t = min(t, (lo - start) / step)
    return max(t, 0.0)


def _draw_frame(canvas: _Canvas, g, slits, ram_index):
    for v in canvas.stars:
        ox, oy = canvas.origin(v)
        stroke = "#333" if v == g.base else "#999"
        canvas.layers["stars"].append(
            f'<rect x="{ox:.2f}" y="{oy:.2f}" width="{PANEL}" height="{PANEL}" '
            f'fill="#f7f7f7" stroke="{stroke}"/>')
        for c, d in slits.get(v, []):
            (ax, ay), (bx, by) = _slit_segment(canvas, v, c, d)
            if not (ox <= ax <= ox + PANEL and oy <= ay <= oy + PANEL):
                continue
            t = _exit_time(ax, ay, bx, by, ox, oy)
            ex, ey = ax + t * (bx - ax), ay + t * (by - ay)
            k = ram_index.get((v, c), 0)
            canvas.layers["slits"].append(
                f'<line x1="{ax:.2f}" y1="{ay:.2f}" x2="{ex:.2f}" y2="{ey:.2f}" '
                f'stroke="{_color(k)}" stroke-width="2"/>')
    for e in g.edges:
        if e.u not in canvas.stars or e.v not in canvas.stars:
            continue
        (ux, uy), (vx, vy) = canvas.center(e.u), canvas.center(e.v)
        canvas.layers["edges"].append(
            f'<line x1="{ux:.2f}" y1="{uy:.2f}" x2="{vx:.2f}" y2="{vy:.2f}" '
            f'stroke="#222" stroke-opacity="0.35" stroke-width="1"/>')
    for v in canvas.stars:
        ox, oy = canvas.origin(v)
        canvas.layers["labels"].append(
            f'<text x="{ox + 4:.2f}" y="{oy + 14:.2f}" font-size="12" '
            f'font-family="monospace">{escape(str(v))}</text>')


def _ram_index(g, rams) -> dict:
    out = {}
    for k, r in enumerate(rams):
        for e in r.edge_cycle:
            out[(e.u, r.projection)] = k
            out[(e.v, r.projection)] = k
    return out


def skeleton_svg(g, slits: dict, rams, window) -> str:
    canvas = _Canvas(g.vertices, window)
    _draw_frame(canvas, g, slits, _ram_index(g, rams))
    return canvas.render()


def cells_svg(cells) -> str:
    g = cells.skeleton
    canvas = _Canvas(cells.stars, cells.window)
    flat = cells.points.ravel()
    N = flat.size
    stride = max(1, int(round(math.sqrt(N) / 80)))
    ny, nx = cells.points.shape
    keep = np.zeros((ny, nx), dtype=bool)
    keep[::stride, ::stride] = True
    keep = keep.ravel()
    x0, x1, _, _ = cells.window
    size = PANEL * stride * cells.h / (x1 - x0)
    region = []
    for si, v in enumerate(cells.stars):
        for idx in np.flatnonzero(keep):
            node = si * N + idx
            px, py = canvas.to_px(v, complex(flat[idx]))
            k = int(cells.assignment[node])
            fill = "#111" if cells.boundary[node] else _color(k)
            region.append(f'<rect x="{px - size / 2:.2f}" y="{py - size / 2:.2f}" '
                          f'width="{size:.2f}" height="{size:.2f}" fill="{fill}" fill-opacity="0.55"/>')
    _draw_frame(canvas, g, cells.slits, _ram_index(g, cells.rams))
    canvas.layers["stars"].extend(region)
    return canvas.render()
