"""Deterministic SVG rendering of domains and solver overlays."""

from __future__ import annotations

from dataclasses import dataclass, field

from .geometry import PolygonalDomain

__all__ = ["RenderSpec", "render_svg"]

ALL_LAYERS = ("domain", "holes", "visibility", "paths", "candidates", "pair")


@dataclass
class RenderSpec:
    layers: tuple[str, ...] = ("domain", "holes")
    size: int = 800
    stroke: float = 1.5
    margin: float = 0.05
    graph: object | None = None  # VisibilityGraph for the visibility layer
    paths: list | None = None  # lists of (x, y) polylines
    candidates: list | None = None  # (x, y) points
    pair: tuple | None = None  # ((sx, sy), (tx, ty))


def _fmt(x: float) -> str:
    return f"{x:.4f}"


def render_svg(domain: PolygonalDomain, spec: RenderSpec | None = None) -> str:
    """SVG 1.1 text with stable element order for golden-file comparison."""
    spec = spec or RenderSpec()
    x0, y0, x1, y1 = domain.bbox
    span = max(x1 - x0, y1 - y0)
    pad = span * spec.margin
    x0, y0, x1, y1 = x0 - pad, y0 - pad, x1 + pad, y1 + pad
    span = max(x1 - x0, y1 - y0)
    scale = spec.size / span

    def tx(p):
        return (p[0] - x0) * scale, (y1 - p[1]) * scale  # y-down flip

    w = (x1 - x0) * scale
    h = (y1 - y0) * scale
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
           f'width="{_fmt(w)}" height="{_fmt(h)}" '
           f'viewBox="0 0 {_fmt(w)} {_fmt(h)}">']

    def ring_path(chain) -> str:
        pts = [tx((p.x, p.y)) for p in chain.vertices]
        d = "M " + " L ".join(f"{_fmt(a)} {_fmt(b)}" for a, b in pts) + " Z"
        return d

    if "domain" in spec.layers:
        d = ring_path(domain.outer)
        if "holes" in spec.layers:
            for hole in domain.holes:
                d += " " + ring_path(hole)
        out.append(f'<path d="{d}" fill="white" stroke="#333" '
                   f'stroke-width="{spec.stroke}" fill-rule="evenodd"/>')
        if "holes" in spec.layers:
            for hole in domain.holes:
                out.append(f'<path d="{ring_path(hole)}" fill="#bbb" '
                           f'stroke="#333" stroke-width="{spec.stroke}"/>')

    if "visibility" in spec.layers and spec.graph is not None:
        import numpy as np
        wts = spec.graph.weights
        n = wts.shape[0]
        for i in range(n):
            for j in range(i + 1, n):
                if np.isfinite(wts[i, j]):
                    a = tx(tuple(domain.corner_xy[i]))
                    b = tx(tuple(domain.corner_xy[j]))
                    out.append(f'<line x1="{_fmt(a[0])}" y1="{_fmt(a[1])}" '
                               f'x2="{_fmt(b[0])}" y2="{_fmt(b[1])}" '
                               f'stroke="#9cf" stroke-width="0.5"/>')

    if "paths" in spec.layers and spec.paths:
        for poly in spec.paths:
            pts = [tx(p) for p in poly]
            d = "M " + " L ".join(f"{_fmt(a)} {_fmt(b)}" for a, b in pts)
            out.append(f'<path d="{d}" fill="none" stroke="#111" '
                       f'stroke-width="{spec.stroke}" '
                       f'stroke-dasharray="6 4"/>')

    if "candidates" in spec.layers and spec.candidates:
        for p in spec.candidates:
            a = tx(p)
            out.append(f'<circle cx="{_fmt(a[0])}" cy="{_fmt(a[1])}" r="3" '
                       f'fill="#e80" stroke="none"/>')

    if "pair" in spec.layers and spec.pair:
        for p, color in zip(spec.pair, ("#d00", "#00d")):
            a = tx(p)
            out.append(f'<circle cx="{_fmt(a[0])}" cy="{_fmt(a[1])}" r="5" '
                       f'fill="{color}" stroke="black"/>')

    out.append("</svg>")
    return "\n".join(out) + "\n"
