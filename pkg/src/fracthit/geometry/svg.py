"""Static SVG rendering of a cell complex, shaded by cell depth."""

from __future__ import annotations

from pathlib import Path
from typing import Optional, Sequence

from .overlay import CellComplex


def complex_svg(cx: CellComplex, guards: Sequence = (), width: int = 480,
                depth: Optional[Sequence[int]] = None) -> str:
    """SVG text; darker cells are covered by more generators.

    ``depth`` overrides the per-cell shading value (defaults to label size).
    """
    xs = [float(v[0]) for v in cx.master.vertices]
    ys = [float(v[1]) for v in cx.master.vertices]
    x0, y0 = min(xs), min(ys)
    span = max(max(xs) - x0, max(ys) - y0) or 1.0
    s = (width - 20) / span
    height = int((max(ys) - y0) * s) + 20
    depth = list(depth) if depth is not None else [len(l) for l in cx.labels]
    top = max(depth, default=0) or 1

    def xy(p):
        return f"{10 + (float(p[0]) - x0) * s:.3f},{height - 10 - (float(p[1]) - y0) * s:.3f}"

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">']
    for cell, d in zip(cx.cells, depth):
        g = 255 - int(200 * d / top)
        pts = " ".join(xy(v) for v in cell)
        out.append(f'<polygon points="{pts}" fill="rgb({g},{g},255)" stroke="#999" stroke-width="0.3"/>')
    pts = " ".join(xy(v) for v in cx.master.vertices)
    out.append(f'<polygon points="{pts}" fill="none" stroke="black" stroke-width="1.5"/>')
    for p in guards:
        cx_, cy_ = xy(p).split(",")
        out.append(f'<circle cx="{cx_}" cy="{cy_}" r="4" fill="red"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def save_svg(cx: CellComplex, path, guards: Sequence = (), **kw) -> None:
    Path(path).write_text(complex_svg(cx, guards, **kw))


__all__ = ["complex_svg", "save_svg"]
