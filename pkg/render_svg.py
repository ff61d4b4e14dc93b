"""SVG 1.1 rendering of lifted tilings in the Poincare disk.

Disk point (x, y) maps to viewport point (500 + 480 x, 500 - 480 y). Geodesic
sides are arcs of circles orthogonal to the unit circle; diameters are lines.
"""

from __future__ import annotations

from pathlib import Path
from typing import Dict, Iterable, List, Optional, Tuple

from hyperbolic_core import HPoint, geodesic_circle
from polygons import Polygon
from tilings import TilingGraph

VIEWPORT = 1000.0
DISK_RADIUS = 480.0
CENTER = VIEWPORT / 2.0

STYLE = {
    "disk": {"fill": "none", "stroke": "#444444", "stroke-width": 1.5},
    "face": {"fill": "#dfe8f5", "fill-opacity": 0.6, "stroke": "#1f3b63", "stroke-width": 1.0},
}


def disk_to_svg(p: HPoint) -> Tuple[float, float]:
    return CENTER + DISK_RADIUS * p.x, CENTER - DISK_RADIUS * p.y


def _num(x: float) -> str:
    return f"{x:.6f}"


def props_repr(d: Dict[str, object]) -> str:
    return " ".join(f'{k}="{v}"' for k, v in d.items())


def edge_command(p: HPoint, q: HPoint) -> str:
    """Path segment from p to q (the pen is assumed to be at p)."""
    x2, y2 = disk_to_svg(q)
    circle = geodesic_circle(p, q)
    if circle is None:
        return f"L {_num(x2)} {_num(y2)}"
    (cx, cy), radius = circle
    x1, y1 = disk_to_svg(p)
    sx, sy = CENTER + DISK_RADIUS * cx, CENTER - DISK_RADIUS * cy
    # screen y points down, so a positive cross product means a clockwise sweep
    cross = (x2 - x1) * (sy - y1) - (y2 - y1) * (sx - x1)
    sweep = 1 if cross > 0 else 0
    r = _num(DISK_RADIUS * radius)
    return f"A {r} {r} 0 0 {sweep} {_num(x2)} {_num(y2)}"


def polygon_path(polygon: Polygon) -> str:
    verts = polygon.vertices
    x0, y0 = disk_to_svg(verts[0])
    parts = [f"M {_num(x0)} {_num(y0)}"]
    for i, v in enumerate(verts):
        parts.append(edge_command(v, verts[(i + 1) % len(verts)]))
    parts.append("Z")
    return " ".join(parts)


def render_polygons(polygons: Iterable[Polygon], title: Optional[str] = None) -> str:
    lines: List[str] = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        '<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{int(VIEWPORT)}" height="{int(VIEWPORT)}" viewBox="0 0 {int(VIEWPORT)} {int(VIEWPORT)}">',
    ]
    if title:
        lines.append(f"<title>{title}</title>")
    lines.append(f'<circle class="disk" cx="{_num(CENTER)}" cy="{_num(CENTER)}" r="{_num(DISK_RADIUS)}" {props_repr(STYLE["disk"])}/>')
    for polygon in polygons:
        lines.append(f'<path class="face" d="{polygon_path(polygon)}" {props_repr(STYLE["face"])}/>')
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def render_tiling(t: TilingGraph) -> str:
    polygons = [f.polygon for _, f in sorted(t.faces.items()) if f.polygon is not None]
    return render_polygons(polygons, title=t.meta.get("name"))


def write_svg(t: TilingGraph, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(render_tiling(t), encoding="utf-8")
    return path


__all__ = ["disk_to_svg", "edge_command", "polygon_path", "render_polygons", "render_tiling", "write_svg"]
