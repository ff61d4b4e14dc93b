"""Shipped tilings: {k,3} disk patches, the Klein quartic, small closed surfaces,
and fault-injected variants used by the audits' tests."""

from __future__ import annotations

import copy
import itertools
import logging
import math
from pathlib import Path
from typing import Callable, Dict, Iterable, List, Optional, Tuple

import numpy as np

from hyperbolic_core import HPoint, Isometry, apply, hyperbolic_centroid
from hypertile_utils import DomainError, HypertileError, PrecisionError
from polygons import Polygon, realize_regular, rescale_to_area, theta_for_area
from tilings import Edge, Face, TilingGraph, Vertex, load_tiling

LOGGER = logging.getLogger(f"hypertile.{__name__}")

FIXTURE_DIR = Path(__file__).resolve().parent / "fixtures"
BOUNDARY_MARGIN = 1e-12
QUANTUM = 1e-10
TWO_THIRDS_PI = 2.0 * math.pi / 3.0


class _PointIndex:
    """Grid hash for deduplicating disk points at a fixed quantum."""

    def __init__(self, quantum: float = QUANTUM):
        self.quantum = quantum
        self.cells: Dict[Tuple[int, int], List[Tuple[complex, int]]] = {}

    def _key(self, z: complex) -> Tuple[int, int]:
        return (int(round(z.real / self.quantum)), int(round(z.imag / self.quantum)))

    def find(self, z: complex) -> Optional[int]:
        cx, cy = self._key(z)
        for dx in (-1, 0, 1):
            for dy in (-1, 0, 1):
                for w, ident in self.cells.get((cx + dx, cy + dy), ()):
                    if abs(w - z) <= self.quantum:
                        return ident
        return None

    def add(self, z: complex, ident: int) -> None:
        self.cells.setdefault(self._key(z), []).append((z, ident))


def _graph_from_polygons(polygons: List[Polygon], meta: dict) -> TilingGraph:
    points = _PointIndex()
    vertices: Dict[int, Vertex] = {}
    edges: Dict[int, Edge] = {}
    edge_keys: Dict[Tuple[int, int], int] = {}
    faces: Dict[int, Face] = {}
    for fid, poly in enumerate(polygons, start=1):
        ids = []
        for p in poly.vertices:
            vid = points.find(p.z)
            if vid is None:
                vid = len(vertices) + 1
                vertices[vid] = Vertex(vid, p)
                points.add(p.z, vid)
            ids.append(vid)
        boundary = []
        for i, a in enumerate(ids):
            b = ids[(i + 1) % len(ids)]
            key = (min(a, b), max(a, b))
            if key not in edge_keys:
                eid = len(edges) + 1
                edge_keys[key] = eid
                edges[eid] = Edge(eid, (a, b))
            eid = edge_keys[key]
            boundary.append(eid if edges[eid].v == (a, b) else -eid)
        faces[fid] = Face(fid, boundary, polygon=poly)
    return TilingGraph(vertices, edges, faces, meta)


def generate_patch(k: int, depth: int) -> TilingGraph:
    """Patch of the {k,3} tiling grown from a central R_k by repeated edge reflections."""
    if float(k) != int(k) or int(k) < 7:
        raise DomainError(f"generate_patch needs an integer k >= 7, got {k!r}")
    if depth < 0:
        raise DomainError("depth must be nonnegative")
    k = int(k)
    polygons = [realize_regular(k, TWO_THIRDS_PI)]
    centers = _PointIndex()
    centers.add(0j, 0)
    frontier = [0]
    for level in range(1, depth + 1):
        grown = []
        for index in frontier:
            poly = polygons[index]
            for i in range(k):
                a, b = poly.vertices[i], poly.vertices[(i + 1) % k]
                mirror = Isometry.reflection_across(a, b)
                try:
                    # reflection reverses orientation, reversing the list restores ccw
                    image = tuple(apply(mirror, v) for v in reversed(poly.vertices))
                except DomainError as exc:
                    raise PrecisionError(f"depth {level} leaves the disk: {exc}", depth=level) from exc
                center = hyperbolic_centroid(image).z
                if centers.find(center) is not None:
                    continue
                if max(abs(p.z) for p in image) > 1.0 - BOUNDARY_MARGIN:
                    raise PrecisionError(
                        f"depth {level} puts vertices within {BOUNDARY_MARGIN} of the ideal boundary", depth=level
                    )
                centers.add(center, len(polygons))
                grown.append(len(polygons))
                polygons.append(Polygon(image, ccw=True))
        frontier = grown
    LOGGER.info("{%s,3} patch at depth %s: %s faces", k, depth, len(polygons))
    return _graph_from_polygons(
        polygons, {"name": f"patch-{k}-{depth}", "open": True, "k": k, "depth": depth, "curvature": -1}
    )


# ---------------------------------------------------------------------------
# Klein quartic from PSL(2, 7)
# ---------------------------------------------------------------------------

Mat = Tuple[int, int, int, int]
MOD = 7


def _canon(m: Iterable[int]) -> Mat:
    m = tuple(x % MOD for x in m)
    first = next(x for x in m if x)
    return m if first <= MOD // 2 else tuple((-x) % MOD for x in m)


def _mul(a: Mat, b: Mat) -> Mat:
    return _canon(
        (
            a[0] * b[0] + a[1] * b[2],
            a[0] * b[1] + a[1] * b[3],
            a[2] * b[0] + a[3] * b[2],
            a[2] * b[1] + a[3] * b[3],
        )
    )


IDENTITY = _canon((1, 0, 0, 1))


def _power(g: Mat, n: int) -> Mat:
    out = IDENTITY
    for _ in range(n):
        out = _mul(out, g)
    return out


def psl27() -> List[Mat]:
    return sorted(
        {
            _canon(m)
            for m in itertools.product(range(MOD), repeat=4)
            if (m[0] * m[3] - m[1] * m[2]) % MOD == 1
        }
    )


def _closure(gens: List[Mat]) -> set:
    seen = {IDENTITY}
    frontier = [IDENTITY]
    while frontier:
        nxt = []
        for g in frontier:
            for h in gens:
                gh = _mul(g, h)
                if gh not in seen:
                    seen.add(gh)
                    nxt.append(gh)
        frontier = nxt
    return seen


def hurwitz_generators(elements: List[Mat]) -> Tuple[Mat, Mat]:
    """x of order 7 and y of order 3 with xy of order 2, generating all 168 elements."""
    x = _canon((1, 1, 0, 1))
    for y in elements:
        if y == IDENTITY or _power(y, 3) != IDENTITY:
            continue
        xy = _mul(x, y)
        if xy == IDENTITY or _mul(xy, xy) != IDENTITY:
            continue
        if len(_closure([x, y])) == len(elements):
            return x, y
    raise HypertileError("no (2,3,7) generating pair in PSL(2,7)")


def klein_quartic_fixture() -> TilingGraph:
    """24 heptagons, 3 per vertex, on the genus-3 surface.

    Darts are group elements; faces are cosets of <x>, vertices cosets of <y>,
    edges cosets of <xy>. Every face is lifted as R_7 centered at the origin.
    """
    elements = psl27()
    index = {g: i for i, g in enumerate(elements)}
    x, y = hurwitz_generators(elements)
    z = _mul(x, y)

    def coset(g: Mat, h: Mat, order: int) -> Mat:
        members = [g]
        for _ in range(order - 1):
            members.append(_mul(members[-1], h))
        return min(members, key=index.__getitem__)

    vertex_ids: Dict[Mat, int] = {}
    for g in elements:
        vertex_ids.setdefault(coset(g, y, 3), len(vertex_ids) + 1)

    def tail(d: Mat) -> int:
        return vertex_ids[coset(d, y, 3)]

    edges: Dict[int, Edge] = {}
    dart_sign: Dict[Mat, int] = {}
    for d in elements:
        partner = _mul(d, z)
        if index[d] < index[partner]:
            eid = len(edges) + 1
            edges[eid] = Edge(eid, (tail(d), tail(partner)))
            dart_sign[d] = eid
            dart_sign[partner] = -eid

    lift = realize_regular(7, TWO_THIRDS_PI)
    faces: Dict[int, Face] = {}
    for g in elements:
        if coset(g, x, 7) != g:
            continue
        darts = [g]
        for _ in range(6):
            darts.append(_mul(darts[-1], x))
        fid = len(faces) + 1
        faces[fid] = Face(fid, [dart_sign[d] for d in darts], polygon=lift)

    vertices = {vid: Vertex(vid) for vid in vertex_ids.values()}
    meta = {"name": "klein-quartic", "genus": 3, "curvature": -1, "k": 7, "surface": "orientable", "vertex_degree": 3}
    return TilingGraph(vertices, edges, faces, meta)


# ---------------------------------------------------------------------------
# Small closed surfaces
# ---------------------------------------------------------------------------


def genus2_octagon_fixture() -> TilingGraph:
    """One regular octagon with angles pi/4; all eight corners meet at one vertex."""
    edges = {eid: Edge(eid, (1, 1)) for eid in range(1, 5)}
    face = Face(1, [1, 2, -1, -2, 3, 4, -3, -4], polygon=realize_regular(8, math.pi / 4.0))
    meta = {"name": "genus2-octagon", "genus": 2, "curvature": -1, "k": 18, "surface": "orientable"}
    return TilingGraph({1: Vertex(1)}, edges, {1: face}, meta)


def square_torus_fixture() -> TilingGraph:
    edges = {1: Edge(1, (1, 1)), 2: Edge(2, (1, 1))}
    face = Face(1, [1, 2, -1, -2], area=1.0, perimeter=4.0)
    meta = {"name": "square-torus", "genus": 1, "curvature": 0, "surface": "orientable"}
    return TilingGraph({1: Vertex(1)}, edges, {1: face}, meta)


# ---------------------------------------------------------------------------
# Fault-injected variants
# ---------------------------------------------------------------------------


def contract_edge(t: TilingGraph, edge_id: int) -> TilingGraph:
    """Collapse a non-loop edge; its endpoints merge into one vertex.

    Every face that loses a side keeps its area and is relifted as the regular
    polygon of that area with the new side count. Faces left with fewer than
    three sides keep the area as an annotation only. The metadata is inherited,
    including any claimed vertex degree.
    """
    if edge_id not in t.edges:
        raise DomainError(f"no edge {edge_id}")
    keep, gone = t.edges[edge_id].v
    if keep == gone:
        raise DomainError(f"edge {edge_id} is a loop")
    out = copy.deepcopy(t)
    del out.edges[edge_id]
    for edge in out.edges.values():
        edge.v = tuple(keep if end == gone else end for end in edge.v)
    del out.vertices[gone]
    for face in out.faces.values():
        if not any(abs(d) == edge_id for d in face.boundary):
            continue
        area = t.face_area(t.faces[face.id])
        face.boundary = [d for d in face.boundary if abs(d) != edge_id]
        face.perimeter = None
        if face.polygon is not None and face.n >= 3 and area < (face.n - 2) * math.pi:
            face.polygon = realize_regular(face.n, theta_for_area(face.n, area))
            face.area = None
        else:
            face.polygon = None
            face.area = area
        LOGGER.debug("face %s relifted with %s sides", face.id, face.n)
    out.meta = {**t.meta, "variant": f"contract-{edge_id}"}
    return out


def perturb_face_area(t: TilingGraph, face_id: int, delta: float = 0.1) -> TilingGraph:
    out = copy.deepcopy(t)
    face = out.faces[face_id]
    face.area = t.face_area(t.faces[face_id]) + delta
    out.meta = {**t.meta, "variant": f"area-{face_id}"}
    return out


def perturbed_geometry_variant(t: TilingGraph, jitter: float = 0.05, seed: int = 0) -> TilingGraph:
    """Replace every lifted face by a jittered, non-regular polygon of the same area."""
    rng = np.random.default_rng(seed)
    out = copy.deepcopy(t)
    for fid in sorted(out.faces):
        face = out.faces[fid]
        if face.polygon is None:
            continue
        area = t.face_area(t.faces[fid])
        moved = []
        for v in face.polygon.vertices:
            r = math.tanh(0.5 * jitter * float(rng.uniform(0.5, 1.0)))
            phi = float(rng.uniform(0.0, 2.0 * math.pi))
            moved.append(apply(Isometry.translation(v), HPoint(r * math.cos(phi), r * math.sin(phi))))
        face.polygon = rescale_to_area(Polygon(tuple(moved), face.polygon.ccw), area)
        face.area = None
        face.perimeter = None
    out.meta = {**t.meta, "variant": f"jitter-{jitter}-{seed}"}
    return out


def _from_json(name: str) -> Callable[[], TilingGraph]:
    return lambda: load_tiling(FIXTURE_DIR / name)


FIXTURES: Dict[str, Callable[[], TilingGraph]] = {
    "klein-quartic": klein_quartic_fixture,
    "klein-quartic-contracted": lambda: contract_edge(klein_quartic_fixture(), 1),
    "klein-quartic-area": lambda: perturb_face_area(klein_quartic_fixture(), 1, 0.1),
    "klein-quartic-jittered": lambda: perturbed_geometry_variant(klein_quartic_fixture()),
    "genus2-octagon": _from_json("genus2_octagon.json"),
    "square-torus": _from_json("square_torus.json"),
}


def load_fixture(name: str) -> TilingGraph:
    try:
        factory = FIXTURES[name]
    except KeyError:
        raise DomainError(f"unknown fixture {name!r}; choose from {', '.join(sorted(FIXTURES))}") from None
    return factory()


__all__ = [
    "FIXTURES",
    "FIXTURE_DIR",
    "contract_edge",
    "generate_patch",
    "genus2_octagon_fixture",
    "hurwitz_generators",
    "klein_quartic_fixture",
    "load_fixture",
    "perturb_face_area",
    "perturbed_geometry_variant",
    "psl27",
    "square_torus_fixture",
]
