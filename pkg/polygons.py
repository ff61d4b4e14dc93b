"""Hyperbolic polygons and the closed-form regular-polygon formulas.

Formula functions accept real (noninteger) side counts; only
``realize_regular`` needs an integer n. Angles are radians, lengths are in
curvature -1 units.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.optimize import brentq

from hyperbolic_core import (
    HPoint,
    Isometry,
    acosh1p,
    angle_at,
    apply,
    dist,
    geodesic_point,
    hyperbolic_centroid,
    to_klein,
)
from hypertile_utils import (
    EPS_ANGLE,
    EPS_GEOM,
    DegenerateHullError,
    DegeneratePolygonError,
    DomainError,
    InvalidPolygonError,
)


ArrayLike = Union[float, np.ndarray]
TWO_THIRDS_PI = 2.0 * math.pi / 3.0
DISK_MODEL = "poincare-disk"


def _cross(o: Sequence[float], a: Sequence[float], b: Sequence[float]) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def _point_segment_distance(p: Sequence[float], a: Sequence[float], b: Sequence[float]) -> float:
    ax, ay = b[0] - a[0], b[1] - a[1]
    length2 = ax * ax + ay * ay
    if length2 == 0.0:
        return math.hypot(p[0] - a[0], p[1] - a[1])
    t = max(0.0, min(1.0, ((p[0] - a[0]) * ax + (p[1] - a[1]) * ay) / length2))
    return math.hypot(p[0] - a[0] - t * ax, p[1] - a[1] - t * ay)


def _segments_meet(p1, p2, q1, q2, tol: float) -> bool:
    d1 = _cross(q1, q2, p1)
    d2 = _cross(q1, q2, p2)
    d3 = _cross(p1, p2, q1)
    d4 = _cross(p1, p2, q2)
    if ((d1 > tol and d2 < -tol) or (d1 < -tol and d2 > tol)) and (
        (d3 > tol and d4 < -tol) or (d3 < -tol and d4 > tol)
    ):
        return True
    return (
        _point_segment_distance(p1, q1, q2) <= tol
        or _point_segment_distance(p2, q1, q2) <= tol
        or _point_segment_distance(q1, p1, p2) <= tol
        or _point_segment_distance(q2, p1, p2) <= tol
    )


def klein_signed_area(points: Sequence[HPoint]) -> float:
    """Shoelace area of the Klein images; its sign is the polygon orientation."""
    k = np.array([to_klein(p) for p in points])
    x, y = k[:, 0], k[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


@dataclass(frozen=True)
class Polygon:
    vertices: Tuple[HPoint, ...]
    ccw: bool = True

    def __post_init__(self) -> None:
        verts = tuple(self.vertices)
        object.__setattr__(self, "vertices", verts)
        if len(verts) < 3:
            raise InvalidPolygonError(f"a polygon needs at least 3 vertices, got {len(verts)}")
        for i, v in enumerate(verts):
            if dist(v, verts[(i + 1) % len(verts)]) < EPS_GEOM:
                raise InvalidPolygonError(f"consecutive vertices {i} and {(i + 1) % len(verts)} coincide")

    @classmethod
    def oriented(cls, points: Iterable[HPoint]) -> "Polygon":
        pts = tuple(points)
        return cls(pts, ccw=klein_signed_area(pts) > 0.0)

    @classmethod
    def from_coords(cls, coords: Iterable[Sequence[float]], ccw: Optional[bool] = None) -> "Polygon":
        pts = tuple(HPoint(float(c[0]), float(c[1])) for c in coords)
        if ccw is None:
            return cls.oriented(pts)
        return cls(pts, ccw)

    @classmethod
    def from_dict(cls, payload: dict) -> "Polygon":
        model = payload.get("model", DISK_MODEL)
        if model != DISK_MODEL:
            raise DomainError(f"unsupported polygon model {model!r}")
        return cls.from_coords(payload["vertices"])

    def to_dict(self) -> dict:
        return {"vertices": [[v.x, v.y] for v in self.vertices], "model": DISK_MODEL}

    @property
    def n(self) -> int:
        return len(self.vertices)

    def edges(self) -> List[Tuple[HPoint, HPoint]]:
        return [(v, self.vertices[(i + 1) % self.n]) for i, v in enumerate(self.vertices)]

    def side_lengths(self) -> List[float]:
        return [dist(a, b) for a, b in self.edges()]

    def klein_coords(self) -> np.ndarray:
        return np.array([to_klein(v) for v in self.vertices])

    def interior_angle(self, i: int) -> float:
        prev_v = self.vertices[i - 1]
        v = self.vertices[i]
        next_v = self.vertices[(i + 1) % self.n]
        if self.ccw:
            return angle_at(v, next_v, prev_v)
        return angle_at(v, prev_v, next_v)

    def interior_angles(self) -> List[float]:
        return [self.interior_angle(i) for i in range(self.n)]

    def is_simple(self, tol: float = EPS_GEOM) -> bool:
        k = self.klein_coords()
        n = self.n
        for i in range(n):
            for j in range(i + 1, n):
                if j == i + 1 or (i == 0 and j == n - 1):
                    continue
                if _segments_meet(k[i], k[(i + 1) % n], k[j], k[(j + 1) % n], tol):
                    return False
        # adjacent edges may not fold back onto each other
        for i in range(n):
            theta = self.interior_angle(i)
            if theta < EPS_ANGLE or theta > 2.0 * math.pi - EPS_ANGLE:
                return False
        return True

    def contains(self, p: HPoint, tol: float = EPS_GEOM) -> bool:
        k = self.klein_coords()
        q = to_klein(p)
        inside = False
        n = self.n
        for i in range(n):
            a, b = k[i], k[(i + 1) % n]
            if _point_segment_distance(q, a, b) <= tol:
                return True
            if (a[1] > q[1]) != (b[1] > q[1]):
                x_cross = a[0] + (q[1] - a[1]) * (b[0] - a[0]) / (b[1] - a[1])
                if x_cross > q[0]:
                    inside = not inside
        return inside

    def transformed(self, g: Isometry) -> "Polygon":
        return Polygon(tuple(apply(g, v) for v in self.vertices), self.ccw != g.reflect)

    def with_vertex(self, index: int, point: HPoint) -> "Polygon":
        """Insert ``point`` between vertex ``index - 1`` and vertex ``index``."""
        verts = list(self.vertices)
        verts.insert(index, point)
        return Polygon(tuple(verts), self.ccw)

    def area(self) -> float:
        return area_gauss_bonnet(self)

    def perimeter(self) -> float:
        return perimeter(self)


def area_gauss_bonnet(p: Polygon) -> float:
    if not p.is_simple():
        raise InvalidPolygonError("polygon boundary is not simple")
    area = (p.n - 2) * math.pi - math.fsum(p.interior_angles())
    if area <= EPS_GEOM:
        raise DegeneratePolygonError(f"nonpositive polygon area {area!r}")
    return area


def perimeter(p: Polygon) -> float:
    return math.fsum(p.side_lengths())


def is_convex(p: Polygon, eps_angle: float = EPS_ANGLE) -> bool:
    return all(theta <= math.pi + eps_angle for theta in p.interior_angles())


def is_regular(p: Polygon, tol: float = 1e-8) -> bool:
    sides = p.side_lengths()
    angles = p.interior_angles()
    return max(sides) - min(sides) <= tol and max(angles) - min(angles) <= tol


def heron_area(x: ArrayLike, y: ArrayLike, z: ArrayLike) -> ArrayLike:
    """Triangle area from side lengths via tan^2(A/2) = num / (1 + cosh x + cosh y + cosh z)^2.

    With u = cosh(side) - 1 the numerator 1 - sum cosh^2 + 2 prod cosh becomes
    2(uv + vw + wu) - (u^2 + v^2 + w^2) + 2uvw, which keeps small triangles accurate.
    """
    x, y, z = (np.asarray(s, dtype=float) for s in (x, y, z))
    if np.any(x <= 0.0) or np.any(y <= 0.0) or np.any(z <= 0.0):
        raise DomainError("triangle sides must be positive")
    if np.any(x >= y + z) or np.any(y >= x + z) or np.any(z >= x + y):
        raise DomainError("triangle inequality violated")
    u = 2.0 * np.sinh(0.5 * x) ** 2
    v = 2.0 * np.sinh(0.5 * y) ** 2
    w = 2.0 * np.sinh(0.5 * z) ** 2
    num = 2.0 * (u * v + v * w + w * u) - (u * u + v * v + w * w) + 2.0 * u * v * w
    if np.any(num <= 0.0):
        raise DomainError("Heron radicand is nonpositive")
    area = 2.0 * np.arctan(np.sqrt(num) / (4.0 + u + v + w))
    return float(area) if area.ndim == 0 else area


def side_opposite(t1: float, t2: float, t3: float) -> float:
    """Length of the side opposite ``t3`` from the hyperbolic Law of Cosines."""
    if min(t1, t2, t3) <= 0.0:
        raise DomainError("triangle angles must be positive")
    defect = math.pi - (t1 + t2 + t3)
    if defect <= 0.0:
        raise DomainError(f"angle sum {t1 + t2 + t3!r} is not below pi")
    # cos t3 + cos(t1 + t2) = 2 sin(defect / 2) cos((t3 - t1 - t2) / 2)
    u = 2.0 * math.sin(0.5 * defect) * math.cos(0.5 * (t3 - t1 - t2)) / (math.sin(t1) * math.sin(t2))
    return acosh1p(u)


@dataclass(frozen=True)
class RegularSpec:
    n: float
    theta: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.n) or self.n < 2.0:
            raise DomainError(f"side count must be at least 2, got {self.n!r}")
        if not math.isfinite(self.theta) or self.theta <= 0.0:
            raise DomainError(f"interior angle must be positive, got {self.theta!r}")

    @property
    def alpha(self) -> float:
        return math.pi / self.n

    @property
    def max_theta(self) -> float:
        return (self.n - 2.0) * math.pi / self.n

    def check_range(self) -> None:
        if self.theta > self.max_theta + EPS_GEOM:
            raise DomainError(
                f"angle {self.theta!r} exceeds (n-2)pi/n = {self.max_theta!r}; area would be negative"
            )


@dataclass(frozen=True)
class KSpec:
    k: float

    def __post_init__(self) -> None:
        if not self.k > 6.0:
            raise DomainError(f"k must exceed 6, got {self.k!r}")

    @property
    def area(self) -> float:
        return a_k(self.k)

    @property
    def perimeter(self) -> float:
        return p_k(self.k)

    @property
    def ratio(self) -> float:
        return self.perimeter / self.area


def regular_area(spec: RegularSpec) -> float:
    spec.check_range()
    return (spec.n - 2.0) * math.pi - spec.n * spec.theta


def regular_perimeter(spec: RegularSpec) -> float:
    spec.check_range()
    half = 0.5 * spec.theta
    gap = 0.5 * math.pi - half - spec.alpha
    if gap < -EPS_GEOM:
        raise DomainError("cos(pi/n) < sin(theta/2): no hyperbolic regular polygon")
    # cos(pi/n) - sin(theta/2) as a product of sines
    u = 2.0 * math.sin(0.5 * (spec.alpha + 0.5 * math.pi - half)) * math.sin(0.5 * max(gap, 0.0))
    return 2.0 * spec.n * acosh1p(u / math.sin(half))


def a_k(k: float) -> float:
    if not k > 6.0:
        raise DomainError(f"A_k needs k > 6, got {k!r}")
    return (k - 6.0) * math.pi / 3.0


def p_k(k: float) -> float:
    if not k > 6.0:
        raise DomainError(f"P_k needs k > 6, got {k!r}")
    return regular_perimeter(RegularSpec(k, TWO_THIRDS_PI))


def theta_for_area(n: float, area: float) -> float:
    if not 0.0 < area < (n - 2.0) * math.pi:
        raise DomainError(f"area {area!r} outside (0, (n-2)pi) for n = {n!r}")
    return ((n - 2.0) * math.pi - area) / n


def regular_perimeter_for_area(n: float, area: float) -> float:
    return regular_perimeter(RegularSpec(n, theta_for_area(n, area)))


def angle_from_perimeter(n: float, P: float) -> float:
    if not n > 2.0:
        raise DomainError(f"angle_from_perimeter needs n > 2, got {n!r}")
    if P < 0.0:
        raise DomainError("perimeter must be nonnegative")
    return 2.0 * math.asin(math.cos(math.pi / n) / math.cosh(P / (2.0 * n)))


def area_fixed_perimeter(n: ArrayLike, P: float) -> ArrayLike:
    """Area of the regular n-gon of perimeter P, continued by 0 on [0, 2]."""
    n_arr = np.asarray(n, dtype=float)
    if np.any(n_arr < 0.0):
        raise DomainError("side count must be nonnegative")
    if P < 0.0:
        raise DomainError("perimeter must be nonnegative")
    safe = np.maximum(n_arr, 2.0)
    alpha = np.pi / safe
    beta = P / (2.0 * safe)
    # pi(n-2) - 2n asin(x) = 2n (acos(x) - alpha) with x = cos(alpha) sech(beta);
    # the sine of that difference reduces to the form below without cancellation.
    sech = 1.0 / np.cosh(beta)
    x = np.cos(alpha) * sech
    gap = np.cos(alpha) * np.tanh(beta) ** 2 / (np.sqrt(1.0 - x * x) + np.sin(alpha) * sech)
    value = 2.0 * safe * np.arcsin(gap)
    value = np.where(n_arr <= 2.0, 0.0, value)
    return float(value) if value.ndim == 0 else value


def half_side(n: float, theta: float) -> float:
    """Leg on the polygon side of the apothem right triangle (angles pi/2, pi/n, theta/2)."""
    return side_opposite(0.5 * math.pi, 0.5 * theta, math.pi / n)


def circumradius(n: float, theta: float) -> float:
    spec = RegularSpec(n, theta)
    spec.check_range()
    a, b = spec.alpha, 0.5 * theta
    # cosh R = cot(pi/n) cot(theta/2)
    return acosh1p(math.cos(a + b) / (math.sin(a) * math.sin(b)))


def realize_regular(n: Union[int, float], theta: float, rotation: float = 0.0) -> Polygon:
    if float(n) != int(n) or int(n) < 3:
        raise DomainError(f"realize_regular needs an integer n >= 3, got {n!r}")
    n = int(n)
    spec = RegularSpec(n, theta)
    if theta >= spec.max_theta:
        raise DomainError(f"angle {theta!r} leaves no hyperbolic {n}-gon")
    r = math.tanh(0.5 * circumradius(n, theta))
    step = 2.0 * math.pi / n
    return Polygon(
        tuple(HPoint(r * math.cos(rotation + j * step), r * math.sin(rotation + j * step)) for j in range(n)),
        ccw=True,
    )


def convex_hull(points: Iterable[HPoint], tol: float = EPS_GEOM) -> Polygon:
    """Hyperbolic convex hull via a monotone-chain hull of the Klein images."""
    pts: List[HPoint] = []
    kleins: List[Tuple[float, float]] = []
    for p in points:
        k = to_klein(p)
        if any(math.hypot(k[0] - q[0], k[1] - q[1]) <= tol for q in kleins):
            continue
        pts.append(p)
        kleins.append(k)
    if len(pts) < 3:
        raise DegenerateHullError(f"hull of {len(pts)} distinct point(s) is not a polygon", witness=pts)

    order = sorted(range(len(pts)), key=lambda i: kleins[i])

    def chain(indices: Iterable[int]) -> List[int]:
        out: List[int] = []
        for i in indices:
            while len(out) >= 2 and _cross(kleins[out[-2]], kleins[out[-1]], kleins[i]) <= tol:
                out.pop()
            out.append(i)
        return out

    lower = chain(order)
    upper = chain(reversed(order))
    hull = lower[:-1] + upper[:-1]
    if len(hull) < 3:
        witness = [pts[order[0]], pts[order[-1]]]
        raise DegenerateHullError("points lie on one geodesic", witness=witness)
    return Polygon(tuple(pts[i] for i in hull), ccw=True)


def reduce_equivalent(p: Polygon, eps_angle: float = EPS_ANGLE) -> Polygon:
    """Drop vertices whose interior angle is pi (they only split a geodesic side)."""
    verts = list(p.vertices)
    changed = False
    while len(verts) > 3:
        poly = Polygon(tuple(verts), p.ccw)
        flat = [i for i, theta in enumerate(poly.interior_angles()) if abs(theta - math.pi) < eps_angle]
        if not flat:
            break
        del verts[flat[0]]
        changed = True
    return Polygon(tuple(verts), p.ccw) if changed else p


def _cyclic_match(a: Sequence[float], b: Sequence[float], tol: float) -> bool:
    n = len(a)
    for shift in range(n):
        if all(abs(a[i] - b[(i + shift) % n]) <= tol for i in range(n)):
            return True
    return False


def equivalent(p: Polygon, q: Polygon, tol: float = 1e-8) -> bool:
    """Congruence after removing all angle-pi vertices (mirror images included)."""
    rp, rq = reduce_equivalent(p), reduce_equivalent(q)
    if rp.n != rq.n:
        return False
    n = rp.n

    # side i followed by the angle at its head, so one cyclic match covers both
    def signature(poly: Polygon, reverse: bool) -> List[float]:
        sides, angles = poly.side_lengths(), poly.interior_angles()
        if reverse:
            sides = [sides[(-i - 1) % n] for i in range(n)]
            angles = [angles[(-i) % n] for i in range(n)]
        seq: List[float] = []
        for i in range(n):
            seq.extend([sides[i], angles[(i + 1) % n]])
        return seq

    target = signature(rp, False)
    for reverse in (False, True):
        cand = signature(rq, reverse)
        for shift in range(n):
            rotated = cand[2 * shift:] + cand[: 2 * shift]
            if all(abs(x - y) <= tol for x, y in zip(target, rotated)):
                return True
    return False


def _scaled_array(z: np.ndarray, s: float, c: complex) -> np.ndarray:
    w = (z - c) / (1.0 - np.conj(c) * z)
    r = np.abs(w)
    safe = np.where(r > 0.0, r, 1.0)
    u = np.where(r > 0.0, np.tanh(s * np.arctanh(r)) / safe, 0.0) * w
    return (u + c) / (1.0 + np.conj(c) * u)


def scale_from_center(p: Polygon, s: float, center: HPoint) -> Polygon:
    return Polygon(tuple(geodesic_point(center, v, s) for v in p.vertices), p.ccw)


def rescale_to_area(p: Polygon, target: float, center: Optional[HPoint] = None, xtol: float = 1e-14) -> Polygon:
    """Move every vertex along its geodesic from ``center`` until the area equals ``target``.

    The polygon must be star-shaped about ``center`` (default: the hyperbolic centroid).
    """
    if not 0.0 < target < (p.n - 2) * math.pi:
        raise DomainError(f"target area {target!r} outside (0, (n-2)pi)")
    center = center or hyperbolic_centroid(p.vertices)
    z = np.array([v.z for v in p.vertices])
    if not p.ccw:
        z = z[::-1]
    c = center.z

    def excess(s: float) -> float:
        return area_array(_scaled_array(z, s, c)) - target

    lo, hi = 1.0, 1.0
    while excess(lo) > 0.0:
        lo *= 0.5
        if lo < 1e-12:
            raise DomainError("could not bracket the target area from below")
    while excess(hi) < 0.0:
        hi *= 1.5
        if np.max(np.abs(_scaled_array(z, hi, c))) > 1.0 - 1e-12:
            raise DomainError("target area needs vertices at the ideal boundary")
    s = brentq(excess, lo, hi, xtol=xtol, rtol=4.0 * np.finfo(float).eps)
    return scale_from_center(p, s, center)


# vectorized helpers for the optimizer; z is a complex array of disk coordinates
def perimeter_array(z: np.ndarray) -> float:
    zn = np.roll(z, -1)
    ratio = np.abs(z - zn) / np.abs(1.0 - np.conj(z) * zn)
    return float(np.sum(2.0 * np.arctanh(np.minimum(ratio, 1.0 - 2.0**-53))))


def angles_array(z: np.ndarray) -> np.ndarray:
    zn = np.roll(z, -1)
    zp = np.roll(z, 1)
    tn = (zn - z) / (1.0 - np.conj(z) * zn)
    tp = (zp - z) / (1.0 - np.conj(z) * zp)
    return np.mod(np.angle(tp / tn), 2.0 * np.pi)


def area_array(z: np.ndarray) -> float:
    return float((len(z) - 2) * np.pi - np.sum(angles_array(z)))


__all__ = [
    "KSpec",
    "Polygon",
    "RegularSpec",
    "a_k",
    "angle_from_perimeter",
    "angles_array",
    "area_array",
    "area_fixed_perimeter",
    "area_gauss_bonnet",
    "circumradius",
    "convex_hull",
    "equivalent",
    "half_side",
    "heron_area",
    "is_convex",
    "is_regular",
    "klein_signed_area",
    "p_k",
    "perimeter",
    "perimeter_array",
    "realize_regular",
    "reduce_equivalent",
    "regular_area",
    "regular_perimeter",
    "regular_perimeter_for_area",
    "rescale_to_area",
    "scale_from_center",
    "side_opposite",
    "theta_for_area",
]
