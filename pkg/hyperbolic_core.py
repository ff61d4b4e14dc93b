"""Points, distances, angles and isometries of the hyperbolic plane.

Points live in the Poincare disk (curvature -1). The Klein model is used
transiently wherever convexity or chord geometry is needed, the hyperboloid
model for cross-checks and barycenters.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Tuple

import numpy as np

from hypertile_utils import EPS_GEOM, DomainError

TWO_PI = 2.0 * math.pi


def acosh1p(u: float) -> float:
    """acosh(1 + u) without the cancellation of forming 1 + u first."""
    if u < 0.0:
        if u > -EPS_GEOM:
            return 0.0
        raise DomainError(f"acosh argument below 1 (offset {u!r})")
    return math.log1p(u + math.sqrt(u * (u + 2.0)))


@dataclass(frozen=True)
class HPoint:
    x: float
    y: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise DomainError(f"non-finite disk coordinates ({self.x}, {self.y})")
        if self.x * self.x + self.y * self.y >= 1.0:
            raise DomainError(f"point ({self.x}, {self.y}) is not inside the unit disk")

    @classmethod
    def from_complex(cls, z: complex) -> "HPoint":
        return cls(float(z.real), float(z.imag))

    @property
    def z(self) -> complex:
        return complex(self.x, self.y)

    @property
    def norm2(self) -> float:
        return self.x * self.x + self.y * self.y

    def as_tuple(self) -> Tuple[float, float]:
        return (self.x, self.y)


ORIGIN = HPoint(0.0, 0.0)


def to_klein(p: HPoint) -> Tuple[float, float]:
    s = 2.0 / (1.0 + p.norm2)
    return (s * p.x, s * p.y)


def from_klein(k: Sequence[float]) -> HPoint:
    kx, ky = float(k[0]), float(k[1])
    r2 = kx * kx + ky * ky
    if r2 >= 1.0:
        raise DomainError(f"Klein point ({kx}, {ky}) is not inside the unit disk")
    # 1/(1 + sqrt(1 - r2)) written to stay accurate near the origin
    s = 1.0 / (1.0 + math.sqrt(1.0 - r2))
    return HPoint(s * kx, s * ky)


def to_hyperboloid(p: HPoint) -> np.ndarray:
    r2 = p.norm2
    d = 1.0 - r2
    return np.array([2.0 * p.x / d, 2.0 * p.y / d, (1.0 + r2) / d])


def from_hyperboloid(X: Sequence[float]) -> HPoint:
    x1, x2, x0 = float(X[0]), float(X[1]), float(X[2])
    return HPoint(x1 / (1.0 + x0), x2 / (1.0 + x0))


def minkowski(X: np.ndarray, Y: np.ndarray) -> float:
    return float(X[0] * Y[0] + X[1] * Y[1] - X[2] * Y[2])


def dist(p: HPoint, q: HPoint) -> float:
    num = abs(p.z - q.z)
    if num == 0.0:
        return 0.0
    den = abs(1.0 - p.z.conjugate() * q.z)
    return 2.0 * math.atanh(min(num / den, 1.0 - 2.0**-53))


def klein_dist(a: Sequence[float], b: Sequence[float]) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    num = 1.0 - float(a @ b)
    den = math.sqrt((1.0 - float(a @ a)) * (1.0 - float(b @ b)))
    return math.acosh(max(num / den, 1.0))


def hyperboloid_dist(p: HPoint, q: HPoint) -> float:
    return math.acosh(max(-minkowski(to_hyperboloid(p), to_hyperboloid(q)), 1.0))


def _to_origin(v: complex, w: complex) -> complex:
    return (w - v) / (1.0 - v.conjugate() * w)


def angle_at(v: HPoint, a: HPoint, b: HPoint) -> float:
    """Counterclockwise angle from the geodesic ray v->a to the ray v->b."""
    ta = _to_origin(v.z, a.z)
    tb = _to_origin(v.z, b.z)
    if abs(ta) < EPS_GEOM or abs(tb) < EPS_GEOM:
        raise DomainError("angle_at needs a and b distinct from the vertex")
    theta = cmath.phase(tb / ta)
    if theta < 0.0:
        theta += TWO_PI
    return theta if theta < TWO_PI else 0.0


def geodesic_point(p: HPoint, q: HPoint, t: float) -> HPoint:
    """Point at fraction ``t`` of the hyperbolic length along the segment p->q."""
    w = _to_origin(p.z, q.z)
    r = abs(w)
    if r == 0.0:
        return p
    s = math.tanh(t * math.atanh(r)) / r
    u = s * w
    # back from the origin-centered frame
    return HPoint.from_complex((u + p.z) / (1.0 + p.z.conjugate() * u))


def midpoint(p: HPoint, q: HPoint) -> HPoint:
    return geodesic_point(p, q, 0.5)


def geodesic_circle(p: HPoint, q: HPoint) -> Optional[Tuple[Tuple[float, float], float]]:
    """Center and radius of the circle orthogonal to the boundary through p and q.

    Returns None when the geodesic is a diameter.
    """
    det = p.x * q.y - p.y * q.x
    scale = max(abs(p.z), abs(q.z), 1e-300) * abs(p.z - q.z)
    if abs(det) <= 1e-12 * max(scale, 1e-12):
        return None
    rp = (p.norm2 + 1.0) / 2.0
    rq = (q.norm2 + 1.0) / 2.0
    cx = (rp * q.y - rq * p.y) / det
    cy = (p.x * rq - q.x * rp) / det
    radius = math.sqrt(max(cx * cx + cy * cy - 1.0, 0.0))
    return (cx, cy), radius


def _orient(a: Sequence[float], b: Sequence[float], c: Sequence[float]) -> float:
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])


@dataclass(frozen=True)
class GeodesicSegment:
    a: HPoint
    b: HPoint

    @property
    def length(self) -> float:
        return dist(self.a, self.b)

    def klein_chord(self) -> Tuple[Tuple[float, float], Tuple[float, float]]:
        return to_klein(self.a), to_klein(self.b)

    def point(self, t: float) -> HPoint:
        return geodesic_point(self.a, self.b, t)

    def polyline(self, pieces: int) -> list:
        return [self.point(i / pieces) for i in range(pieces + 1)]

    def intersects(self, other: "GeodesicSegment", tol: float = EPS_GEOM) -> bool:
        """Proper crossing of the two chords (shared endpoints do not count)."""
        p1, p2 = self.klein_chord()
        q1, q2 = other.klein_chord()
        d1 = _orient(q1, q2, p1)
        d2 = _orient(q1, q2, p2)
        d3 = _orient(p1, p2, q1)
        d4 = _orient(p1, p2, q2)
        return ((d1 > tol and d2 < -tol) or (d1 < -tol and d2 > tol)) and (
            (d3 > tol and d4 < -tol) or (d3 < -tol and d4 > tol)
        )


@dataclass(frozen=True)
class Isometry:
    """z -> (a w + b) / (conj(b) w + conj(a)) with w = conj(z) when ``reflect``."""

    a: complex = 1.0 + 0.0j
    b: complex = 0.0j
    reflect: bool = False

    @classmethod
    def identity(cls) -> "Isometry":
        return cls()

    @classmethod
    def rotation(cls, phi: float) -> "Isometry":
        return cls(cmath.exp(0.5j * phi), 0.0j)

    @classmethod
    def translation(cls, p: HPoint) -> "Isometry":
        """Hyperbolic translation sending the origin to ``p``."""
        s = 1.0 / math.sqrt(1.0 - p.norm2)
        return cls(complex(s, 0.0), s * p.z)

    @classmethod
    def reflection_in_diameter(cls, phi: float) -> "Isometry":
        return cls(cmath.exp(0.5j * 2.0 * phi), 0.0j, True)

    @classmethod
    def reflection_across(cls, p: HPoint, q: HPoint) -> "Isometry":
        """Reflection in the full geodesic through p and q."""
        if dist(p, q) < EPS_GEOM:
            raise DomainError("reflection needs two distinct points")
        move = cls.translation(p).inverse()
        w = move.apply_complex(q.z)
        frame = cls.rotation(-cmath.phase(w)).compose(move)
        return frame.inverse().compose(cls(1.0 + 0.0j, 0.0j, True)).compose(frame)

    @classmethod
    def random(cls, rng: np.random.Generator, max_radius: float = 0.8) -> "Isometry":
        r = max_radius * math.sqrt(float(rng.uniform()))
        phi = float(rng.uniform(0.0, 2.0 * math.pi))
        target = HPoint(r * math.cos(phi), r * math.sin(phi))
        g = cls.translation(target).compose(cls.rotation(float(rng.uniform(0.0, 2.0 * math.pi))))
        if rng.uniform() < 0.5:
            g = g.compose(cls.reflection_in_diameter(float(rng.uniform(0.0, math.pi))))
        return g

    def _normalized(self) -> "Isometry":
        det = abs(self.a) ** 2 - abs(self.b) ** 2
        s = 1.0 / math.sqrt(det)
        return Isometry(self.a * s, self.b * s, self.reflect)

    def compose(self, other: "Isometry") -> "Isometry":
        """self after other."""
        a2, b2 = (other.a.conjugate(), other.b.conjugate()) if self.reflect else (other.a, other.b)
        a = self.a * a2 + self.b * b2.conjugate()
        b = self.a * b2 + self.b * a2.conjugate()
        return Isometry(a, b, self.reflect != other.reflect)._normalized()

    def inverse(self) -> "Isometry":
        if self.reflect:
            return Isometry(self.a, -self.b.conjugate(), True)
        return Isometry(self.a.conjugate(), -self.b, False)

    def apply_complex(self, z: complex) -> complex:
        w = z.conjugate() if self.reflect else z
        return (self.a * w + self.b) / (self.b.conjugate() * w + self.a.conjugate())

    def __call__(self, p: HPoint) -> HPoint:
        return apply(self, p)

    def almost_equal(self, other: "Isometry", tol: float = EPS_GEOM) -> bool:
        if self.reflect != other.reflect:
            return False
        # (a, b) and (-a, -b) act identically
        same = abs(self.a - other.a) + abs(self.b - other.b)
        flipped = abs(self.a + other.a) + abs(self.b + other.b)
        return min(same, flipped) <= tol


def apply(g: Isometry, p: HPoint) -> HPoint:
    return HPoint.from_complex(g.apply_complex(p.z))


def hyperbolic_centroid(points: Iterable[HPoint]) -> HPoint:
    """Hyperboloid barycenter projected back onto the sheet."""
    total = np.sum([to_hyperboloid(p) for p in points], axis=0)
    norm = math.sqrt(-minkowski(total, total))
    return from_hyperboloid(total / norm)


__all__ = [
    "GeodesicSegment",
    "HPoint",
    "Isometry",
    "ORIGIN",
    "acosh1p",
    "angle_at",
    "apply",
    "dist",
    "from_hyperboloid",
    "from_klein",
    "geodesic_circle",
    "geodesic_point",
    "hyperbolic_centroid",
    "hyperboloid_dist",
    "klein_dist",
    "midpoint",
    "to_hyperboloid",
    "to_klein",
]
