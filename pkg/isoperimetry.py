"""Numerical optimization and verification of the polygon isoperimetric inequalities.

Every ``verify_*`` function returns an :class:`AuditReport`; a failed check is a
report with ``passed=False``, never an exception. Scan tables are pandas frames
so ``verify --table-dir`` can persist them.
"""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
import sympy as sp
from joblib import Parallel, delayed
from scipy.optimize import minimize

from hyperbolic_core import HPoint, Isometry, dist, hyperbolic_centroid
from hypertile_utils import (
    DEFAULT_RESTARTS,
    DEFAULT_SEED,
    N_JOBS,
    TOL_AREA,
    TOL_OPT,
    AuditReport,
    DomainError,
    HypertileError,
)
from polygons import (
    Polygon,
    a_k,
    angles_array,
    area_array,
    area_fixed_perimeter,
    heron_area,
    p_k,
    perimeter_array,
    realize_regular,
    regular_perimeter_for_area,
    rescale_to_area,
    theta_for_area,
)

LOGGER = logging.getLogger(f"hypertile.{__name__}")

PENALTY_SCHEDULE = (1e2, 1e4, 1e6, 1e8)
CONVEXITY_WEIGHT = 1e4
RESTART_BATCH = 2


# ---------------------------------------------------------------------------
# Isosceles optimality
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TriangleFamily:
    """Triangles with base z and the other two sides x and 2c - x."""

    z: float
    c: float

    def __post_init__(self) -> None:
        if self.z <= 0.0:
            raise DomainError("base length must be positive")
        if not self.z < 2.0 * self.c:
            raise DomainError(f"base {self.z!r} must be shorter than x + y = {2.0 * self.c!r}")

    @property
    def m(self) -> float:
        return math.cosh(self.z)

    def F(self, x: float) -> float:
        y = 2.0 * self.c - x
        return 2.0 * self.m * math.cosh(x) * math.cosh(y) - math.cosh(x) ** 2 - math.cosh(y) ** 2

    def F_prime(self, x: float) -> float:
        return 4.0 * (math.cosh(2.0 * self.c) - self.m) * math.sinh(self.c - x) * math.cosh(self.c - x)

    def feasible_interval(self) -> Tuple[float, float]:
        return self.c - 0.5 * self.z, self.c + 0.5 * self.z


@dataclass
class IsoscelesScan:
    x_star: float
    c: float
    spacing: float
    area_star: float
    increasing_left: bool
    decreasing_right: bool

    @property
    def offset(self) -> float:
        return abs(self.x_star - self.c)


def isosceles_scan(z: float, perim: float, grid: int = 100_000) -> IsoscelesScan:
    """Grid maximizer of the triangle area over the side split x + y = perim - z."""
    if z <= 0.0 or perim <= 2.0 * z:
        raise DomainError(f"infeasible base: need 0 < 2z < perimeter, got z={z!r}, perimeter={perim!r}")
    if grid < 3:
        raise DomainError("grid needs at least 3 points")
    family = TriangleFamily(z, 0.5 * (perim - z))
    lo, hi = family.feasible_interval()
    xs = np.linspace(lo, hi, grid + 2)[1:-1]
    areas = heron_area(xs, 2.0 * family.c - xs, np.full_like(xs, z))
    best = int(np.argmax(areas))
    spacing = float(xs[1] - xs[0])
    steps = np.diff(areas)
    mids = 0.5 * (xs[:-1] + xs[1:])
    return IsoscelesScan(
        x_star=float(xs[best]),
        c=family.c,
        spacing=spacing,
        area_star=float(areas[best]),
        increasing_left=bool(np.all(steps[mids < family.c - spacing] > 0.0)),
        decreasing_right=bool(np.all(steps[mids > family.c + spacing] < 0.0)),
    )


def verify_isosceles(pairs: int = 20, grid: int = 100_000, seed: Optional[int] = None) -> AuditReport:
    rng = np.random.default_rng(DEFAULT_SEED if seed is None else seed)
    rows = []
    for _ in range(pairs):
        z = float(rng.uniform(0.05, 3.0))
        perim = 2.0 * z + float(rng.uniform(0.05, 6.0))
        scan = isosceles_scan(z, perim, grid)
        rows.append(
            {
                "z": z,
                "perimeter": perim,
                "c": scan.c,
                "x_star": scan.x_star,
                "offset_in_spacings": scan.offset / scan.spacing,
                "unimodal": scan.increasing_left and scan.decreasing_right,
            }
        )
    table = pd.DataFrame(rows)
    slack = 2.0 - table["offset_in_spacings"]
    ok = (slack >= 0.0) & table["unimodal"]
    return AuditReport(
        check="isosceles",
        passed=bool(ok.all()),
        min_slack=float(slack.min()),
        witness=None if ok.all() else table.loc[~ok].iloc[0][["z", "perimeter"]].to_dict(),
        grid={"pairs": pairs, "points": grid},
        table=table,
    )


# ---------------------------------------------------------------------------
# Regular optimality by direct minimization
# ---------------------------------------------------------------------------


@dataclass
class OptimizationResult:
    polygon: Polygon
    perimeter: float
    area: float
    iterations: int
    converged: bool
    restarts_used: int
    target_area: float = float("nan")
    radius_spread: float = float("nan")
    benchmark: float = float("nan")

    @property
    def gap(self) -> float:
        return self.perimeter - self.benchmark

    def to_dict(self) -> dict:
        payload = asdict(self)
        payload["polygon"] = self.polygon.to_dict()
        payload["gap"] = self.gap
        return payload


def _to_disk(w: np.ndarray) -> np.ndarray:
    """Exponential map at the origin: tangent vector (u, v) -> disk point at distance |(u, v)|."""
    pts = w.reshape(-1, 2)
    r = np.hypot(pts[:, 0], pts[:, 1])
    scale = np.where(r > 0.0, np.tanh(0.5 * r) / np.where(r > 0.0, r, 1.0), 0.5)
    return (pts[:, 0] + 1j * pts[:, 1]) * scale


def _to_tangent(z: np.ndarray) -> np.ndarray:
    r = np.abs(z)
    scale = np.where(r > 0.0, 2.0 * np.arctanh(r) / np.where(r > 0.0, r, 1.0), 2.0)
    w = z * scale
    return np.column_stack([w.real, w.imag]).ravel()


def _crossings(z: np.ndarray) -> int:
    """Proper crossings between non-adjacent sides, counted on Klein chords."""
    k = 2.0 * z / (1.0 + np.abs(z) ** 2)
    a, b = k, np.roll(k, -1)
    i, j = np.triu_indices(len(k), 2)
    keep = (j - i) != len(k) - 1
    i, j = i[keep], j[keep]

    def orient(p, q, r):
        return (np.conj(q - p) * (r - p)).imag

    d1, d2 = orient(a[i], b[i], a[j]), orient(a[i], b[i], b[j])
    d3, d4 = orient(a[j], b[j], a[i]), orient(a[j], b[j], b[i])
    return int(np.count_nonzero((d1 * d2 < 0.0) & (d3 * d4 < 0.0)))


def _objective(w: np.ndarray, target: float, weight: float) -> float:
    z = _to_disk(w)
    if np.any(np.abs(z) >= 1.0 - 1e-12) or _crossings(z):
        return float("inf")
    angles = angles_array(z)
    area = (len(z) - 2) * np.pi - float(np.sum(angles))
    reflex = np.maximum(angles - np.pi, 0.0)
    return perimeter_array(z) + weight * (area - target) ** 2 + CONVEXITY_WEIGHT * weight * float(np.sum(reflex * reflex))


def _seed_polygon(n: int, area: float, rng: np.random.Generator, index: int) -> Polygon:
    if index % 2 == 0:
        base = realize_regular(n, theta_for_area(n, area), rotation=float(rng.uniform(0.0, 2.0 * math.pi)))
        r = abs(base.vertices[0].z)
        jitter = 0.15
        phis = 2.0 * math.pi * np.arange(n) / n + rng.uniform(-jitter, jitter, n) * math.pi / n
        radii = r * (1.0 + rng.uniform(-jitter, jitter, n))
    else:
        # random star-shaped seed; every angular gap stays below pi
        phis = 2.0 * math.pi * (np.arange(n) + rng.uniform(-0.2, 0.2, n)) / n
        radii = rng.uniform(0.2, 0.6, n)
    raw = Polygon(tuple(HPoint(float(rr * math.cos(p)), float(rr * math.sin(p))) for rr, p in zip(radii, phis)))
    seeded = rescale_to_area(raw, area, center=HPoint(0.0, 0.0))
    return seeded.transformed(Isometry.random(rng, max_radius=0.3)) if index > 0 else seeded


def _failed_restart(start: Polygon, area: float, iterations: int) -> OptimizationResult:
    return OptimizationResult(start, float("inf"), float("nan"), iterations, False, 1, area)


def _restart(
    n: int,
    area: float,
    seed: int,
    index: int,
    tol_opt: float,
    initial: Optional[Polygon] = None,
) -> OptimizationResult:
    rng = np.random.default_rng([seed, index])
    start = initial if initial is not None else _seed_polygon(n, area, rng, index)
    w = _to_tangent(np.array([v.z for v in start.vertices]))
    iterations = 0
    converged = True
    for stage, weight in enumerate(PENALTY_SCHEDULE):
        final = stage == len(PENALTY_SCHEDULE) - 1
        options = {"xatol": 1e-10, "fatol": 1e-13} if final else {"xatol": 1e-7, "fatol": 1e-10}
        res = minimize(
            _objective,
            w,
            args=(area, weight),
            method="Nelder-Mead",
            options={**options, "maxiter": 4000 * n, "maxfev": 8000 * n, "adaptive": True},
        )
        w = res.x
        iterations += int(res.nit)
        converged = converged and bool(res.success) and math.isfinite(float(res.fun))
        if final:
            simplex = res.final_simplex[0]
            converged = converged and float(np.max(np.linalg.norm(simplex - simplex[0], axis=1))) < tol_opt
    z = _to_disk(w)
    try:
        polygon = rescale_to_area(Polygon(tuple(HPoint.from_complex(complex(v)) for v in z), ccw=True), area)
        center = hyperbolic_centroid(polygon.vertices)
        radii = [dist(center, v) for v in polygon.vertices]
        achieved = polygon.area()
    except HypertileError as exc:
        LOGGER.warning("restart %s: discarded (%s)", index, exc)
        return _failed_restart(start, area, iterations)
    return OptimizationResult(
        polygon=polygon,
        perimeter=polygon.perimeter(),
        area=achieved,
        iterations=iterations,
        converged=converged,
        restarts_used=1,
        target_area=area,
        radius_spread=max(radii) - min(radii),
    )


def _settled(results: Sequence[OptimizationResult], tol_opt: float) -> bool:
    """Two converged restarts agree on the least perimeter."""
    perims = sorted(r.perimeter for r in results if r.converged)
    return len(perims) >= 2 and perims[1] - perims[0] < tol_opt


def min_perimeter_polygon(
    n: int,
    area: float,
    seed: Optional[int] = None,
    restarts: int = DEFAULT_RESTARTS,
    tol_opt: float = TOL_OPT,
    tol_area: float = TOL_AREA,
    n_jobs: int = N_JOBS,
    initial: Optional[Polygon] = None,
) -> OptimizationResult:
    """Least-perimeter n-gon of the given area by penalized Nelder-Mead with seeded restarts.

    Restarts run in fixed batches of ``RESTART_BATCH`` and stop early once two
    converged restarts agree; batch boundaries do not depend on ``n_jobs``.
    A restart that ends on an invalid polygon is reported with infinite
    perimeter and never selected over a valid one.
    """
    if float(n) != int(n) or int(n) < 3:
        raise DomainError(f"n must be an integer >= 3, got {n!r}")
    n = int(n)
    if not 0.0 < area < (n - 2) * math.pi:
        raise DomainError(f"area {area!r} outside (0, (n-2)pi) = (0, {(n - 2) * math.pi!r})")
    if restarts < 1:
        raise DomainError("restarts must be positive")
    seed = DEFAULT_SEED if seed is None else int(seed)

    results: List[OptimizationResult] = []
    for lo in range(0, restarts, RESTART_BATCH):
        batch = range(lo, min(lo + RESTART_BATCH, restarts))
        results += Parallel(n_jobs=n_jobs)(
            delayed(_restart)(n, area, seed, i, tol_opt, initial if i == 0 else None) for i in batch
        )
        if _settled(results, tol_opt):
            break
    # first index wins ties
    best = min(range(len(results)), key=lambda i: (results[i].perimeter, i))
    result = results[best]
    result.restarts_used = len(results)
    result.benchmark = regular_perimeter_for_area(n, area)
    if not math.isfinite(result.perimeter) or abs(result.area - area) >= tol_area:
        result.converged = False
    if not result.converged:
        LOGGER.warning("n=%s area=%s: optimizer did not converge after %s restarts", n, area, len(results))
    LOGGER.info(
        "n=%s area=%s perimeter=%.12f benchmark=%.12f spread=%.3e restarts=%s",
        n,
        area,
        result.perimeter,
        result.benchmark,
        result.radius_spread,
        len(results),
    )
    return result


def optimizer_grid(
    ns: Sequence[int], areas: Sequence[float], match_k: bool = True
) -> List[Tuple[int, float]]:
    """Feasible (n, area) cells; ``match_k`` adds A_n for every n > 6."""
    cells = []
    for n in ns:
        cells += [(n, float(a)) for a in areas if 0.0 < a < (n - 2) * math.pi]
        if match_k and n > 6:
            cells.append((n, a_k(n)))
    return cells


def verify_optimizer(
    ns: Sequence[int] = tuple(range(3, 13)),
    areas: Sequence[float] = (0.3, 1.0),
    match_k: bool = True,
    seed: Optional[int] = None,
    restarts: int = DEFAULT_RESTARTS,
    tol_opt: float = TOL_OPT,
) -> AuditReport:
    rows = []
    for n, area in optimizer_grid(ns, areas, match_k):
        res = min_perimeter_polygon(n, area, seed=seed, restarts=restarts, tol_opt=tol_opt)
        rows.append(
            {
                "n": n,
                "area": area,
                "perimeter": res.perimeter,
                "benchmark": res.benchmark,
                "gap": res.gap,
                "radius_spread": res.radius_spread,
                "converged": res.converged,
                "restarts_used": res.restarts_used,
            }
        )
    table = pd.DataFrame(rows)
    # negative gaps fail too
    ok = table["converged"] & (table["gap"].abs() < tol_opt) & (table["radius_spread"] < 10.0 * tol_opt)
    return AuditReport(
        check="optimizer",
        passed=bool(ok.all()),
        min_slack=float((tol_opt - table["gap"].abs()).min()),
        witness=None if ok.all() else table.loc[~ok].iloc[0][["n", "area"]].to_dict(),
        grid={"ns": list(ns), "areas": list(areas), "match_k": match_k, "restarts": restarts},
        table=table,
    )


# ---------------------------------------------------------------------------
# Closed-form scans
# ---------------------------------------------------------------------------


def _inclusive_grid(lo: float, hi: float, step: float) -> np.ndarray:
    if not lo < hi or step <= 0.0:
        raise DomainError(f"grid needs lo < hi and step > 0, got {lo!r}:{hi!r}:{step!r}")
    count = int(math.floor((hi - lo) / step + 1e-9))
    grid = lo + step * np.arange(count + 1)
    if hi - grid[-1] > 1e-9 * step:
        grid = np.append(grid, hi)
    return grid


def _first_failure(table: pd.DataFrame, ok: pd.Series, column: str):
    failing = table.loc[~ok, column]
    return None if failing.empty else float(failing.iloc[0])


def verify_regular_monotone(area: float, n_max: int = 50) -> AuditReport:
    """Perimeter of the regular n-gon of fixed area decreases with n."""
    if area <= 0.0:
        raise DomainError("area must be positive")
    ns = [n for n in range(3, int(n_max) + 1) if area < (n - 2) * math.pi]
    table = pd.DataFrame({"n": ns, "perimeter": [regular_perimeter_for_area(n, area) for n in ns]})
    table["slack"] = table["perimeter"] - table["perimeter"].shift(-1)
    compared = table.dropna(subset=["slack"])
    ok = compared["slack"] > 0.0
    return AuditReport(
        check="regular_monotone",
        passed=bool(ok.all()),
        min_slack=float(compared["slack"].min()) if len(compared) else float("inf"),
        witness=_first_failure(compared, ok, "n"),
        grid={"area": area, "n_min": ns[0] if ns else None, "n_max": int(n_max)},
        details={"comparisons": int(len(compared))},
        table=table,
    )


def verify_fewer_sides(k: float, n_min: int = 3) -> AuditReport:
    """R_k has smaller perimeter than every regular n-gon of area A_k with n < k."""
    target = a_k(k)
    benchmark = p_k(k)
    ns = [n for n in range(int(n_min), int(math.ceil(k))) if n < k and target < (n - 2) * math.pi]
    table = pd.DataFrame({"n": ns, "perimeter": [regular_perimeter_for_area(n, target) for n in ns]})
    table["slack"] = table["perimeter"] - benchmark
    ok = table["slack"] > 0.0
    return AuditReport(
        check="fewer_sides",
        passed=bool(ok.all()),
        min_slack=float(table["slack"].min()) if len(table) else float("inf"),
        witness=_first_failure(table, ok, "n"),
        grid={"k": k, "n_min": int(n_min)},
        details={"P_k": benchmark, "A_k": target},
        table=table,
    )


def verify_perimeter_increasing_in_area(n: int, grid: int = 200) -> AuditReport:
    upper = (n - 2) * math.pi
    areas = np.linspace(0.0, upper, grid + 2)[1:-1]
    table = pd.DataFrame({"area": areas, "perimeter": [regular_perimeter_for_area(n, a) for a in areas]})
    table["slack"] = table["perimeter"].diff()
    compared = table.dropna(subset=["slack"])
    ok = compared["slack"] > 0.0
    return AuditReport(
        check="perimeter_in_area",
        passed=bool(ok.all()),
        min_slack=float(compared["slack"].min()),
        witness=_first_failure(compared, ok, "area"),
        grid={"n": n, "points": grid},
        table=table,
    )


def verify_concavity(P: float, n_lo: float = 2.0, n_hi: float = 200.0, step: float = 0.25) -> AuditReport:
    """A(n) at fixed perimeter P is strictly increasing and strictly concave on the grid.

    The closed form is certified on grid points only; there is no symbolic replay
    of the derivative argument (the tan(pi/n), tanh(P/2n) substitution).
    """
    if P <= 0.0:
        raise DomainError("perimeter must be positive")
    if n_lo < 2.0:
        raise DomainError("concavity is claimed on [2, inf) only")
    ns = _inclusive_grid(n_lo, n_hi, step)
    table = pd.DataFrame({"n": ns, "area": area_fixed_perimeter(ns, P)})
    table["first_diff"] = table["area"].diff()
    table["second_diff"] = table["area"].shift(-1) - 2.0 * table["area"] + table["area"].shift(1)
    first = table["first_diff"].dropna()
    second = table["second_diff"].dropna()
    ok_first = first > 0.0
    ok_second = second < 0.0
    witness = None
    if not ok_first.all():
        witness = float(table.loc[first.index[~ok_first][0], "n"])
    elif not ok_second.all():
        witness = float(table.loc[second.index[~ok_second][0], "n"])
    near_two = area_fixed_perimeter(np.array([2.0 - 1e-6, 2.0 + 1e-6]), P)
    continuity = float(np.max(np.abs(near_two)))
    passed = bool(ok_first.all() and ok_second.all()) and continuity < 1e-5
    return AuditReport(
        check="concavity",
        passed=passed,
        min_slack=float(min(first.min(), (-second).min())),
        witness=witness,
        grid={"P": P, "lo": float(n_lo), "hi": float(n_hi), "step": step},
        details={"continuity_at_2": continuity},
        table=table,
    )


def verify_doubling(k: float, n_hi: float = 400.0, step: float = 0.25) -> AuditReport:
    """A(k) < 2A(k/2) and A(n) < 2A(n/2) on [k, n_hi], all at perimeter P_k."""
    if not k > 6.0:
        raise DomainError(f"doubling needs k > 6, got {k!r}")
    P = p_k(k)
    ns = _inclusive_grid(k, max(n_hi, k + step), step)
    areas = area_fixed_perimeter(ns, P)
    halves = area_fixed_perimeter(ns / 2.0, P)
    a_k_value = float(area_fixed_perimeter(k, P))
    a_half_k = float(area_fixed_perimeter(k / 2.0, P))
    table = pd.DataFrame({"n": ns, "area": areas, "half_area": halves})
    table["doubling_slack"] = 2.0 * table["half_area"] - table["area"]
    # A(n) = A(k) + (A(n) - A(k)) combined with the doubling bound
    table["patch_slack"] = a_k_value + 2.0 * (table["half_area"] - a_half_k) - table["area"]
    patch = table.loc[table["n"] > k, "patch_slack"]
    ok = table["doubling_slack"] > 0.0
    ok_patch = patch > 0.0
    base_slack = 2.0 * a_half_k - a_k_value
    passed = bool(ok.all() and ok_patch.all()) and base_slack > 0.0
    witness = _first_failure(table, ok, "n")
    if witness is None and not ok_patch.all():
        witness = float(table.loc[patch.index[~ok_patch][0], "n"])
    slacks = [base_slack, float(table["doubling_slack"].min())]
    if len(patch):
        slacks.append(float(patch.min()))
    return AuditReport(
        check="doubling",
        passed=passed,
        min_slack=min(slacks),
        witness=witness,
        grid={"k": k, "hi": float(ns[-1]), "step": step},
        details={"base_slack": base_slack, "P_k": P, "gamma": math.cos(math.pi / k)},
        table=table,
    )


def _acosh1p_array(u: np.ndarray) -> np.ndarray:
    return np.log1p(u + np.sqrt(u * (u + 2.0)))


def perimeter_ratio_scan(k_lo: float = 6.01, k_hi: float = 100.0, step: float = 0.05) -> AuditReport:
    """P_k / A_k strictly decreases in k; also checks the x = pi/6 - pi/k substitute form."""
    if not 6.0 < k_lo < k_hi:
        raise DomainError("ratio scan needs 6 < k_lo < k_hi")
    ks = _inclusive_grid(k_lo, k_hi, step)
    sin60 = math.sin(math.pi / 3.0)
    # cos(pi/k) - cos(pi/6) as a product of sines keeps k near 6 accurate
    u = 2.0 * np.sin(0.5 * (np.pi / ks + np.pi / 6.0)) * np.sin(0.5 * (np.pi / 6.0 - np.pi / ks)) / sin60
    perimeters = 2.0 * ks * _acosh1p_array(u)
    areas = (ks - 6.0) * np.pi / 3.0
    x = np.pi / 6.0 - np.pi / ks
    substitute = x / _acosh1p_array(u)
    table = pd.DataFrame({"k": ks, "P_k": perimeters, "A_k": areas, "ratio": perimeters / areas, "x": x})
    table["substitute"] = substitute
    table["slack"] = table["ratio"] - table["ratio"].shift(-1)
    table["substitute_step"] = table["substitute"].diff()
    compared = table.dropna(subset=["slack"])
    ok = compared["slack"] > 0.0
    ok_sub = table["substitute_step"].dropna() > 0.0
    identity = float(np.max(np.abs(areas / perimeters - substitute) / np.abs(substitute)))
    return AuditReport(
        check="perimeter_ratio",
        passed=bool(ok.all() and ok_sub.all()) and identity < 1e-10,
        min_slack=float(compared["slack"].min()),
        witness=_first_failure(compared, ok, "k"),
        grid={"lo": k_lo, "hi": k_hi, "step": step},
        details={"identity_residual": identity, "ratio_at_lo": float(table["ratio"].iloc[0])},
        table=table,
    )


def verify_concavity_reduction(alpha_steps: int = 200, c_steps: int = 200) -> AuditReport:
    """Grid check of c + alpha/cos(alpha) (1 - c) > sin(alpha)/(1 + sin(alpha))."""
    alpha = np.linspace(0.0, 0.5 * np.pi, alpha_steps + 2)[1:-1]
    c = np.linspace(0.0, 1.0, c_steps + 2)[1:-1]
    A, C = np.meshgrid(alpha, c, indexing="ij")
    slack = C + A / np.cos(A) * (1.0 - C) - np.sin(A) / (1.0 + np.sin(A))
    idx = np.unravel_index(int(np.argmin(slack)), slack.shape)
    passed = bool(np.all(slack > 0.0))
    return AuditReport(
        check="concavity_reduction",
        passed=passed,
        min_slack=float(slack[idx]),
        witness=None if passed else {"alpha": float(A[idx]), "c": float(C[idx])},
        grid={"alpha_steps": alpha_steps, "c_steps": c_steps},
    )


# ---------------------------------------------------------------------------
# Exact sextic certificate over Q(sqrt 3)
# ---------------------------------------------------------------------------

GAMMA = sp.Symbol("gamma")
# stands for sqrt(3); expressions are reduced modulo R3**2 - 3
R3 = sp.Symbol("r3")

SEXTIC = (
    256 * GAMMA**6
    - 192 * R3 * GAMMA**5
    - 112 * GAMMA**4
    + 168 * R3 * GAMMA**3
    - 60 * GAMMA**2
    - 36 * R3 * GAMMA
    + 27
)
EXPECTED_DERIVATIVES: Tuple[Tuple[int, int], ...] = (
    (0, 6),
    (384, 0),
    (0, 2554),
    (31872, 0),
    (0, 69120),
    (184320, 0),
)


def _reduce(expr: sp.Expr) -> Tuple[sp.Rational, sp.Rational]:
    """Write an expression in r3 alone as a + b*sqrt(3) with rational a, b."""
    rem = sp.expand(sp.rem(sp.expand(expr), R3**2 - 3, R3))
    return sp.Rational(rem.coeff(R3, 0)), sp.Rational(rem.coeff(R3, 1))


def exact_sign(a: sp.Rational, b: sp.Rational) -> int:
    """Sign of a + b*sqrt(3) with no floating point."""
    if a >= 0 and b >= 0:
        return 0 if a == 0 and b == 0 else 1
    if a <= 0 and b <= 0:
        return -1
    diff = a * a - 3 * b * b
    if diff == 0:
        return 0
    if a > 0:
        return 1 if diff > 0 else -1
    return 1 if diff < 0 else -1


def _format(a: sp.Rational, b: sp.Rational) -> str:
    return str(sp.sympify(a) + sp.sympify(b) * sp.sqrt(3))


def sextic_from_squaring() -> bool:
    """Square away the sqrt(1 - gamma^2) term and compare with the stated sextic."""
    inner = sp.Rational(8, 3) * GAMMA**2 - 1
    lhs = 2 * (2 * GAMMA**2 - 1) - R3 * GAMMA * inner
    derived = 9 * (lhs**2 - inner**2 * (1 - GAMMA**2))
    diff = sp.expand(sp.rem(sp.expand(derived - SEXTIC), R3**2 - 3, R3))
    return diff == 0


@dataclass
class SexticCheck:
    coefficients: List[str]
    derivatives: List[str]
    value_at_root: str
    value_at_one: str
    derivatives_match: bool
    squaring_matches: bool
    no_root_certified: bool
    derivative_floats: List[float] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.derivatives_match and self.squaring_matches and self.no_root_certified


def build_sextic_check() -> SexticCheck:
    root = R3 / 2
    poly = sp.Poly(SEXTIC, GAMMA)
    coefficients = [_format(*_reduce(c)) for c in poly.all_coeffs()]
    value = _reduce(SEXTIC.subs(GAMMA, root))
    derivatives = [_reduce(sp.diff(SEXTIC, GAMMA, j).subs(GAMMA, root)) for j in range(1, 7)]
    expected = [(sp.Rational(a), sp.Rational(b)) for a, b in EXPECTED_DERIVATIVES]
    at_one = _reduce(SEXTIC.subs(GAMMA, 1))
    # p(root + t) = sum_j p^(j)(root) t^j / j!, so a zero value and positive
    # derivatives leave no root to the right of root
    positive = all(exact_sign(a, b) > 0 for a, b in derivatives)
    return SexticCheck(
        coefficients=coefficients,
        derivatives=[_format(a, b) for a, b in derivatives],
        value_at_root=_format(*value),
        value_at_one=_format(*at_one),
        derivatives_match=derivatives == expected,
        squaring_matches=sextic_from_squaring(),
        no_root_certified=value == (0, 0) and positive and exact_sign(*at_one) > 0,
        derivative_floats=[float(a) + float(b) * math.sqrt(3.0) for a, b in derivatives],
    )


def sextic_check() -> AuditReport:
    result = build_sextic_check()
    details = asdict(result)
    details.pop("derivative_floats")
    return AuditReport(
        check="sextic",
        passed=result.passed,
        min_slack=min(result.derivative_floats),
        witness=None,
        grid={"gamma": "sqrt(3)/2", "interval": ["sqrt(3)/2", "1"]},
        details=details,
    )


# ---------------------------------------------------------------------------
# Suite
# ---------------------------------------------------------------------------

CHECKS: Dict[str, Callable[..., AuditReport]] = {
    "sextic": sextic_check,
    "regular_monotone": verify_regular_monotone,
    "fewer_sides": verify_fewer_sides,
    "perimeter_in_area": verify_perimeter_increasing_in_area,
    "concavity": verify_concavity,
    "concavity_reduction": verify_concavity_reduction,
    "doubling": verify_doubling,
    "perimeter_ratio": perimeter_ratio_scan,
    "isosceles": verify_isosceles,
    "optimizer": verify_optimizer,
}

DEFAULT_PARAMS: Dict[str, dict] = {
    "sextic": {},
    "regular_monotone": {"area": math.pi / 3.0, "n_max": 50},
    "fewer_sides": {"k": 7},
    "perimeter_in_area": {"n": 7},
    "concavity": {"P": p_k(7), "n_lo": 2.0, "n_hi": 200.0, "step": 0.25},
    "concavity_reduction": {},
    "doubling": {"k": 7, "n_hi": 400.0, "step": 0.25},
    "perimeter_ratio": {"k_lo": 6.01, "k_hi": 100.0, "step": 0.05},
    "isosceles": {"pairs": 20, "grid": 100_000},
    "optimizer": {"ns": tuple(range(3, 13)), "areas": (0.3, 1.0), "match_k": True},
}


def _run_check(name: str, params: dict) -> AuditReport:
    report = CHECKS[name](**params)
    log = LOGGER.info if report.passed else LOGGER.warning
    log("check %s passed=%s min_slack=%.3e", name, report.passed, report.min_slack)
    return report


def run_suite(
    names: Optional[Iterable[str]] = None,
    params: Optional[Dict[str, dict]] = None,
    n_jobs: int = N_JOBS,
) -> List[AuditReport]:
    """Run the named checks (all by default) and return reports in name order."""
    selected = sorted(set(names) if names is not None else CHECKS)
    unknown = [name for name in selected if name not in CHECKS]
    if unknown:
        raise DomainError(f"unknown check(s): {', '.join(unknown)}")
    merged = {name: {**DEFAULT_PARAMS[name], **(params or {}).get(name, {})} for name in selected}
    return Parallel(n_jobs=n_jobs)(delayed(_run_check)(name, merged[name]) for name in selected)


__all__ = [
    "CHECKS",
    "DEFAULT_PARAMS",
    "IsoscelesScan",
    "OptimizationResult",
    "SEXTIC",
    "SexticCheck",
    "TriangleFamily",
    "build_sextic_check",
    "exact_sign",
    "isosceles_scan",
    "min_perimeter_polygon",
    "optimizer_grid",
    "perimeter_ratio_scan",
    "run_suite",
    "sextic_check",
    "sextic_from_squaring",
    "verify_concavity",
    "verify_concavity_reduction",
    "verify_doubling",
    "verify_fewer_sides",
    "verify_isosceles",
    "verify_optimizer",
    "verify_perimeter_increasing_in_area",
    "verify_regular_monotone",
]
