import copy
import math
import time

import numpy as np
import pytest
import sympy as sp

import isoperimetry
from hyperbolic_core import HPoint
from hypertile_utils import DomainError, InvalidPolygonError, dumps_json
from isoperimetry import (
    CHECKS,
    OptimizationResult,
    TriangleFamily,
    _crossings,
    _failed_restart,
    _objective,
    _restart,
    _settled,
    _to_tangent,
    build_sextic_check,
    exact_sign,
    isosceles_scan,
    min_perimeter_polygon,
    optimizer_grid,
    perimeter_ratio_scan,
    run_suite,
    sextic_check,
    sextic_from_squaring,
    verify_concavity,
    verify_concavity_reduction,
    verify_doubling,
    verify_fewer_sides,
    verify_isosceles,
    verify_optimizer,
    verify_perimeter_increasing_in_area,
    verify_regular_monotone,
)
from polygons import Polygon, a_k, is_regular, p_k, perimeter, realize_regular, side_opposite, theta_for_area

# ---------------------------------------------------------------------------
# Isosceles optimality
# ---------------------------------------------------------------------------


def test_triangle_family_derivative_matches_finite_difference():
    family = TriangleFamily(z=1.0, c=1.5)
    for x in (1.1, 1.3, 1.7, 1.9):
        h = 1e-6
        numeric = (family.F(x + h) - family.F(x - h)) / (2.0 * h)
        assert family.F_prime(x) == pytest.approx(numeric, rel=1e-6)
    assert family.F_prime(1.5) == 0.0
    assert family.feasible_interval() == (1.0, 2.0)
    with pytest.raises(DomainError):
        TriangleFamily(z=3.0, c=1.5)


def test_isosceles_scan_peaks_at_equal_sides():
    scan = isosceles_scan(1.0, 4.0)
    assert scan.c == pytest.approx(1.5)
    assert scan.offset <= scan.spacing
    assert scan.increasing_left and scan.decreasing_right
    with pytest.raises(DomainError):
        isosceles_scan(2.0, 4.0)


def test_verify_isosceles_random_pairs():
    report = verify_isosceles(pairs=6, grid=20_000, seed=3)
    assert report.passed
    assert len(report.table) == 6
    assert report.min_slack >= 0.0


# ---------------------------------------------------------------------------
# Closed-form scans
# ---------------------------------------------------------------------------


def test_regular_monotone_counts_comparisons():
    report = verify_regular_monotone(math.pi / 3.0, 50)
    assert report.passed
    assert report.details["comparisons"] == 47
    big = verify_regular_monotone(2.0 * math.pi, 50)
    assert big.passed
    assert big.grid["n_min"] == 5


def test_fewer_sides_and_perimeter_in_area():
    report = verify_fewer_sides(7)
    assert report.passed
    assert report.table["n"].tolist() == [3, 4, 5, 6]
    assert report.details["P_k"] == pytest.approx(p_k(7))
    assert verify_perimeter_increasing_in_area(7).passed


@pytest.mark.parametrize("k", [7, 20, 66])
def test_concavity_at_fixed_perimeter(k):
    report = verify_concavity(p_k(k), 2.0, 200.0, 0.25)
    assert report.passed
    assert report.details["continuity_at_2"] < 1e-5
    assert report.table["n"].iloc[-1] == pytest.approx(200.0)


def test_concavity_rejects_grid_below_two():
    with pytest.raises(DomainError):
        verify_concavity(4.0, 1.0, 10.0, 0.5)
    with pytest.raises(DomainError):
        verify_concavity(4.0, 5.0, 3.0, 0.5)


@pytest.mark.parametrize("k", [6.01, 7, 12, 66, 200])
def test_doubling_has_positive_slack(k):
    report = verify_doubling(k, n_hi=400.0, step=0.25)
    assert report.passed
    assert report.details["base_slack"] > 0.0


def test_doubling_slack_vanishes_toward_six():
    near = verify_doubling(6.001, n_hi=50.0).details["base_slack"]
    farther = verify_doubling(6.01, n_hi=50.0).details["base_slack"]
    assert 0.0 < near < farther < 1e-2
    with pytest.raises(DomainError):
        verify_doubling(6.0)


def test_perimeter_ratio_decreasing():
    report = perimeter_ratio_scan(6.01, 100.0, 0.05)
    assert report.passed
    assert report.details["identity_residual"] < 1e-10
    assert report.details["ratio_at_lo"] > 5.0 * p_k(7) / (math.pi / 3.0)


def test_concavity_reduction_grid():
    report = verify_concavity_reduction()
    assert report.passed
    assert report.min_slack > 0.0


# ---------------------------------------------------------------------------
# Sextic certificate
# ---------------------------------------------------------------------------


def test_sextic_derivatives_are_exact():
    check = build_sextic_check()
    assert check.derivatives == ["6*sqrt(3)", "384", "2554*sqrt(3)", "31872", "69120*sqrt(3)", "184320"]
    assert check.value_at_root == "0"
    assert check.derivatives_match and check.squaring_matches and check.no_root_certified
    assert sextic_from_squaring()


def test_sextic_report():
    report = sextic_check()
    assert report.passed
    assert report.min_slack == pytest.approx(6.0 * math.sqrt(3.0))
    assert "derivative_floats" not in report.details
    assert '"384"' in dumps_json(report.to_dict())


@pytest.mark.parametrize(
    "a, b, sign",
    [(2, -1, 1), (1, -1, -1), (-2, 1, -1), (-1, 1, 1), (0, 0, 0), (0, 5, 1), (-3, 0, -1)],
)
def test_exact_sign(a, b, sign):
    assert exact_sign(sp.Rational(a), sp.Rational(b)) == sign


# ---------------------------------------------------------------------------
# Optimizer
# ---------------------------------------------------------------------------


def test_crossings_count_bowtie_sides():
    square = np.array([0.3 + 0.3j, -0.3 + 0.3j, -0.3 - 0.3j, 0.3 - 0.3j])
    bowtie = square[[0, 1, 3, 2]]
    assert _crossings(square) == 0
    assert _crossings(bowtie) == 1
    assert _objective(_to_tangent(bowtie), 0.5, 1e2) == math.inf


def test_restart_that_ends_on_a_bad_polygon_is_discarded(monkeypatch):
    def broken(polygon, target, center=None):
        raise InvalidPolygonError("polygon boundary is not simple")

    start = realize_regular(4, theta_for_area(4, 1.0))
    monkeypatch.setattr(isoperimetry, "rescale_to_area", broken)
    result = _restart(4, 1.0, 0, 0, 1e-5, initial=start)
    assert not result.converged
    assert result.perimeter == math.inf
    assert result.polygon is start


def test_failed_restarts_never_win(monkeypatch):
    good = OptimizationResult(realize_regular(4, 1.0), 2.0, 1.0, 10, True, 1, 1.0)
    calls = []

    def fake_restart(n, area, seed, index, tol_opt, initial=None):
        calls.append(index)
        if index == 0:
            return _failed_restart(good.polygon, area, 0)
        return copy.deepcopy(good)

    monkeypatch.setattr(isoperimetry, "_restart", fake_restart)
    result = min_perimeter_polygon(4, 1.0, restarts=8, n_jobs=1)
    assert result.perimeter == 2.0
    assert result.converged
    # batch of two settles only after the second converged restart
    assert calls == [0, 1, 2, 3]
    assert result.restarts_used == 4


def test_all_failed_restarts_report_no_convergence(monkeypatch, caplog):
    start = realize_regular(4, 1.0)
    monkeypatch.setattr(isoperimetry, "_restart", lambda n, area, *args, **kw: _failed_restart(start, area, 0))
    result = min_perimeter_polygon(4, 1.0, restarts=3, n_jobs=1)
    assert not result.converged
    assert result.perimeter == math.inf
    assert result.restarts_used == 3
    assert "did not converge" in caplog.text


def test_settled_needs_two_agreeing_converged_restarts():
    poly = realize_regular(4, 1.0)
    a = OptimizationResult(poly, 2.0, 1.0, 1, True, 1)
    b = OptimizationResult(poly, 2.0 + 1e-7, 1.0, 1, True, 1)
    c = OptimizationResult(poly, 2.0 + 1e-7, 1.0, 1, False, 1)
    assert _settled([a, b], 1e-5)
    assert not _settled([a, c], 1e-5)
    assert not _settled([a, OptimizationResult(poly, 2.1, 1.0, 1, True, 1)], 1e-5)


def test_optimizer_grid_adds_matched_areas():
    cells = optimizer_grid((3, 6, 7, 8), (0.3, 4.0))
    assert (3, 4.0) not in cells
    assert (6, 4.0) in cells
    assert (7, a_k(7)) in cells and (8, a_k(8)) in cells
    assert all(n > 6 or area in (0.3, 4.0) for n, area in cells)
    assert len(optimizer_grid(range(3, 13), (0.3, 1.0))) == 26
    assert len(optimizer_grid(range(3, 13), (0.3, 1.0), match_k=False)) == 20


def test_optimizer_rejects_infeasible_area():
    with pytest.raises(DomainError):
        min_perimeter_polygon(7, 20.0)
    with pytest.raises(DomainError):
        min_perimeter_polygon(2, 0.1)


def test_optimizer_is_deterministic_for_a_seed():
    first = min_perimeter_polygon(4, 1.0, seed=5, restarts=2)
    second = min_perimeter_polygon(4, 1.0, seed=5, restarts=2)
    assert first.perimeter == second.perimeter
    assert first.polygon == second.polygon
    assert dumps_json(first.to_dict()) == dumps_json(second.to_dict())


def test_optimizer_triangle_beats_237_triangle():
    target = math.pi / 42.0
    t1, t2, t3 = math.pi / 2.0, math.pi / 3.0, math.pi / 7.0
    sides_237 = [side_opposite(t2, t3, t1), side_opposite(t1, t3, t2), side_opposite(t1, t2, t3)]
    result = min_perimeter_polygon(3, target, seed=0, restarts=4)
    assert result.area == pytest.approx(target, abs=1e-8)
    assert result.perimeter < sum(sides_237)
    assert is_regular(result.polygon, tol=1e-3)


@pytest.mark.slow
def test_optimizer_recovers_regular_heptagon():
    result = min_perimeter_polygon(7, math.pi / 3.0, seed=1)
    assert result.converged
    assert abs(result.gap) < 1e-5
    assert perimeter(result.polygon) == pytest.approx(p_k(7), abs=1e-5)


@pytest.mark.slow
def test_verify_optimizer_small_grid():
    report = verify_optimizer(ns=(3, 4), areas=(0.3,), seed=2)
    assert report.passed
    assert np.all(report.table["converged"])


@pytest.mark.slow
def test_optimizer_hexagon_small_area_regression():
    result = min_perimeter_polygon(6, 0.3, seed=0)
    assert math.isfinite(result.perimeter)
    assert result.converged
    assert abs(result.gap) < 1e-5


@pytest.mark.slow
def test_optimizer_from_perturbed_regular_heptagon():
    rng = np.random.default_rng(4)
    regular = realize_regular(7, 2.0 * math.pi / 3.0)
    nudged = Polygon(
        tuple(HPoint(v.x + dx, v.y + dy) for v, (dx, dy) in zip(regular.vertices, rng.normal(0.0, 0.01, (7, 2)))),
        ccw=True,
    )
    result = min_perimeter_polygon(7, math.pi / 3.0, restarts=1, initial=nudged)
    assert result.restarts_used == 1
    assert result.converged
    assert result.perimeter == pytest.approx(p_k(7), abs=1e-5)
    assert result.radius_spread < 1e-4


@pytest.mark.slow
def test_verify_optimizer_default_grid_within_two_minutes():
    started = time.perf_counter()
    report = verify_optimizer()
    elapsed = time.perf_counter() - started
    assert report.passed
    assert len(report.table) == 26
    assert set(report.table["n"]) == set(range(3, 13))
    assert elapsed < 120.0


# ---------------------------------------------------------------------------
# Suite
# ---------------------------------------------------------------------------


def test_run_suite_orders_by_name(caplog):
    caplog.set_level("INFO")
    reports = run_suite(["sextic", "concavity_reduction", "fewer_sides"])
    assert [r.check for r in reports] == ["concavity_reduction", "fewer_sides", "sextic"]
    assert all(r.passed for r in reports)
    assert "check sextic passed=True" in caplog.text


def test_run_suite_param_override_and_unknown_name():
    (report,) = run_suite(["regular_monotone"], {"regular_monotone": {"area": 2.0 * math.pi}})
    assert report.grid["area"] == pytest.approx(2.0 * math.pi)
    with pytest.raises(DomainError):
        run_suite(["no_such_check"])
    assert "sextic" in CHECKS
