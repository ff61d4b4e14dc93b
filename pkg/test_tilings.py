import copy
import json
import math
import re

import numpy as np
import pytest

import tiling_fixtures
from hyperbolic_core import HPoint, midpoint
from hypertile_utils import DomainError, PrecisionError, TilingStructureError
from polygons import (
    Polygon,
    a_k,
    angle_from_perimeter,
    area_fixed_perimeter,
    area_gauss_bonnet,
    convex_hull,
    equivalent,
    p_k,
    realize_regular,
)
from render_svg import DISK_RADIUS, disk_to_svg, edge_command, render_tiling, write_svg
from tiling_fixtures import (
    FIXTURE_DIR,
    FIXTURES,
    _mul,
    _power,
    contract_edge,
    generate_patch,
    genus2_octagon_fixture,
    hurwitz_generators,
    klein_quartic_fixture,
    load_fixture,
    perturb_face_area,
    psl27,
)
from tilings import (
    Edge,
    Face,
    TilingGraph,
    Vertex,
    concave_angle_audit,
    concave_tiling_audit,
    degree_audit,
    degree_bound_contributions,
    dump_tiling,
    euler_audit,
    euler_characteristic,
    euler_contributions,
    flatten_polygon,
    flatten_vertex,
    gauss_bonnet_audit,
    hull_cover_audit,
    inequality_chain,
    load_tiling,
    monohedral_audit,
    run_audits,
    total_perimeter_compare,
    total_perimeter_links,
    validate_audit,
    vertex_angle_sums,
)

TWO_THIRDS_PI = 2.0 * math.pi / 3.0


@pytest.fixture(scope="module")
def klein():
    return klein_quartic_fixture()


# ---------------------------------------------------------------------------
# Klein quartic
# ---------------------------------------------------------------------------


def test_psl27_generators():
    elements = psl27()
    assert len(elements) == 168
    x, y = hurwitz_generators(elements)
    identity = _power(x, 0)
    assert _power(x, 7) == identity and _power(x, 1) != identity
    assert _power(y, 3) == identity
    xy = _mul(x, y)
    assert _mul(xy, xy) == identity


def test_klein_quartic_counts(klein):
    assert (len(klein.faces), len(klein.edges), len(klein.vertices)) == (24, 84, 56)
    assert euler_characteristic(klein) == -4
    assert set(klein.degrees().values()) == {3}
    assert all(face.n == 7 for face in klein.faces.values())
    klein.validate()


def test_klein_quartic_passes_every_audit(klein):
    reports = run_audits(klein, ["all"])
    assert [r.check for r in reports] == [
        "validate",
        "euler",
        "gauss_bonnet",
        "degrees",
        "concave",
        "hull_cover",
        "monohedral",
    ]
    assert all(r.passed for r in reports)
    hull = reports[5]
    assert hull.details["verdict"] == "extremal"
    assert all(abs(v) < 1e-8 for v in hull.details["links"].values())
    degrees = reports[3]
    assert degrees.details["v_bar"] == pytest.approx(7.0)
    assert degrees.details["equality"] and degrees.details["degrees_two_or_three"]


def test_klein_quartic_total_perimeter_is_extremal(klein):
    report = total_perimeter_compare(klein, 7, 7)
    assert report.passed
    assert report.details["equality"] and report.details["certificate"]


def test_klein_quartic_dump_and_load(klein, tmp_path):
    path = dump_tiling(klein, tmp_path / "klein.json")
    loaded = load_tiling(path)
    assert len(loaded.faces) == 24
    assert euler_characteristic(loaded) == -4
    assert equivalent(loaded.faces[1].polygon, klein.faces[1].polygon)
    assert gauss_bonnet_audit(loaded).passed


# ---------------------------------------------------------------------------
# Fault injection
# ---------------------------------------------------------------------------


def failing_audits(t):
    return [r.check for r in run_audits(t, ["all"]) if not r.passed]


def test_contracted_edge_breaks_degree_equality(klein):
    t = contract_edge(klein, 1)
    t.validate()
    assert len(t.edges) == 83 and len(t.vertices) == 55
    assert euler_characteristic(t) == -4
    hexagons = [f for f in t.faces.values() if f.n == 6]
    assert len(hexagons) == 2
    for face in hexagons:
        assert face.polygon.n == 6
        assert area_gauss_bonnet(face.polygon) == pytest.approx(math.pi / 3.0, abs=1e-9)
    report = degree_audit(t, 7)
    assert not report.passed
    assert report.details["expects_equality"]
    assert not report.details["equality"]
    assert report.details["certificate"]
    assert report.witness == report.details["high_degree_vertices"][0]
    assert len(report.details["high_degree_vertices"]) == 1
    assert report.details["v_bar"] == pytest.approx(166.0 / 24.0)
    assert report.min_slack > 0.0


def test_contracted_edge_without_degree_claim_passes(klein):
    t = contract_edge(klein, 1)
    del t.meta["vertex_degree"]
    report = degree_audit(t, 7)
    assert report.passed
    assert not report.details["equality"] and not report.details["degrees_two_or_three"]


def test_contract_edge_rejects_loops_and_unknown_edges():
    with pytest.raises(DomainError):
        contract_edge(genus2_octagon_fixture(), 1)
    with pytest.raises(DomainError):
        contract_edge(klein_quartic_fixture(), 999)


@pytest.mark.parametrize(
    "name, failing",
    [
        ("klein-quartic", []),
        ("klein-quartic-contracted", ["degrees"]),
        ("klein-quartic-area", ["gauss_bonnet"]),
        ("klein-quartic-jittered", []),
    ],
)
def test_each_variant_fails_only_its_audit(name, failing):
    assert failing_audits(load_fixture(name)) == failing


def test_perturbed_area_fails_gauss_bonnet_only(klein):
    t = perturb_face_area(klein, 1, 0.1)
    report = gauss_bonnet_audit(t)
    assert not report.passed
    assert abs(report.details["residual"]) == pytest.approx(0.1, abs=1e-9)
    assert report.witness["face"] == 1
    assert report.details["face_residuals"][1] == pytest.approx(0.1, abs=1e-9)
    assert euler_audit(t).passed
    assert monohedral_audit(t, 7).passed


def test_jittered_faces_exceed_the_perimeter_bound():
    t = load_fixture("klein-quartic-jittered")
    for face in t.faces.values():
        assert area_gauss_bonnet(face.polygon) == pytest.approx(math.pi / 3.0, abs=1e-9)
    report = hull_cover_audit(t, 7)
    assert not report.hypothesis_holds
    assert report.links["hypothesis"] < 0.0
    assert report.perimeter == pytest.approx(max(report.perimeters))
    assert report.perimeter > p_k(7)
    audit = report.to_audit_report(7)
    assert audit.details["hypothesis_holds"] is False
    assert audit.min_slack >= -1e-8


@pytest.mark.parametrize("name", ["klein-quartic-jittered", "klein-quartic-contracted"])
def test_non_extremal_fixtures_are_strict(name):
    t = load_fixture(name)
    report = hull_cover_audit(t, 7)
    assert report.verdict == "strict"
    assert report.to_audit_report(7).passed
    assert report.links["final"] > 1e-8
    assert all(v >= -1e-8 for name, v in report.links.items() if name != "hypothesis")


def test_only_the_klein_quartic_chain_is_tight(klein):
    verdicts = {name: hull_cover_audit(load_fixture(name), 7).verdict for name in FIXTURES if name.startswith("klein")}
    assert [name for name, v in verdicts.items() if v == "extremal"] == ["klein-quartic", "klein-quartic-area"]
    octagon = hull_cover_audit(load_fixture("genus2-octagon"), 18)
    assert octagon.verdict == "strict"


def test_bad_degree_fixture_names_the_invariant():
    t = load_tiling(FIXTURE_DIR / "bad_degree_one.json")
    with pytest.raises(TilingStructureError) as exc:
        t.validate()
    assert exc.value.invariant == "degree"
    report = validate_audit(t)
    assert not report.passed
    assert report.witness["invariant"] == "degree"


def test_missing_face_breaks_two_slots(klein):
    t = copy.deepcopy(klein)
    del t.faces[1]
    with pytest.raises(TilingStructureError) as exc:
        t.validate()
    assert exc.value.invariant == "two-slots"


def test_disconnected_surfaces_are_rejected():
    edges = {1: Edge(1, (1, 1)), 2: Edge(2, (1, 1)), 3: Edge(3, (2, 2)), 4: Edge(4, (2, 2))}
    faces = {1: Face(1, [1, 2, -1, -2], area=1.0), 2: Face(2, [3, 4, -3, -4], area=1.0)}
    t = TilingGraph({1: Vertex(1), 2: Vertex(2)}, edges, faces, {"curvature": 0})
    with pytest.raises(TilingStructureError) as exc:
        t.validate()
    assert exc.value.invariant == "connected"


def test_wrong_lift_breaks_realization(klein):
    t = copy.deepcopy(klein)
    t.faces[3].polygon = realize_regular(6, 1.0)
    assert ("realization" in {inv for inv, _ in t.invariant_violations()})


def test_structure_and_schema_errors(tmp_path):
    t = TilingGraph({1: Vertex(1)}, {1: Edge(1, (1, 9))}, {1: Face(1, [1])})
    with pytest.raises(TilingStructureError) as exc:
        t.validate()
    assert exc.value.invariant == "structure"
    with pytest.raises(TilingStructureError) as exc:
        TilingGraph.from_dict({"vertices": [], "faces": []})
    assert exc.value.invariant == "schema"
    broken = tmp_path / "broken.json"
    broken.write_text("{not json", encoding="utf-8")
    with pytest.raises(TilingStructureError) as exc:
        load_tiling(broken)
    assert exc.value.invariant == "schema"


# ---------------------------------------------------------------------------
# Small closed surfaces
# ---------------------------------------------------------------------------


def test_genus2_octagon():
    t = load_fixture("genus2-octagon")
    assert (len(t.faces), len(t.edges), len(t.vertices)) == (1, 4, 1)
    assert euler_characteristic(t) == -2
    assert t.degrees() == {1: 8}
    assert equivalent(t.faces[1].polygon, genus2_octagon_fixture().faces[1].polygon)
    assert gauss_bonnet_audit(t).passed
    report = degree_audit(t, 18)
    assert report.passed
    assert report.details["v_bar"] == 8.0
    assert hull_cover_audit(t, 18).verdict == "strict"


def test_square_torus_is_flat():
    t = load_fixture("square-torus")
    assert euler_characteristic(t) == 0
    report = gauss_bonnet_audit(t)
    assert report.passed
    assert report.details["residual"] == 0.0
    with pytest.raises(DomainError):
        run_audits(t, ["degrees"])


def test_unknown_fixture_and_audit(klein):
    with pytest.raises(DomainError):
        load_fixture("no-such-fixture")
    with pytest.raises(DomainError):
        run_audits(klein, ["euler", "bogus"])
    with pytest.raises(DomainError):
        degree_audit(klein, 8)


# ---------------------------------------------------------------------------
# Disk patches
# ---------------------------------------------------------------------------


def test_patch_depth_zero_and_one():
    single = generate_patch(7, 0)
    assert (len(single.faces), len(single.edges), len(single.vertices)) == (1, 7, 7)
    patch = generate_patch(7, 1)
    assert len(patch.faces) == 8
    assert euler_characteristic(patch) == 1
    patch.validate()
    report = gauss_bonnet_audit(patch)
    assert report.passed
    assert report.details["surrounded_vertices"] == 7


def test_patch_rejects_bad_parameters():
    with pytest.raises(DomainError):
        generate_patch(6, 1)
    with pytest.raises(DomainError):
        generate_patch(7, -1)


def test_patch_precision_error_carries_depth(monkeypatch):
    monkeypatch.setattr(tiling_fixtures, "BOUNDARY_MARGIN", 0.5)
    with pytest.raises(PrecisionError) as exc:
        generate_patch(7, 2)
    assert exc.value.depth == 1


def test_depth_three_patch_interior_angle_sums():
    patch = generate_patch(7, 3)
    patch.validate()
    sums = vertex_angle_sums(patch)
    degrees = patch.degrees()
    assert len(sums) > 7
    assert all(degrees[vid] == 3 for vid in sums)
    assert max(abs(s - 2.0 * math.pi) for s in sums.values()) < 1e-8
    reference = patch.faces[1].polygon
    assert all(equivalent(f.polygon, reference) for f in patch.faces.values())


def test_patch_face_without_hull_witness():
    with pytest.raises(TilingStructureError) as exc:
        hull_cover_audit(generate_patch(7, 0), 7)
    assert exc.value.invariant == "hull-witness"


# ---------------------------------------------------------------------------
# Concave angles, flattening, the chain
# ---------------------------------------------------------------------------


def test_concave_angle_audit_counts_flat_corners():
    hept = realize_regular(7, TWO_THIRDS_PI)
    octagon = realize_regular(8, TWO_THIRDS_PI)
    assert not concave_angle_audit(octagon, 7).passed
    flat = hept.with_vertex(1, midpoint(hept.vertices[0], hept.vertices[1]))
    report = concave_angle_audit(flat, 7)
    assert report.passed
    assert report.details["l1"] == 1 and report.details["equality"]
    assert concave_angle_audit(hept, 7, [3] * 7).details["certificate"]


def test_flatten_vertex_regions():
    a, c = HPoint(-0.4, 0.0), HPoint(0.4, 0.0)
    straight = flatten_vertex(a, midpoint(a, c), c)
    assert straight.region is None and straight.region_area == 0.0
    bent = flatten_vertex(a, HPoint(0.0, 0.3), c)
    assert bent.region_area == pytest.approx(area_gauss_bonnet(bent.region), abs=1e-9)
    assert bent.segment.length < (bent.region.side_lengths()[0] + bent.region.side_lengths()[1])
    with pytest.raises(DomainError):
        flatten_vertex(a, a, c)


def test_flatten_polygon_bookkeeping():
    hept = realize_regular(7, TWO_THIRDS_PI)
    report = flatten_polygon(hept, keep=[0, 2, 4])
    assert report.polygon.n == 3
    assert sorted(report.removed) == [1, 3, 5, 6]
    assert report.perimeter_saving > 0.0
    assert area_gauss_bonnet(hept) + report.area_change == pytest.approx(area_gauss_bonnet(report.polygon), abs=1e-9)

    reflex = Polygon.from_coords([(-0.5, -0.4), (0.0, -0.1), (0.5, -0.4), (0.0, 0.5)])
    assert reflex.interior_angle(1) > math.pi
    report = flatten_polygon(reflex, keep=[0, 2, 3])
    assert report.area_change > 0.0
    assert area_gauss_bonnet(reflex) + report.area_change == pytest.approx(area_gauss_bonnet(report.polygon), abs=1e-9)


@pytest.mark.parametrize(
    "polygon",
    [
        realize_regular(7, TWO_THIRDS_PI),
        Polygon.from_coords([(-0.5, -0.4), (0.0, -0.1), (0.5, -0.4), (0.0, 0.5)]),
    ],
)
def test_flattened_polygon_and_region_contain_the_original(polygon):
    a, b, c = polygon.vertices[0], polygon.vertices[1], polygon.vertices[2]
    step = flatten_vertex(a, b, c)
    flat = flatten_polygon(polygon, keep=[i for i in range(polygon.n) if i != 1]).polygon
    rng = np.random.default_rng(11)
    samples = [HPoint(float(x), float(y)) for x, y in rng.uniform(-0.7, 0.7, (600, 2))]
    inside = [p for p in samples if polygon.contains(p)]
    assert len(inside) > 20
    assert all(flat.contains(p) or step.region.contains(p) for p in inside)
    assert area_gauss_bonnet(flat) + step.region_area >= area_gauss_bonnet(polygon) - 1e-9
    assert flat.perimeter() <= polygon.perimeter()


def test_chain_extremal_for_regular_hulls():
    chain = inequality_chain([7] * 24, [a_k(7)] * 24, 7, perimeters=[p_k(7)] * 24)
    assert chain.verdict == "extremal"
    assert chain.substitutions == []


def test_chain_pairs_small_hulls_with_largest_donor():
    chain = inequality_chain([1, 8, 9, 8], [0.0, 0.5, 0.5, 0.5], 7)
    assert chain.substitutions == [(0, 2)]
    assert chain.substituted_sides == [4.5, 8.0, 4.5, 8.0]
    assert chain.links["substitution"] > 0.0
    assert chain.links["jensen"] >= -1e-12


def test_chain_errors_and_hypothesis():
    with pytest.raises(DomainError):
        inequality_chain([7, 7], [1.0], 7)
    chain = inequality_chain([7], [a_k(7)], 7, perimeters=[p_k(7) + 0.1])
    assert not chain.hypothesis_holds
    assert chain.perimeter == pytest.approx(p_k(7) + 0.1)
    assert chain.links["hypothesis"] == pytest.approx(-0.1)
    assert chain.links["final"] > 0.0
    assert chain.verdict == "strict"
    held = inequality_chain([7], [a_k(7)], 7, perimeters=[p_k(7)])
    assert held.hypothesis_holds and held.perimeter == pytest.approx(p_k(7))


def test_chain_jensen_link_for_six_and_eight_sided_hulls():
    P = p_k(7)
    hulls = [convex_hull(realize_regular(n, angle_from_perimeter(n, P)).vertices) for n in (6, 8)]
    chain = inequality_chain([h.n for h in hulls], [area_gauss_bonnet(h) for h in hulls], 7, perimeters=[P, P])
    expected = 2.0 * area_fixed_perimeter(7, P) - area_fixed_perimeter(6, P) - area_fixed_perimeter(8, P)
    assert expected > 0.0
    assert chain.links["jensen"] == pytest.approx(expected, abs=1e-10)
    assert abs(chain.links["link1"]) < 1e-9
    assert chain.links["sides"] == pytest.approx(0.0, abs=1e-12)
    # two such tiles cannot cover 2 A_7
    assert chain.verdict == "violated:cover"


def test_degree_bound_shares_sum_to_chi(klein):
    chi = euler_characteristic(klein)
    assert math.fsum(degree_bound_contributions(klein).values()) == pytest.approx(chi, abs=1e-12)
    assert math.fsum(euler_contributions(klein).values()) == pytest.approx(chi, abs=1e-12)
    contracted = contract_edge(klein, 1)
    assert math.fsum(euler_contributions(contracted).values()) == pytest.approx(chi, abs=1e-12)
    assert math.fsum(degree_bound_contributions(contracted).values()) > chi + 0.1


def test_concave_tiling_audit_sums_over_faces(klein):
    report = concave_tiling_audit(klein, 7)
    assert report.passed and report.details["equality"] and report.details["certificate"]
    contracted = concave_tiling_audit(contract_edge(klein, 1), 7)
    assert contracted.passed
    assert contracted.min_slack == pytest.approx(2.0)
    assert not contracted.details["equality"]


def test_total_perimeter_links_strict_for_smaller_m():
    links = total_perimeter_links(8.0 * math.pi, p_k(7), 7, 6.5)
    assert links["tile"] > 0.0
    assert links["ratio"] > 0.0
    with pytest.raises(DomainError):
        total_perimeter_links(8.0 * math.pi, p_k(7), 7, 8)


# ---------------------------------------------------------------------------
# SVG
# ---------------------------------------------------------------------------


def test_svg_has_one_path_per_face(tmp_path):
    patch = generate_patch(7, 1)
    svg = render_tiling(patch)
    assert svg.count('class="face"') == 8
    assert svg.startswith('<?xml version="1.0"')
    path = write_svg(patch, tmp_path / "patch.svg")
    assert path.read_text(encoding="utf-8") == svg


def test_svg_endpoints_follow_the_disk_map():
    patch = generate_patch(7, 0)
    svg = render_tiling(patch)
    match = re.search(r'd="M ([-\d.]+) ([-\d.]+)', svg)
    x, y = float(match.group(1)), float(match.group(2))
    first = patch.faces[1].polygon.vertices[0]
    sx, sy = disk_to_svg(first)
    assert abs(x - sx) < 1e-6 and abs(y - sy) < 1e-6
    assert sx == pytest.approx(500.0 + DISK_RADIUS * first.x)


def test_edge_command_uses_lines_for_diameters():
    assert edge_command(HPoint(-0.5, 0.0), HPoint(0.5, 0.0)).startswith("L ")
    assert edge_command(HPoint(0.2, 0.5), HPoint(-0.4, 0.3)).startswith("A ")


def test_fixture_json_files_are_valid():
    for name in ("genus2_octagon.json", "square_torus.json"):
        payload = json.loads((FIXTURE_DIR / name).read_text(encoding="utf-8"))
        TilingGraph.from_dict(payload).validate()
