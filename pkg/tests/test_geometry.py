import json

import mpmath as mp
import pytest

from polynest.geometry import (GeometryError, Polytope, make_platonic,
                               make_polygon, polar_dual, hull_2d3d, inradius,
                               circumradius, contains, centrally_symmetric,
                               facet_vertices, to_off, validate,
                               build_from_recipe)
from polynest.exactfield import circumradius_exact, inradius_exact

COUNTS = {"T": (4, 4), "C": (8, 6), "O": (6, 8), "D": (20, 12), "I": (12, 20)}


@pytest.mark.parametrize("kind", sorted(COUNTS))
def test_solid_combinatorics(kind):
    P = make_platonic(kind, "1")
    assert (P.n_vertices, P.n_facets) == COUNTS[kind]
    validate(P)


@pytest.mark.parametrize("kind", sorted(COUNTS))
def test_solid_edge_length(kind):
    P = make_platonic(kind, "2.5", digits=60)
    with mp.workdps(70):
        vs = P.vertices_mp()
        d2min = min(sum((a - b) ** 2 for a, b in zip(u, v))
                    for i, u in enumerate(vs) for v in vs[i + 1:])
        assert abs(mp.sqrt(d2min) - mp.mpf("2.5")) < mp.mpf("1e-55")


@pytest.mark.parametrize("kind", ["T", "C", "O", "D", "I"])
def test_solid_radii_match_closed_forms(kind):
    P = make_platonic(kind, "1", digits=60)
    with mp.workdps(70):
        # R of I and r of D involve nested radicals, outside the field
        # helper; those two come from their classical surd forms instead
        if kind == "I":
            want_R = mp.sqrt(10 + 2 * mp.sqrt(5)) / 4
        else:
            want_R = circumradius_exact(kind).to_mp(70)
        if kind == "D":
            want_r = mp.sqrt((25 + 11 * mp.sqrt(5)) / 10) / 2
        else:
            want_r = inradius_exact(kind).to_mp(70)
        assert abs(circumradius(P) - want_R) < mp.mpf("1e-55")
        assert abs(inradius(P) - want_r) < mp.mpf("1e-55")


def test_polygon_geometry():
    P = make_polygon(6, "1")
    assert P.n_vertices == P.n_facets == 6
    with mp.workdps(60):
        assert abs(circumradius(P) - 1) < mp.mpf("1e-45")  # hexagon R = edge
        assert abs(inradius(P) - mp.sqrt(3) / 2) < mp.mpf("1e-45")
    validate(P)
    with pytest.raises(GeometryError):
        make_polygon(2, "1")


def test_polar_duality_swaps_cube_octahedron():
    C = make_platonic("C", "1")
    D = polar_dual(C)
    assert D.n_vertices == 6 and D.n_facets == 8
    # dual vertices sit along the cube's facet normals at 1/offset
    with mp.workdps(60):
        for v in D.vertices_mp():
            assert abs(max(abs(c) for c in v) - 2) < mp.mpf("1e-40")
    back = polar_dual(D)
    with mp.workdps(60):
        bv = sorted(tuple(x for x in v) for v in back.vertices_mp())
        cv = sorted(tuple(x for x in v) for v in C.vertices_mp())
        err = max(abs(a - b) for u, w in zip(bv, cv) for a, b in zip(u, w))
        assert err < mp.mpf("1e-40")


def test_at_precision_regenerates():
    P = make_platonic("I", "1", digits=40)
    Q = P.at_precision(220)
    assert Q.precision_digits == 220
    with mp.workdps(240):
        vs = Q.vertices_mp()
        d2 = min(sum((a - b) ** 2 for a, b in zip(vs[0], v)) for v in vs[1:])
        assert abs(mp.sqrt(d2) - 1) < mp.mpf("1e-210")


def test_json_round_trip():
    P = make_platonic("D", "1.25")
    text = P.to_json()
    Q = Polytope.from_json(text)
    assert Q == P
    doc = json.loads(text)
    assert set(doc) >= {"dim", "name", "vertices", "halfspaces",
                        "precision_digits"}
    assert all(set(h) == {"normal", "offset"} for h in doc["halfspaces"])


def test_recipe_round_trip():
    P = make_polygon(7, "0.5", digits=35)
    Q = build_from_recipe(P.recipe, 35)
    assert Q == P


def test_contains_and_symmetry():
    C = make_platonic("C", "2")
    assert contains(C, ["0", "0", "0"])
    assert contains(C, ["1", "1", "1"])
    assert not contains(C, ["1.000001", "0", "0"])
    assert centrally_symmetric(C)
    assert not centrally_symmetric(make_platonic("T", "1"))
    assert centrally_symmetric(make_polygon(6, "1"))
    assert not centrally_symmetric(make_polygon(5, "1"))


def test_hull_recovers_cube():
    pts = [[f"{x}.0", f"{y}.0", f"{z}.0"]
           for x in (-1, 1) for y in (-1, 1) for z in (-1, 1)]
    pts += [["0.5", "0.25", "0.0"], ["0.0", "0.0", "0.0"]]  # interior points
    H = hull_2d3d(pts, digits=30)
    assert H.n_vertices == 8
    assert H.n_facets == 6
    validate(H, tol="1e-25")


def test_facet_rings():
    D = make_platonic("D", "1")
    I = make_platonic("I", "1")
    assert all(len(facet_vertices(D, k)) == 5 for k in range(12))
    assert all(len(facet_vertices(I, k)) == 3 for k in range(20))


def test_off_export():
    D = make_platonic("D", "1")
    lines = to_off(D).strip().split("\n")
    assert lines[0] == "OFF"
    nv, nf, ne = map(int, lines[1].split())
    assert (nv, nf, ne) == (20, 12, 30)
    assert len(lines) == 2 + nv + nf
    with pytest.raises(GeometryError):
        to_off(make_polygon(5, "1"))


def test_geometry_batteries(battery):
    for name in ("geometry_polygons", "geometry_hulls"):
        assert battery[name]["failures"] == [], battery[name]["failures"]
