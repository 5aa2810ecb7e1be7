import math

import mpmath as mp
import pytest

from polynest.geometry import make_platonic, make_polygon
from polynest.qcp import (QcpError, QcpInstance, affine_basis, apply_symmetry,
                          build_basic, build_reduced, keplerian_bound)


def test_basic_counts():
    P = make_platonic("D", "1")
    Q = make_platonic("I", "1")
    inst = build_basic(P, Q)
    n, m, q = 20, 20, 3
    assert inst.form == "basic"
    assert inst.n_vars == 1 + n * q
    assert len(inst.linear_constraints) == n * m
    assert len(inst.quadratic_constraints) == math.comb(n, 2)
    assert inst.objective == "maximize s"
    assert inst.variables[0] == "s"
    assert inst.point_index(3, 2) == 1 + 3 * q + 2


def test_reduced_counts():
    P = make_platonic("D", "1")
    Q = make_platonic("I", "1")
    inst = build_reduced(P, Q)
    q = 3
    assert inst.form == "reduced"
    assert len(inst.basis) == q + 1
    assert inst.n_vars == 1 + (q + 1) * q
    assert len(inst.linear_constraints) == P.n_vertices * Q.n_facets
    assert len(inst.quadratic_constraints) == math.comb(q + 1, 2)
    assert len(inst.affine) == P.n_vertices


def test_affine_basis_spans():
    P = make_platonic("T", "1")
    basis, rows = affine_basis(P)
    assert len(basis) == 4 and len(rows) == 4
    with mp.workdps(60):
        vs = P.vertices_mp()
        for i, row in enumerate(rows):
            lam = [mp.mpf(c) for c in row]
            assert abs(mp.fsum(lam) - 1) < mp.mpf("1e-40")
            for j in range(3):
                got = mp.fsum(lam[l] * vs[basis[l]][j] for l in range(4))
                assert abs(got - vs[i][j]) < mp.mpf("1e-40")


def test_keplerian_cube_in_cube():
    C = make_platonic("C", "1", digits=50)
    with mp.workdps(60):
        # concentric shrink to the insphere: s = (r/R)^2 = 1/3 for a cube
        assert abs(keplerian_bound(C, C) - mp.mpf(1) / 3) < mp.mpf("1e-45")


def test_keplerian_placement_is_feasible():
    P = make_platonic("T", "1", digits=40)
    Q = make_platonic("C", "1", digits=40)
    inst = build_basic(P, Q)
    with mp.workdps(60):
        s = keplerian_bound(P, Q)
        sig = mp.sqrt(s)
        cp = P.centroid_mp()
        cq = Q.centroid_mp()
        pts = [[cq[j] + sig * (v[j] - cp[j]) for j in range(3)]
               for v in P.vertices_mp()]
        lin, quad = inst.residuals(s, pts)
        assert lin <= mp.mpf("1e-30")
        assert quad <= mp.mpf("1e-30")


def test_expand_reduced_matches_vertices():
    P = make_platonic("O", "1", digits=40)
    Q = make_platonic("C", "1", digits=40)
    inst = build_reduced(P, Q)
    with mp.workdps(60):
        vs = P.vertices_mp()
        base = [vs[i] for i in inst.basis]
        placed = inst.expand(base)
        err = max(abs(a - b) for u, w in zip(placed, vs) for a, b in zip(u, w))
        assert err < mp.mpf("1e-35")


def test_apply_symmetry_concentric():
    P = make_platonic("C", "1")
    Q = make_platonic("O", "1")
    inst = build_basic(P, Q)
    strong = apply_symmetry(inst, "concentric")
    assert len(strong.linear_constraints) == len(inst.linear_constraints) + 3
    assert all(lc.relation == "=="
               for lc in strong.linear_constraints[-3:])
    with pytest.raises(QcpError):
        apply_symmetry(build_basic(make_platonic("T", "1"), Q), "concentric")


def test_apply_symmetry_vertex_pinned():
    P = make_platonic("C", "1")
    Q = make_platonic("O", "1")
    inst = build_basic(P, Q)
    strong = apply_symmetry(inst, ("vertex_pinned", 2))
    assert strong.linear_constraints[2].relation == "=="
    assert strong.linear_constraints[2].coeffs == inst.linear_constraints[2].coeffs
    assert sum(lc.relation == "==" for lc in strong.linear_constraints) == 1
    both = apply_symmetry(inst, ("both", 0))
    assert sum(lc.relation == "==" for lc in both.linear_constraints) == 4
    with pytest.raises(QcpError):
        apply_symmetry(inst, "mirror")
    with pytest.raises(QcpError):
        apply_symmetry(inst, ("vertex_pinned", 99))


def test_mixed_dimensions_rejected():
    with pytest.raises(QcpError):
        build_basic(make_platonic("T", "1"), make_polygon(4, "1"))


def test_json_round_trip():
    inst = build_reduced(make_polygon(3, "1"), make_polygon(5, "1"))
    text = inst.to_json()
    back = QcpInstance.from_json(text)
    assert back == inst
    assert back.basis == inst.basis
    assert back.affine == inst.affine


def test_qcp_battery(battery):
    assert battery["qcp"]["failures"] == [], battery["qcp"]["failures"]
