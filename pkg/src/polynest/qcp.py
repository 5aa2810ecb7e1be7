"""The containment problem as a quadratically constrained program, as data.

Variables: s (squared dilation) followed by coordinates of placed points.
In the basic form the placed points are all n vertices of P; in the reduced
form they are the p+1 points of an affine basis of P's vertex set, and every
other vertex is the stored affine combination of the basis. Linear
constraints put each placed vertex in each halfspace of Q; quadratic
constraints pin squared pairwise distances to s times the rest-shape value.

Instances are plain data (decimal-string coefficients) so external solvers
can consume the JSON dump.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field, replace

import mpmath as mp

from polynest.geometry import (
    GUARD_DPS,
    GeometryError,
    Polytope,
    centrally_symmetric,
    circumradius,
    inradius,
    _fmt,
)


class QcpError(ValueError):
    pass


@dataclass(frozen=True)
class LinearConstraint:
    """coeffs . x <relation> offset, with x the full variable vector."""

    coeffs: tuple[str, ...]
    offset: str
    relation: str = "<="


@dataclass(frozen=True)
class QuadraticConstraint:
    """||x_i - x_j||^2 = s * coeff over placed points i, j."""

    i: int
    j: int
    coeff: str


@dataclass(frozen=True)
class QcpInstance:
    form: str
    dim: int
    variables: tuple[str, ...]
    objective: str
    linear_constraints: tuple[LinearConstraint, ...]
    quadratic_constraints: tuple[QuadraticConstraint, ...]
    bounds: tuple[tuple[str, str], ...]
    s_lower: str
    P: Polytope = field(compare=False)
    Q: Polytope = field(compare=False)
    basis: tuple[int, ...] | None = None
    affine: tuple[tuple[str, ...], ...] | None = None
    precision_digits: int = 50

    @property
    def n_vars(self) -> int:
        return len(self.variables)

    def point_index(self, l: int, j: int) -> int:
        """Variable index of coordinate j of placed point l."""
        return 1 + l * self.dim + j

    def expand(self, point_coords):
        """Placed coordinates for all n vertices of P.

        For the basic form this is the input reshaped; for the reduced form
        each vertex is its affine combination of the basis points. Input is
        a flat list (without s) or a list of points; mp arithmetic.
        """
        q = self.dim
        pts = point_coords
        if pts and not isinstance(pts[0], (list, tuple)):
            pts = [pts[l * q:(l + 1) * q] for l in range(len(pts) // q)]
        if self.form == "basic":
            return [list(p) for p in pts]
        with mp.workdps(max(mp.mp.dps, self.precision_digits + GUARD_DPS)):
            out = []
            for row in self.affine:
                lam = [mp.mpf(c) for c in row]
                out.append([mp.fsum(lam[l] * pts[l][j] for l in range(len(lam)))
                            for j in range(q)])
            return out

    def residuals(self, s, point_coords):
        """(max linear violation, max |quadratic residual|) at a trial point."""
        q = self.dim
        pts = point_coords
        if pts and not isinstance(pts[0], (list, tuple)):
            pts = [pts[l * q:(l + 1) * q] for l in range(len(pts) // q)]
        with mp.workdps(max(mp.mp.dps, self.precision_digits + GUARD_DPS)):
            x = [mp.mpf(s)] + [mp.mpf(c) for p in pts for c in p]
            lin = mp.mpf(0)
            for lc in self.linear_constraints:
                val = mp.fsum(mp.mpf(c) * xi for c, xi in zip(lc.coeffs, x)) - mp.mpf(lc.offset)
                lin = max(lin, abs(val) if lc.relation == "==" else max(mp.mpf(0), val))
            quad = mp.mpf(0)
            for qc in self.quadratic_constraints:
                pi, pj = pts[qc.i], pts[qc.j]
                d2 = mp.fsum((a - b) ** 2 for a, b in zip(pi, pj))
                quad = max(quad, abs(d2 - mp.mpf(s) * mp.mpf(qc.coeff)))
            return lin, quad

    def to_json_dict(self) -> dict:
        return {
            "form": self.form,
            "dim": self.dim,
            "variables": list(self.variables),
            "objective": self.objective,
            "linear_constraints": [
                {"coeffs": list(lc.coeffs), "offset": lc.offset, "relation": lc.relation}
                for lc in self.linear_constraints],
            "quadratic_constraints": [
                {"i": qc.i, "j": qc.j, "coeff": qc.coeff}
                for qc in self.quadratic_constraints],
            "bounds": [list(b) for b in self.bounds],
            "s_lower": self.s_lower,
            "basis": list(self.basis) if self.basis is not None else None,
            "affine": [list(r) for r in self.affine] if self.affine is not None else None,
            "P": self.P.to_json_dict(),
            "Q": self.Q.to_json_dict(),
            "precision_digits": self.precision_digits,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2)

    @classmethod
    def from_json_dict(cls, d: dict) -> "QcpInstance":
        return cls(
            form=d["form"],
            dim=int(d["dim"]),
            variables=tuple(d["variables"]),
            objective=d["objective"],
            linear_constraints=tuple(
                LinearConstraint(tuple(lc["coeffs"]), lc["offset"], lc["relation"])
                for lc in d["linear_constraints"]),
            quadratic_constraints=tuple(
                QuadraticConstraint(int(qc["i"]), int(qc["j"]), qc["coeff"])
                for qc in d["quadratic_constraints"]),
            bounds=tuple(tuple(b) for b in d["bounds"]),
            s_lower=d["s_lower"],
            P=Polytope.from_json_dict(d["P"]),
            Q=Polytope.from_json_dict(d["Q"]),
            basis=tuple(d["basis"]) if d.get("basis") is not None else None,
            affine=tuple(tuple(r) for r in d["affine"]) if d.get("affine") is not None else None,
            precision_digits=int(d["precision_digits"]),
        )

    @classmethod
    def from_json(cls, text: str) -> "QcpInstance":
        return cls.from_json_dict(json.loads(text))


def keplerian_bound(P: Polytope, Q: Polytope, dps: int | None = None) -> mp.mpf:
    """Lower bound on s: shrink P until its circumsphere fits Q's insphere.

    The concentric copy with circumradius equal to Q's inradius is always
    contained, so s >= (inradius(Q) / circumradius(P))^2.
    """
    with mp.workdps(dps or max(P.precision_digits, Q.precision_digits)):
        return (inradius(Q, dps) / circumradius(P, dps)) ** 2


def _check_pair(P: Polytope, Q: Polytope):
    if not P.vertices or not Q.halfspaces or not Q.vertices:
        raise QcpError("P needs vertices, Q needs both representations")
    if P.dim > Q.dim:
        raise QcpError(f"P has dim {P.dim} > Q dim {Q.dim}")
    if P.dim != Q.dim:
        raise QcpError("mixed-dimension pairs are not supported by the builders")


def _common(P: Polytope, Q: Polytope, digits: int):
    """(working values) vertices of P, normals/offsets of Q, bbox, s bounds."""
    wp = P.vertices_mp(digits)
    normals, offsets = Q.halfspaces_mp(digits)
    qverts = Q.vertices_mp(digits)
    lo = [min(v[j] for v in qverts) for j in range(Q.dim)]
    hi = [max(v[j] for v in qverts) for j in range(Q.dim)]
    s_lo = (inradius(Q, digits) / circumradius(P, digits)) ** 2
    s_hi = (circumradius(Q, digits) / inradius(P, digits)) ** 2
    return wp, normals, offsets, lo, hi, s_lo, s_hi


def build_basic(P: Polytope, Q: Polytope) -> QcpInstance:
    """Problem over s and all n placed vertices: maximize s subject to
    containment (n*m linear) and shape (C(n,2) quadratic) constraints."""
    _check_pair(P, Q)
    digits = min(P.precision_digits, Q.precision_digits)
    q = Q.dim
    n = P.n_vertices
    with mp.workdps(digits + GUARD_DPS):
        wp, normals, offsets, lo, hi, s_lo, s_hi = _common(P, Q, digits)
        names = ["s"] + [f"v{i}_{j}" for i in range(n) for j in range(q)]
        zero = _fmt(mp.mpf(0), digits)
        lin = []
        for i in range(n):
            for a, b in zip(normals, offsets):
                co = [zero] * (1 + n * q)
                for j in range(q):
                    co[1 + i * q + j] = _fmt(a[j], digits)
                lin.append(LinearConstraint(tuple(co), _fmt(b, digits)))
        quad = []
        for i, j in itertools.combinations(range(n), 2):
            d2 = mp.fsum((a - b) ** 2 for a, b in zip(wp[i], wp[j]))
            quad.append(QuadraticConstraint(i, j, _fmt(d2, digits)))
        bounds = [(_fmt(s_lo, digits), _fmt(s_hi, digits))]
        bounds += [(_fmt(lo[j], digits), _fmt(hi[j], digits))
                   for _ in range(n) for j in range(q)]
    return QcpInstance("basic", q, tuple(names), "maximize s", tuple(lin),
                       tuple(quad), tuple(bounds), _fmt(s_lo, digits),
                       P, Q, precision_digits=digits)


def affine_basis(P: Polytope, digits: int | None = None):
    """Greedy volume-maximizing affine basis of P's vertex set.

    Returns (indices, lambdas) where lambdas[i] are the coefficients
    expressing vertex i over the basis (rows sum to 1).
    """
    digits = digits or P.precision_digits
    with mp.workdps(digits + GUARD_DPS):
        vs = P.vertices_mp(digits)
        n, q = len(vs), P.dim
        scale = max(max(abs(c) for c in v) for v in vs)
        tol = scale * mp.mpf(10) ** (-digits + 5)
        idx = [0]
        dirs = []  # orthonormalized span directions
        while len(idx) < q + 1:
            best, best_d = None, tol
            for cand in range(n):
                if cand in idx:
                    continue
                d = [a - b for a, b in zip(vs[cand], vs[idx[0]])]
                for u in dirs:
                    proj = mp.fsum(a * b for a, b in zip(d, u))
                    d = [a - proj * b for a, b in zip(d, u)]
                dist = mp.sqrt(mp.fsum(c * c for c in d))
                if dist > best_d:
                    best, best_d = cand, dist
            if best is None:
                break
            d = [a - b for a, b in zip(vs[best], vs[idx[0]])]
            for u in dirs:
                proj = mp.fsum(a * b for a, b in zip(d, u))
                d = [a - proj * b for a, b in zip(d, u)]
            nrm = mp.sqrt(mp.fsum(c * c for c in d))
            dirs.append([c / nrm for c in d])
            idx.append(best)
        if len(idx) < q + 1:
            raise QcpError("vertex set is affinely degenerate")
        # lambdas: solve [B^T; 1^T] lam = [w; 1] for each vertex
        M = mp.matrix(q + 1, q + 1)
        for l, bi in enumerate(idx):
            for j in range(q):
                M[j, l] = vs[bi][j]
            M[q, l] = 1
        lambdas = []
        for w in vs:
            rhs = mp.matrix([*w, mp.mpf(1)])
            lam = mp.lu_solve(M, rhs)
            lambdas.append([lam[l] for l in range(q + 1)])
        return idx, lambdas


def build_reduced(P: Polytope, Q: Polytope) -> QcpInstance:
    """Problem over s and an affine basis of P: (p+1)*q+1 variables,
    C(p+1,2) quadratic constraints, the same n*m linear constraints."""
    _check_pair(P, Q)
    digits = min(P.precision_digits, Q.precision_digits)
    q = Q.dim
    n = P.n_vertices
    with mp.workdps(digits + GUARD_DPS):
        wp, normals, offsets, lo, hi, s_lo, s_hi = _common(P, Q, digits)
        idx, lambdas = affine_basis(P, digits)
        nb = len(idx)
        names = ["s"] + [f"u{l}_{j}" for l in range(nb) for j in range(q)]
        zero = _fmt(mp.mpf(0), digits)
        lin = []
        for i in range(n):
            lam = lambdas[i]
            for a, b in zip(normals, offsets):
                co = [zero] * (1 + nb * q)
                for l in range(nb):
                    for j in range(q):
                        co[1 + l * q + j] = _fmt(lam[l] * a[j], digits)
                lin.append(LinearConstraint(tuple(co), _fmt(b, digits)))
        quad = []
        for l, r in itertools.combinations(range(nb), 2):
            d2 = mp.fsum((a - b) ** 2 for a, b in zip(wp[idx[l]], wp[idx[r]]))
            quad.append(QuadraticConstraint(l, r, _fmt(d2, digits)))
        bounds = [(_fmt(s_lo, digits), _fmt(s_hi, digits))]
        bounds += [(_fmt(lo[j], digits), _fmt(hi[j], digits))
                   for _ in range(nb) for j in range(q)]
        aff = tuple(tuple(_fmt(c, digits) for c in row) for row in lambdas)
    return QcpInstance("reduced", q, tuple(names), "maximize s", tuple(lin),
                       tuple(quad), tuple(bounds), _fmt(s_lo, digits),
                       P, Q, basis=tuple(idx), affine=aff, precision_digits=digits)


def apply_symmetry(inst: QcpInstance, mode) -> QcpInstance:
    """Strengthen an instance with symmetry equalities.

    mode: "concentric" (placed centroid fixed to Q's centroid; requires both
    bodies centrally symmetric), ("vertex_pinned", k) (vertex 0's inequality
    for halfspace k becomes an equality), or ("both", k).
    """
    if mode == "concentric":
        modes = ["concentric"]
        pin = None
    elif isinstance(mode, tuple) and mode and mode[0] == "vertex_pinned":
        modes, pin = ["vertex_pinned"], int(mode[1])
    elif isinstance(mode, tuple) and mode and mode[0] == "both":
        modes, pin = ["concentric", "vertex_pinned"], int(mode[1])
    else:
        raise QcpError(f"unknown symmetry mode {mode!r}")

    digits = inst.precision_digits
    q = inst.dim
    lin = list(inst.linear_constraints)
    with mp.workdps(digits + GUARD_DPS):
        if "concentric" in modes:
            for body, tag in ((inst.P, "P"), (inst.Q, "Q")):
                if not centrally_symmetric(body):
                    raise QcpError(f"{tag} ({body.name}) is not centrally symmetric")
            n = inst.P.n_vertices
            cq = inst.Q.centroid_mp(digits)
            if inst.form == "basic":
                cols = [(i, mp.mpf(1) / n) for i in range(n)]
            else:
                lam = [[mp.mpf(c) for c in row] for row in inst.affine]
                cols = [(l, mp.fsum(row[l] for row in lam) / n)
                        for l in range(len(inst.basis))]
            zero = _fmt(mp.mpf(0), digits)
            for j in range(q):
                co = [zero] * inst.n_vars
                for l, w in cols:
                    co[inst.point_index(l, j)] = _fmt(w, digits)
                lin.append(LinearConstraint(tuple(co), _fmt(cq[j], digits), "=="))
        if "vertex_pinned" in modes:
            if not (0 <= pin < inst.Q.n_facets):
                raise QcpError(f"halfspace index {pin} out of range")
            k = 0 * inst.Q.n_facets + pin  # vertex 0's block
            lc = lin[k]
            lin[k] = LinearConstraint(lc.coeffs, lc.offset, "==")
    return replace(inst, linear_constraints=tuple(lin))
