"""From a near-optimal placement to hundreds of correct digits.

A locally maximal placement is pinned by its vertex-facet incidences: each
incidence a_k.(sigma R w_i + t) = b_k is polynomial in the unknowns once
the rotation is written through an unnormalized quaternion c (homogenized
rotation, norm equation c.c = 1 appended). A full-rank subset of incidences
plus the norm equation is a square system whose isolated real solution is
the optimum; Newton's method with a doubling precision ladder then yields
as many digits as requested. The full incidence set is re-checked at the
refined point, so picking a subset cannot silently land on a wrong branch.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, replace

import mpmath as mp
import numpy as np

from polynest._rotation import quat_hom_jac, quat_hom_matrix
from polynest.geometry import GUARD_DPS, Polytope, _fmt
from polynest.solver import Placement, make_placement

DETECT_TOL = 1e-6
LADDER_GUARD = 20


class RefineError(RuntimeError):
    pass


@dataclass(frozen=True)
class IncidenceSystem:
    """Incidence equations of a placement, plus the chart they live in."""

    incidences: tuple  # of (vertex index, facet index)
    unknowns: tuple
    equations: tuple  # human-readable equation forms, one per incidence + norm
    chart_note: str
    symmetry: str  # "none" | "concentric"
    selected: tuple | None  # incidence indices forming the square system
    least_squares: bool
    Q: Polytope
    P: Polytope | None
    seed: Placement

    @property
    def n_unknowns(self) -> int:
        return len(self.unknowns)

    def counts_by_vertex(self) -> dict:
        out: dict = {}
        for i, _ in self.incidences:
            out[i] = out.get(i, 0) + 1
        return out

    def classify(self) -> dict:
        """Histogram of incidence multiplicity per touching vertex:
        1 facet = on a face, 2 = on an edge, 3 or more = at a vertex of Q."""
        hist = {"face": 0, "edge": 0, "vertex": 0}
        for c in self.counts_by_vertex().values():
            hist["face" if c == 1 else "edge" if c == 2 else "vertex"] += 1
        return hist


@dataclass(frozen=True)
class HighPrecisionSolution:
    values: dict
    digits: int
    residual: str
    convergence_log: tuple  # of (dps, iteration, residual string)

    def to_json_dict(self) -> dict:
        return {
            "values": dict(self.values),
            "digits": self.digits,
            "residual": self.residual,
            "convergence_log": [list(e) for e in self.convergence_log],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2)


def detect_incidences(placement: Placement, Q: Polytope, tol: float = DETECT_TOL,
                      P: Polytope | None = None) -> IncidenceSystem:
    """All vertex-facet pairs within tol of equality at the placement.

    P (the rest shape) is carried along when provided; it is required later
    by newton_refine, which re-evaluates rest coordinates at high precision.
    """
    V = placement.vertex_array
    A, b = Q.normal_array, Q.offset_array
    resid = A @ V.T - b[:, None]
    pairs = tuple(sorted(
        (i, k) for i in range(len(V)) for k in range(len(A))
        if abs(resid[k, i]) < tol))
    if not pairs:
        raise RefineError("no incidences at the given tolerance: placement is interior")
    dim = placement.dim
    if dim == 3:
        unknowns = ("sigma", "c0", "c1", "c2", "c3", "t0", "t1", "t2")
        chart = "full chart: dilation, unnormalized quaternion, translation"
    else:
        unknowns = ("sigma", "c0", "c1", "t0", "t1")
        chart = "full chart: dilation, planar rotation pair (cos, sin), translation"
    eqs = tuple(
        f"sigma*(a{k}.R(c)w{i}) + (c.c)*(a{k}.t - b{k}) = 0" if dim == 3 else
        f"sigma*(a{k}.R(c)w{i}) + a{k}.t - b{k} = 0"
        for i, k in pairs) + ("c.c = 1",)
    return IncidenceSystem(
        incidences=pairs, unknowns=unknowns, equations=eqs, chart_note=chart,
        symmetry="none", selected=None, least_squares=False,
        Q=Q, P=P, seed=placement)


def _u_from_placement(pl: Placement, symmetry: str):
    u = [pl.sigma_f] + list(pl.rotation_f)
    if pl.dim == 2:
        th = float(mp.mpf(pl.rotation[0]))
        u = [pl.sigma_f, np.cos(th), np.sin(th)]
    if symmetry != "concentric":
        u += list(pl.translation_f)
    return np.array(u, float)


def _rows_f(u, pairs, A, b, W, dim, symmetry, t_fixed):
    """Residuals and Jacobian at float precision (for subset selection)."""
    nu = len(u)
    sig = u[0]
    if dim == 3:
        c = u[1:5]
        t = t_fixed if symmetry == "concentric" else u[5:8]
        Rh = np.array(quat_hom_matrix(c))
        Jq = [np.array(m) for m in quat_hom_jac(c)]
        n2 = c @ c
    else:
        c = u[1:3]
        t = t_fixed if symmetry == "concentric" else u[3:5]
        Rh = np.array([[c[0], -c[1]], [c[1], c[0]]])
        Jq = [np.array([[1.0, 0.0], [0.0, 1.0]]), np.array([[0.0, -1.0], [1.0, 0.0]])]
        n2 = c @ c
    rows = np.empty(len(pairs) + 1)
    J = np.zeros((len(pairs) + 1, nu))
    for r, (i, k) in enumerate(pairs):
        a, bb, w = A[k], b[k], W[i]
        Rw = Rh @ w
        gap = a @ t - bb
        if dim == 3:
            rows[r] = sig * (a @ Rw) + n2 * gap
            J[r, 0] = a @ Rw
            for l in range(4):
                J[r, 1 + l] = sig * (a @ (Jq[l] @ w)) + 2 * c[l] * gap
            if symmetry != "concentric":
                J[r, 5:8] = n2 * a
        else:
            rows[r] = sig * (a @ Rw) + gap
            J[r, 0] = a @ Rw
            for l in range(2):
                J[r, 1 + l] = sig * (a @ (Jq[l] @ w))
            if symmetry != "concentric":
                J[r, 3:5] = a
    rows[-1] = n2 - 1.0
    J[-1, 1:1 + len(c)] = 2 * c
    return rows, J


def build_square_system(inc: IncidenceSystem, symmetry: str = "none") -> IncidenceSystem:
    """Select a full-rank incidence subset so equations = unknowns.

    With the norm equation always included, n_unknowns - 1 incidence rows
    are chosen greedily by pivoted orthogonalization of Jacobian rows at
    the seed. If no independent subset exists the system is flagged for
    least-squares (Gauss-Newton) treatment instead of raising: the full
    residual check after refinement is the real gate.
    """
    if symmetry not in ("none", "concentric"):
        raise RefineError(f"unknown symmetry {symmetry!r}")
    pl = inc.seed
    dim = pl.dim
    if symmetry == "concentric":
        unknowns = inc.unknowns[:1 + (4 if dim == 3 else 2)]
        cen = inc.Q.centroid_mp()
        t_fixed = np.array([float(x) for x in cen])
        if np.abs(pl.translation_f - t_fixed).max() > 1e-5:
            raise RefineError("seed translation is not at Q's centroid")
        chart = inc.chart_note + "; translation pinned to Q's centroid"
    else:
        unknowns = inc.unknowns
        t_fixed = None
        chart = inc.chart_note
    nu = len(unknowns)
    need = nu - 1
    if len(inc.incidences) < need:
        raise RefineError(
            f"{len(inc.incidences)} incidences cannot determine {nu} unknowns")
    u0 = _u_from_placement(pl, symmetry)
    if inc.P is None:
        raise RefineError("rest shape P is required to build the system")
    W = inc.P.vertex_array
    A, b = inc.Q.normal_array, inc.Q.offset_array
    _, J = _rows_f(u0, inc.incidences, A, b, W, dim, symmetry, t_fixed)
    basis = [J[-1] / np.linalg.norm(J[-1])]
    chosen: list = []
    rows = [J[r].copy() for r in range(len(inc.incidences))]
    for _ in range(need):
        best, best_n = None, 1e-8
        for r, g in enumerate(rows):
            if r in chosen:
                continue
            d = g.copy()
            for e in basis:
                d -= (d @ e) * e
            nn = np.linalg.norm(d)
            if nn > best_n:
                best, best_n = r, nn
        if best is None:
            return replace(inc, symmetry=symmetry, unknowns=unknowns,
                           chart_note=chart + "; no independent subset, least-squares fallback",
                           selected=None, least_squares=True)
        d = rows[best].copy()
        for e in basis:
            d -= (d @ e) * e
        basis.append(d / np.linalg.norm(d))
        chosen.append(best)
    return replace(inc, symmetry=symmetry, unknowns=unknowns, chart_note=chart,
                   selected=tuple(sorted(chosen)), least_squares=False)


def _rows_mp(u, pairs, A, b, W, dim, symmetry, t_fixed, want_jac=True):
    """Residuals (and Jacobian) in mp arithmetic; u is a list of mpf."""
    sig = u[0]
    nc = 4 if dim == 3 else 2
    c = u[1:1 + nc]
    t = t_fixed if symmetry == "concentric" else u[1 + nc:1 + nc + dim]
    n2 = mp.fsum(x * x for x in c)
    if dim == 3:
        Rh = quat_hom_matrix(c)
        Jq = quat_hom_jac(c) if want_jac else None
    else:
        Rh = [[c[0], -c[1]], [c[1], c[0]]]
        Jq = [[[1, 0], [0, 1]], [[0, -1], [1, 0]]] if want_jac else None
    nu = len(u)
    rows = []
    J = []
    for (i, k) in pairs:
        a, bb, w = A[k], b[k], W[i]
        Rw = [mp.fsum(Rh[r][s] * w[s] for s in range(dim)) for r in range(dim)]
        aRw = mp.fsum(a[r] * Rw[r] for r in range(dim))
        gap = mp.fsum(a[r] * t[r] for r in range(dim)) - bb
        if dim == 3:
            rows.append(sig * aRw + n2 * gap)
        else:
            rows.append(sig * aRw + gap)
        if want_jac:
            g = [mp.mpf(0)] * nu
            g[0] = aRw
            for l in range(nc):
                dRw = [mp.fsum(Jq[l][r][s] * w[s] for s in range(dim)) for r in range(dim)]
                g[1 + l] = sig * mp.fsum(a[r] * dRw[r] for r in range(dim))
                if dim == 3:
                    g[1 + l] += 2 * c[l] * gap
            if symmetry != "concentric":
                for r in range(dim):
                    g[1 + nc + r] = n2 * a[r] if dim == 3 else a[r]
            J.append(g)
    rows.append(n2 - 1)
    if want_jac:
        g = [mp.mpf(0)] * nu
        for l in range(nc):
            g[1 + l] = 2 * c[l]
        J.append(g)
    return rows, J


def _geometry_at(sys: IncidenceSystem, dps: int):
    P = sys.P.at_precision(dps)
    Q = sys.Q.at_precision(dps)
    W = P.vertices_mp(dps)
    A, b = Q.halfspaces_mp(dps)
    if sys.symmetry == "concentric":
        t_fixed = Q.centroid_mp(dps)
    else:
        t_fixed = None
    return W, A, b, t_fixed


def newton_refine(sys: IncidenceSystem, seed: Placement | None,
                  target_digits: int) -> HighPrecisionSolution:
    """Refine the system's solution to target_digits decimal digits.

    Precision ladder: start at twice the seed's stored digits, double per
    stage (plus guard digits) until the residual beats 10^-target. The
    first Newton step must contract the residual by at least 2x, otherwise
    the seed is rejected as outside the basin.
    """
    if sys.P is None:
        raise RefineError("system has no rest shape P; pass P to detect_incidences")
    pl = seed or sys.seed
    dim = pl.dim
    if sys.selected is None and not sys.least_squares:
        raise RefineError("call build_square_system first")
    pairs = ([sys.incidences[r] for r in sys.selected]
             if not sys.least_squares else list(sys.incidences))
    nu = sys.n_unknowns
    start = max(30, 2 * pl.precision_digits)
    final = target_digits + LADDER_GUARD
    stages = [start]
    while stages[-1] < final:
        stages.append(min(2 * stages[-1], final))
    u_str = None
    log = []
    first_checked = False
    for dps in stages:
        with mp.workdps(dps):
            W, A, b, t_fixed = _geometry_at(sys, dps)
            if u_str is None:
                u = [mp.mpf(pl.sigma)]
                if dim == 3:
                    u += [mp.mpf(c) for c in pl.rotation]
                else:
                    th = mp.mpf(pl.rotation[0])
                    u += [mp.cos(th), mp.sin(th)]
                if sys.symmetry != "concentric":
                    u += [mp.mpf(c) for c in pl.translation]
            else:
                u = [mp.mpf(c) for c in u_str]
            floor = mp.mpf(10) ** (-(dps - 5))
            prev = None
            u_prev = u
            for it in range(24):
                rows, J = _rows_mp(u, pairs, A, b, W, dim, sys.symmetry, t_fixed)
                res = max(abs(r) for r in rows)
                log.append((dps, it, mp.nstr(res, 8)))
                if not first_checked and prev is not None:
                    if prev > floor * 100 and res > prev / 2:
                        raise RefineError(
                            f"first Newton step did not contract: {mp.nstr(prev, 5)} "
                            f"-> {mp.nstr(res, 5)}")
                    first_checked = True
                if res < floor:
                    break
                if prev is not None and res >= prev:
                    u = u_prev
                    break
                prev = res
                u_prev = u
                M = mp.matrix(J)
                rv = mp.matrix([-r for r in rows])
                if sys.least_squares:
                    Mt = M.T
                    du = mp.lu_solve(Mt * M, Mt * rv)
                else:
                    try:
                        du = mp.lu_solve(M, rv)
                    except ZeroDivisionError:
                        raise RefineError("singular Jacobian at iterate")
                u = [ui + du[j] for j, ui in enumerate(u)]
            u_str = [mp.nstr(ui, dps) for ui in u]
    with mp.workdps(final):
        u = [mp.mpf(c) for c in u_str]
        W, A, b, t_fixed = _geometry_at(sys, final)
        rows, _ = _rows_mp(u, pairs, A, b, W, dim, sys.symmetry, t_fixed, want_jac=False)
        res = max(abs(r) for r in rows)
        if res > mp.mpf(10) ** (-target_digits):
            raise RefineError(
                f"residual {mp.nstr(res, 5)} did not reach 10^-{target_digits}")
        values = {}
        for name, ui in zip(sys.unknowns, u):
            values[name] = mp.nstr(ui, target_digits + 10, strip_zeros=False)
        if sys.symmetry == "concentric":
            for j, tv in enumerate(t_fixed):
                values[f"t{j}"] = mp.nstr(tv, target_digits + 10, strip_zeros=False)
        return HighPrecisionSolution(
            values=values, digits=target_digits, residual=mp.nstr(res, 8),
            convergence_log=tuple(log))


def placement_from_solution(sys: IncidenceSystem, sol: HighPrecisionSolution,
                            digits: int | None = None) -> Placement:
    """Expand a refined solution back into a Placement at high precision."""
    d = digits or min(sol.digits, 120)
    if sys.P is None:
        raise RefineError("system has no rest shape P")
    dim = sys.seed.dim
    if dim == 3:
        rot = [sol.values[f"c{l}"] for l in range(4)]
    else:
        with mp.workdps(sol.digits + 10):
            rot = mp.atan2(mp.mpf(sol.values["c1"]), mp.mpf(sol.values["c0"]))
            rot = mp.nstr(rot, sol.digits, strip_zeros=False)
    t = [sol.values[f"t{j}"] for j in range(dim)]
    return make_placement(sys.P.at_precision(d + GUARD_DPS),
                          sol.values["sigma"], rot, t,
                          sys.Q.at_precision(d + GUARD_DPS), digits=d)


def verify_refinement(sys: IncidenceSystem, sol: HighPrecisionSolution,
                      containment_tol: str = "1e-30") -> dict:
    """Check the FULL incidence set and containment at the refined point."""
    dps = sol.digits + LADDER_GUARD
    with mp.workdps(dps):
        u = [mp.mpf(sol.values[n]) for n in sys.unknowns]
        W, A, b, t_fixed = _geometry_at(sys, dps)
        rows, _ = _rows_mp(u, list(sys.incidences), A, b, W, sys.seed.dim,
                           sys.symmetry, t_fixed, want_jac=False)
        full = max(abs(r) for r in rows)
        pl = placement_from_solution(sys, sol, digits=min(sol.digits, dps - 10))
        viol = mp.mpf(pl.achieved_tol)
        ok = full < mp.mpf(10) ** (-(sol.digits - 10)) and viol < mp.mpf(containment_tol)
        return {
            "full_residual": mp.nstr(full, 8),
            "containment_violation": mp.nstr(viol, 8),
            "quadratic_decay": has_quadratic_decay(sol.convergence_log),
            "ok": bool(ok),
        }


def has_quadratic_decay(log, factor: float = 1.8) -> bool:
    """True if some Newton step multiplied the residual exponent by factor.

    Steps whose better residual already sits at the stage's precision floor
    are ignored: contraction there is capped by roundoff, not by Newton.
    """
    by_stage: dict = {}
    for dps, it, res in log:
        by_stage.setdefault(dps, []).append(mp.mpf(res))
    for dps, seq in by_stage.items():
        for a, b in zip(seq, seq[1:]):
            if a <= 0 or b <= 0:
                continue
            ea = -mp.log10(a)
            eb = -mp.log10(b)
            if ea > 3 and eb < dps - 3 and eb >= factor * ea:
                return True
    return False
