"""Global search for the largest similar copy of P inside Q.

At a fixed rotation the best dilation and translation solve a small linear
program, so the hard part of the problem is only the rotation: one angle in
the plane, three parameters in space. The search combines a deterministic
rotation grid, seeded random starts, pattern descent on the rotation chart,
and a final "snap" that converges onto the vertex-facet incidence set of
the nearby stationary placement. Results are putatively optimal in the same
sense any multistart method is; the report keeps all local optima found so
the margin can be audited.
"""
from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass

import mpmath as mp
import numpy as np

from polynest._kernel import LpError, lp_maximize
from polynest._rotation import (
    axis_angle_matrix,
    euler_matrix,
    quat_from_matrix,
    quat_hom_jac,
    quat_hom_matrix,
    quat_rotation,
    rot2d,
)
from polynest.geometry import GUARD_DPS, Polytope, _fmt

PLACEMENT_DIGITS = 32
SNAP_LADDER = (1e-2, 3e-3, 1e-3, 3e-4, 1e-4, 1e-5)


class SolveError(RuntimeError):
    pass


@dataclass(frozen=True)
class SolverConfig:
    tolerance: float = 1e-10
    starts: int = 150
    grid: tuple = (16, 9, 16)
    seed: int = 0
    polish_top: int = 40
    polish_window: float = 1e-3
    polish_cap: int = 200
    snap: bool = True
    reflections: bool = False
    angle_samples: int = 0  # plane path; 0 picks from the rotation period


@dataclass(frozen=True)
class Placement:
    """A placed copy sigma * R * w_i + t, all coordinates decimal strings.

    rotation is a unit quaternion (w, x, y, z) in space, a single angle in
    the plane. vertices are derived from the parameters at construction at
    precision_digits, so the representation is self-consistent far below
    float accuracy. achieved_tol is the worst containment violation against
    the Q the placement was built for (clamped at zero).
    """

    dim: int
    sigma: str
    s: str
    rotation: tuple[str, ...]
    translation: tuple[str, ...]
    vertices: tuple[tuple[str, ...], ...]
    achieved_tol: str
    reflected: bool = False
    precision_digits: int = PLACEMENT_DIGITS

    @property
    def sigma_f(self) -> float:
        return float(mp.mpf(self.sigma))

    @property
    def rotation_f(self) -> np.ndarray:
        return np.array([float(mp.mpf(c)) for c in self.rotation])

    @property
    def translation_f(self) -> np.ndarray:
        return np.array([float(mp.mpf(c)) for c in self.translation])

    @property
    def vertex_array(self) -> np.ndarray:
        return np.array([[float(mp.mpf(c)) for c in v] for v in self.vertices])

    def rotation_matrix_f(self) -> np.ndarray:
        if self.dim == 2:
            return rot2d(float(mp.mpf(self.rotation[0])))
        return quat_rotation(self.rotation_f)

    def to_json_dict(self) -> dict:
        return {
            "sigma": self.sigma,
            "s": self.s,
            "rotation": list(self.rotation),
            "translation": list(self.translation),
            "vertices": [list(v) for v in self.vertices],
        }

    @classmethod
    def from_json_dict(cls, d: dict, dim: int | None = None,
                       achieved_tol: str = "0", digits: int = PLACEMENT_DIGITS):
        return cls(
            dim=dim if dim is not None else len(d["translation"]),
            sigma=d["sigma"], s=d["s"],
            rotation=tuple(d["rotation"]),
            translation=tuple(d["translation"]),
            vertices=tuple(tuple(v) for v in d["vertices"]),
            achieved_tol=d.get("achieved_tol", achieved_tol),
            precision_digits=digits)


@dataclass(frozen=True)
class SolveReport:
    best: Placement
    local_optima: tuple  # of (s decimal string, Placement)
    starts_used: int
    precision: str
    seed: int
    wall_time: float  # seconds; deliberately not serialized

    def to_json_dict(self) -> dict:
        d = self.best.to_json_dict()
        d["local_optima"] = [
            {"s": s, "sigma": pl.sigma, "rotation": list(pl.rotation),
             "translation": list(pl.translation)}
            for s, pl in self.local_optima]
        d["seed"] = self.seed
        d["tolerance"] = self.precision
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2)


def make_placement(P: Polytope, sigma, rotation, translation, Q: Polytope,
                   reflected: bool = False,
                   digits: int = PLACEMENT_DIGITS) -> Placement:
    """Build a self-consistent Placement from numeric parameters.

    rotation: quaternion (4,), rotation matrix, or plane angle. Vertices
    and the containment violation are evaluated in mp arithmetic.
    """
    dim = P.dim
    with mp.workdps(digits + GUARD_DPS):
        sig = _to_mp(sigma)
        tr = [_to_mp(c) for c in np.atleast_1d(np.asarray(translation, object))]
        if dim == 2:
            theta = _to_mp(rotation if np.ndim(rotation) == 0 else rotation[0])
            theta = theta % (2 * mp.pi)
            rot_params = [theta]
            c, s = mp.cos(theta), mp.sin(theta)
            R = [[c, -s], [s, c]]
        else:
            rotation = np.asarray(rotation, object)
            if rotation.shape == (3, 3):
                rotation = quat_from_matrix(rotation.astype(float))
            qm = [_to_mp(c) for c in rotation]
            nrm = mp.sqrt(mp.fsum(c * c for c in qm))
            qm = [c / nrm for c in qm]
            lead = next((c for c in qm if abs(c) > mp.mpf("1e-12")), mp.mpf(1))
            if lead < 0:
                qm = [-c for c in qm]
            rot_params = qm
            n2 = mp.fsum(c * c for c in qm)
            R = [[e / n2 for e in row] for row in quat_hom_matrix(qm)]
        wp = P.vertices_mp(digits + GUARD_DPS)
        if reflected:
            wp = [[-v[0]] + list(v[1:]) for v in wp]
        verts = [[sig * mp.fsum(R[r][c] * w[c] for c in range(dim)) + tr[r]
                  for r in range(dim)] for w in wp]
        normals, offsets = Q.halfspaces_mp(digits + GUARD_DPS)
        viol = max(mp.fsum(a[j] * v[j] for j in range(dim)) - b
                   for v in verts for a, b in zip(normals, offsets))
        viol = max(viol, mp.mpf(0))
        return Placement(
            dim=dim,
            sigma=_fmt(sig, digits),
            s=_fmt(sig * sig, digits),
            rotation=tuple(_fmt(c, digits) for c in rot_params),
            translation=tuple(_fmt(c, digits) for c in tr),
            vertices=tuple(tuple(_fmt(c, digits) for c in v) for v in verts),
            achieved_tol=_fmt(viol, digits),
            reflected=reflected,
            precision_digits=digits)


def _to_mp(x):
    if isinstance(x, str):
        return mp.mpf(x)
    if isinstance(x, (np.floating, float)):
        return mp.mpf(float(x))
    if isinstance(x, (int, np.integer)):
        return mp.mpf(int(x))
    return mp.mpf(x)


class _Arena:
    """Float-precision working data for one (P, Q) pair."""

    def __init__(self, P: Polytope, Q: Polytope, reflected: bool = False):
        if P.dim != Q.dim or P.dim not in (2, 3):
            raise SolveError(
                f"rotation search handles equal dims 2 or 3, got {P.dim}/{Q.dim}")
        self.P, self.Q, self.dim = P, Q, P.dim
        self.VP = P.vertex_array.copy()
        if reflected:
            self.VP[:, 0] *= -1.0
        self.reflected = reflected
        self.A = Q.normal_array
        self.b = Q.offset_array
        n, m, q = len(self.VP), len(self.A), self.dim
        self.n, self.m = n, m
        self.G = np.empty((m * n, q + 1))
        self.G[:, 1:] = np.repeat(self.A, n, axis=0)
        self.b_rep = np.repeat(self.b, n)
        self.c = np.zeros(q + 1)
        self.c[0] = 1.0
        self.scale = max(1.0, float(np.abs(self.b).max()))
        self.qc = Q.vertex_array.mean(axis=0)
        self.q_margin = float((self.b - self.A @ self.qc).min())

    def sigma_at(self, R):
        """(sigma, t) maximizing sigma at rotation R; (-inf, None) if the
        LP fails or its result cannot be repaired to strict feasibility.

        On degenerate contact patterns the simplex can terminate a hair
        infeasible with sigma inflated by the same order. Such a point is
        pulled back onto the feasible side by contracting toward an
        interior point of Q, which keeps the rotation usable for descent
        at an honestly reduced sigma instead of discarding or, worse,
        ranking the inflated value.
        """
        RV = self.VP @ R.T
        self.G[:, 0] = (self.A @ RV.T).reshape(-1)
        try:
            x, _ = lp_maximize(self.G, self.b_rep, self.c)
        except LpError:
            return -np.inf, None
        sig, t = x[0], x[1:]
        W = sig * RV + t
        v = float((self.A @ W.T - self.b[:, None]).max())
        if v > 1e-11 * self.scale:
            if v > 1e-7 * self.scale or v >= self.q_margin:
                return -np.inf, None
            rho = self.q_margin / (self.q_margin + v)
            sig, t = rho * sig, rho * t + (1.0 - rho) * self.qc
            W = sig * RV + t
            if (self.A @ W.T - self.b[:, None]).max() > 1e-11 * self.scale:
                return -np.inf, None
        return sig, t

    def violation(self, sig, R, t):
        W = sig * (self.VP @ R.T) + t
        return float((self.A @ W.T - self.b[:, None]).max())


def max_scale_lp(P: Polytope, Q: Polytope, rotation):
    """Best (sigma, translation) at a fixed rotation; raises on LP failure."""
    R = np.asarray(rotation, float)
    if R.ndim == 1:
        R = quat_rotation(R) if len(R) == 4 else rot2d(R[0])
    elif R.ndim == 0:
        R = rot2d(float(R))
    if np.abs(R @ R.T - np.eye(len(R))).max() > 1e-9:
        raise SolveError("rotation is not orthogonal")
    ar = _Arena(P, Q)
    if R.shape != (ar.dim, ar.dim):
        raise SolveError(f"rotation shape {R.shape} does not match dim {ar.dim}")
    sig, t = ar.sigma_at(R)
    if t is None:
        raise SolveError("inner LP failed at the given rotation")
    return sig, t


def _snap(ar: _Arena, sigma, R, t, tol):
    """Gauss-Newton on the incidence system seeded at (sigma, R, t).

    Homogenized equations s*a.(Rhom(q) w) + (q.q)(a.t - b) = 0 plus the
    unit-norm equation; returns (sigma, quat, t) or None. Feasibility of
    the result is gated strictly (1e-9) so a snap can only move onto the
    containment boundary, never through it.
    """
    W = sigma * (ar.VP @ R.T) + t
    resid = ar.A @ W.T - ar.b[:, None]
    pairs = [(i, k) for k in range(ar.m) for i in range(ar.n)
             if abs(resid[k, i]) < tol * max(1.0, sigma)]
    if len(pairs) < 4:
        return None
    q0 = quat_from_matrix(R)
    u = np.concatenate([[sigma], q0, t])

    def system(u):
        s, q, tt = u[0], u[1:5], u[5:8]
        Rh = np.array(quat_hom_matrix(q))
        n2 = q @ q
        rows = np.empty(len(pairs) + 1)
        J = np.zeros((len(pairs) + 1, 8))
        Jr = quat_hom_jac(q)
        for r, (i, k) in enumerate(pairs):
            a, w, b = ar.A[k], ar.VP[i], ar.b[k]
            Rw = Rh @ w
            gap = a @ tt - b
            rows[r] = s * (a @ Rw) + n2 * gap
            J[r, 0] = a @ Rw
            for l in range(4):
                J[r, 1 + l] = s * (a @ (np.array(Jr[l]) @ w)) + 2 * q[l] * gap
            J[r, 5:8] = n2 * a
        rows[-1] = n2 - 1.0
        J[-1, 1:5] = 2 * q
        return rows, J

    for _ in range(60):
        r, J = system(u)
        du, *_ = np.linalg.lstsq(J, -r, rcond=1e-12)
        u = u + du
        if np.linalg.norm(du) < 1e-14:
            break
    r, _ = system(u)
    if np.linalg.norm(r) > 1e-10:
        return None
    s, q, tt = u[0], u[1:5], u[5:8]
    q = q / np.linalg.norm(q)
    if ar.violation(s, quat_rotation(q), tt) > 1e-9 * ar.scale:
        return None
    return s, q, tt


def _compass(ar: _Arena, R0, step=0.08, min_step=1e-8, max_iter=4000):
    """Pattern descent over the rotation tangent space (axis-angle steps)."""
    R = R0
    f, t = ar.sigma_at(R)
    dirs = [np.array(d, float) for d in
            ((1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1))]
    it = 0
    while step > min_step:
        it += 1
        if it > max_iter:
            raise SolveError("pattern search did not converge")
        improved = False
        for d in dirs:
            R2 = axis_angle_matrix(step * d) @ R
            f2, t2 = ar.sigma_at(R2)
            if f2 > f + 1e-15:
                R, f, t = R2, f2, t2
                improved = True
                break
        if not improved:
            step *= 0.5
    return f, R, t


def _polish_one(ar: _Arena, R, use_snap=True, step=0.08):
    """Compass descent then the snap ladder; returns (sigma, quat, t).

    A snap only proposes a rotation; sigma and t are always re-certified
    by the LP there, so every returned candidate is LP-grade feasible.
    """
    f, R, t = _compass(ar, R, step=step)
    best = (f, quat_from_matrix(R), t)
    if use_snap:
        for tol in SNAP_LADDER:
            got = _snap(ar, best[0], quat_rotation(best[1]), best[2], tol)
            if got is None:
                continue
            f2, t2 = ar.sigma_at(quat_rotation(got[1]))
            if t2 is not None and f2 > best[0]:
                best = (f2, got[1], t2)
    return best


def _vertex_key(ar: _Arena, sig, R, t):
    W = sig * (ar.VP @ R.T) + t
    return tuple(np.round(W, 9).reshape(-1)) + tuple(W.reshape(-1))


def _cluster(cands, gap):
    """Group (sigma, key, payload) tuples by sigma with the given gap."""
    out = []
    for item in sorted(cands, key=lambda c: (-c[0], c[1])):
        if not out or out[-1][0][0] - item[0] > gap:
            out.append([item])
        else:
            out[-1].append(item)
    return out


def _solve_space(P, Q, cfg: SolverConfig, reflected: bool):
    ar = _Arena(P, Q, reflected)
    na, nb, nc = cfg.grid if len(cfg.grid) == 3 else (0, 0, 0)
    cands = []
    for a in np.linspace(0, 2 * np.pi, na, endpoint=False):
        for b in np.linspace(0, np.pi, nb, endpoint=True):
            for g in np.linspace(0, 2 * np.pi, nc, endpoint=False):
                R = euler_matrix(a, b, g)
                f, t = ar.sigma_at(R)
                if t is not None:
                    cands.append((f, R))
    rng = np.random.default_rng(cfg.seed)
    for _ in range(cfg.starts):
        q = rng.normal(size=4)
        R = quat_rotation(q)
        f, t = ar.sigma_at(R)
        if t is not None:
            cands.append((f, R))
    if not cands:
        raise SolveError("no feasible rotation found (empty grid and starts?)")
    cands.sort(key=lambda c: -c[0])
    polished = []
    incumbent = cands[0][0]
    for rank, (f, R) in enumerate(cands):
        if rank >= cfg.polish_top and f < incumbent - cfg.polish_window:
            break
        if rank >= cfg.polish_cap:
            break
        sig, quat, t = _polish_one(ar, R, use_snap=cfg.snap)
        incumbent = max(incumbent, sig)
        polished.append((sig, _vertex_key(ar, sig, quat_rotation(quat), t), (quat, t)))
    return ar, polished, len(cands)


def _rotation_period(P: Polytope, Q: Polytope) -> float:
    rp, rq = P.recipe, Q.recipe
    if rp and rp[0] == "polygon" and rq and rq[0] == "polygon":
        return 2 * math.pi / math.lcm(int(rp[1]), int(rq[1]))
    return 2 * math.pi


def _compass_1d(ar: _Arena, th0, step, min_step=1e-12):
    f, t = ar.sigma_at(rot2d(th0))
    th = th0
    while step > min_step:
        for d in (step, -step):
            f2, t2 = ar.sigma_at(rot2d(th + d))
            if f2 > f + 1e-16:
                th, f, t = th + d, f2, t2
                break
        else:
            step *= 0.5
    return f, th, t


def _solve_plane(P, Q, cfg: SolverConfig, reflected: bool):
    ar = _Arena(P, Q, reflected)
    period = _rotation_period(P, Q)
    K = cfg.angle_samples or max(512, int(math.ceil(period / 2e-3)))
    thetas = np.linspace(0.0, period, K, endpoint=False)
    vals = []
    for th in thetas:
        f, t = ar.sigma_at(rot2d(th))
        vals.append(f)
    vals = np.array(vals)
    # local maxima on the circular grid, then the global top as backstop
    order = []
    for i in range(K):
        if vals[i] >= vals[(i - 1) % K] and vals[i] >= vals[(i + 1) % K]:
            order.append(i)
    order.sort(key=lambda i: -vals[i])
    top = order[:max(10, cfg.polish_top // 2)]
    polished = []
    step0 = period / K
    for i in top:
        f, th, t = _compass_1d(ar, thetas[i], step0)
        R = rot2d(th)
        polished.append((f, _vertex_key(ar, f, R, t), (np.array([th]), t)))
    return ar, polished, K


def solve_global(P: Polytope, Q: Polytope, config: SolverConfig | None = None) -> SolveReport:
    """Multistart rotation search; returns the best placement and the local
    optimum clusters. Deterministic for a fixed config."""
    cfg = config or SolverConfig()
    t0 = time.monotonic()
    variants = [False, True] if cfg.reflections else [False]
    all_pol = []
    starts = 0
    for refl in variants:
        if P.dim == 2:
            ar, pol, used = _solve_plane(P, Q, cfg, refl)
        else:
            if sum(cfg.grid) == 0 and cfg.starts == 0:
                raise SolveError("config has an empty grid and zero starts")
            ar, pol, used = _solve_space(P, Q, cfg, refl)
        all_pol += [(sig, key, params, refl) for sig, key, params in pol]
        starts += used
    clusters = _cluster([(sig, key, (params, refl)) for sig, key, params, refl in all_pol],
                        gap=max(1e-7, 10 * cfg.tolerance))
    local = []
    best_pl = None
    for ci, cluster in enumerate(clusters):
        top_sig = cluster[0][0]
        ties = [c for c in cluster if c[0] >= top_sig - 1e-9]
        sig, key, (params, refl) = min(ties, key=lambda c: c[1])
        rot, t = params
        pl = make_placement(P, sig, rot if P.dim == 3 else rot[0], t, Q, reflected=refl)
        if ci == 0:
            best_pl = pl
        local.append((pl.s, pl))
        if len(local) >= 16:
            break
    report = SolveReport(
        best=best_pl,
        local_optima=tuple(local),
        starts_used=starts,
        precision=repr(cfg.tolerance),
        seed=cfg.seed,
        wall_time=time.monotonic() - t0)
    if float(mp.mpf(best_pl.achieved_tol)) > cfg.tolerance:
        raise SolveError(
            f"best placement violates containment by {best_pl.achieved_tol}")
    return report


def polish_local(P: Polytope, Q: Polytope, placement: Placement,
                 tol: float = 1e-10) -> Placement:
    """Drive a near-feasible placement to a stationary rotation; sigma never
    decreases. Raises SolveError if descent stalls before reaching tol."""
    ar = _Arena(P, Q, placement.reflected)
    if ar.violation(placement.sigma_f, placement.rotation_matrix_f(),
                    placement.translation_f) > 1e-3 * ar.scale:
        raise SolveError("placement is too infeasible to polish (violation > 1e-3)")
    if P.dim == 2:
        f, th, t = _compass_1d(ar, float(mp.mpf(placement.rotation[0])),
                               step=0.02, min_step=min(tol, 1e-10))
        rot: object = th
    else:
        sig0, quat, t = _polish_one(ar, placement.rotation_matrix_f(),
                                    use_snap=True, step=0.02)
        f, rot = sig0, quat
    if f < placement.sigma_f - 1e-12:
        return placement
    return make_placement(P, f, rot, t, Q, reflected=placement.reflected)
