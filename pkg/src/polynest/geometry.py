"""Convex polytopes with paired V/H representations at controlled precision.

Coordinates are stored as decimal strings carrying `precision_digits`
significant digits. Builtin bodies (platonic solids, regular polygons, their
polar duals) also carry a regeneration recipe, so `at_precision(d)` can
rebuild them exactly at any requested precision; that is what lets the
refinement stage evaluate facet data at hundreds of digits.

Conventions: halfspace means a.x <= b with unit normal; platonic solids and
polygons are centered at the origin; the cube is axis aligned; the
dodecahedron is oriented with 6 edges parallel to the coordinate axes; a
polygon has one vertex on the positive x axis.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from functools import cached_property

import mpmath as mp
import numpy as np

GUARD_DPS = 15
DEFAULT_DIGITS = 50

SOLIDS = {
    "T": "tetrahedron",
    "C": "cube",
    "O": "octahedron",
    "D": "dodecahedron",
    "I": "icosahedron",
}
_KIND_ALIASES = {name: letter for letter, name in SOLIDS.items()} | {s: s for s in SOLIDS}


class GeometryError(ValueError):
    pass


class PrecisionError(GeometryError):
    """Requested precision exceeds what the stored coordinates carry."""


def _fmt(x, digits: int) -> str:
    return mp.nstr(mp.mpf(x), digits)


@dataclass(frozen=True)
class Halfspace:
    """One constraint a.x <= b, normal stored unit length."""

    normal: tuple[str, ...]
    offset: str


@dataclass(frozen=True)
class Polytope:
    dim: int
    name: str
    vertices: tuple[tuple[str, ...], ...]
    halfspaces: tuple[Halfspace, ...]
    precision_digits: int = DEFAULT_DIGITS
    recipe: tuple | None = field(default=None, compare=False)

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_facets(self) -> int:
        return len(self.halfspaces)

    def at_precision(self, digits: int) -> "Polytope":
        """This body with coordinates good to `digits` significant digits."""
        if digits <= self.precision_digits:
            return self
        if self.recipe is None:
            raise PrecisionError(
                f"{self.name}: stored at {self.precision_digits} digits, "
                f"{digits} requested and no regeneration recipe")
        return build_from_recipe(self.recipe, digits)

    def vertices_mp(self, dps: int | None = None) -> list[list[mp.mpf]]:
        src = self if dps is None or dps <= self.precision_digits else self.at_precision(dps)
        with mp.workdps(dps or self.precision_digits):
            return [[mp.mpf(c) for c in v] for v in src.vertices]

    def halfspaces_mp(self, dps: int | None = None):
        """Returns (normals, offsets) as mp lists."""
        src = self if dps is None or dps <= self.precision_digits else self.at_precision(dps)
        with mp.workdps(dps or self.precision_digits):
            normals = [[mp.mpf(c) for c in h.normal] for h in src.halfspaces]
            offsets = [mp.mpf(h.offset) for h in src.halfspaces]
        return normals, offsets

    def centroid_mp(self, dps: int | None = None) -> list[mp.mpf]:
        vs = self.vertices_mp(dps)
        with mp.workdps(dps or self.precision_digits):
            return [mp.fsum(v[j] for v in vs) / len(vs) for j in range(self.dim)]

    @cached_property
    def vertex_array(self) -> np.ndarray:
        return np.array([[float(mp.mpf(c)) for c in v] for v in self.vertices])

    @cached_property
    def normal_array(self) -> np.ndarray:
        return np.array([[float(mp.mpf(c)) for c in h.normal] for h in self.halfspaces])

    @cached_property
    def offset_array(self) -> np.ndarray:
        return np.array([float(mp.mpf(h.offset)) for h in self.halfspaces])

    def to_json_dict(self) -> dict:
        return {
            "dim": self.dim,
            "name": self.name,
            "vertices": [list(v) for v in self.vertices],
            "halfspaces": [{"normal": list(h.normal), "offset": h.offset}
                           for h in self.halfspaces],
            "precision_digits": self.precision_digits,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2)

    @classmethod
    def from_json_dict(cls, d: dict) -> "Polytope":
        return cls(
            dim=int(d["dim"]),
            name=str(d["name"]),
            vertices=tuple(tuple(str(c) for c in v) for v in d["vertices"]),
            halfspaces=tuple(Halfspace(tuple(str(c) for c in h["normal"]), str(h["offset"]))
                             for h in d["halfspaces"]),
            precision_digits=int(d["precision_digits"]),
        )

    @classmethod
    def from_json(cls, text: str) -> "Polytope":
        return cls.from_json_dict(json.loads(text))


def _assemble(dim, name, verts, normals, digits, recipe) -> Polytope:
    """Normalize normals, compute offsets as max support, format strings."""
    hs = []
    for a in normals:
        nrm = mp.sqrt(mp.fsum(c * c for c in a))
        a = [c / nrm for c in a]
        b = max(mp.fsum(ai * vi for ai, vi in zip(a, v)) for v in verts)
        hs.append(Halfspace(tuple(_fmt(c, digits) for c in a), _fmt(b, digits)))
    vs = tuple(tuple(_fmt(c, digits) for c in v) for v in verts)
    return Polytope(dim, name, vs, tuple(hs), digits, recipe)


def _cyclic(a, b, c, s1, s2):
    """The three cyclic shifts of (a, s1*b, s2*c)."""
    return [(a, s1 * b, s2 * c), (s2 * c, a, s1 * b), (s1 * b, s2 * c, a)]


def make_platonic(kind: str, edge, digits: int = DEFAULT_DIGITS) -> Polytope:
    """A regular solid with the given edge length, centered at the origin.

    kind: one of T, C, O, D, I (or the full name). Cube axis aligned;
    tetrahedron on alternating cube corners; dodecahedron with 6 edges
    parallel to the axes.
    """
    k = _KIND_ALIASES.get(str(kind))
    if k is None:
        raise GeometryError(f"unknown solid kind {kind!r}")
    edge_s = str(edge)
    with mp.workdps(digits + GUARD_DPS):
        e = mp.mpf(edge_s)
        if e <= 0:
            raise GeometryError("edge length must be positive")
        phi = (1 + mp.sqrt(5)) / 2
        one = mp.mpf(1)
        if k == "T":
            s = e / (2 * mp.sqrt(2))
            verts = [(s, s, s), (s, -s, -s), (-s, s, -s), (-s, -s, s)]
            normals = [tuple(-c for c in v) for v in verts]
        elif k == "C":
            s = e / 2
            verts = [tuple(s * x for x in p) for p in itertools.product((-1, 1), repeat=3)]
            normals = [(one, 0, 0), (-one, 0, 0), (0, one, 0),
                       (0, -one, 0), (0, 0, one), (0, 0, -one)]
        elif k == "O":
            s = e / mp.sqrt(2)
            verts = [(s, 0, 0), (-s, 0, 0), (0, s, 0), (0, -s, 0), (0, 0, s), (0, 0, -s)]
            normals = [tuple(mp.mpf(x) for x in p)
                       for p in itertools.product((-1, 1), repeat=3)]
        elif k == "D":
            s = e * phi / 2
            verts = [tuple(s * x for x in p) for p in itertools.product((-1, 1), repeat=3)]
            for s1 in (-1, 1):
                for s2 in (-1, 1):
                    verts += [tuple(s * x for x in p)
                              for p in _cyclic(mp.mpf(0), 1 / phi, phi, s1, s2)]
            normals = []
            for s1 in (-1, 1):
                for s2 in (-1, 1):
                    normals += _cyclic(mp.mpf(0), phi, one, s1, s2)
        else:  # icosahedron
            s = e / 2
            verts = []
            for s1 in (-1, 1):
                for s2 in (-1, 1):
                    verts += [tuple(s * x for x in p)
                              for p in _cyclic(mp.mpf(0), one, phi, s1, s2)]
            normals = [tuple(mp.mpf(x) for x in p)
                       for p in itertools.product((-1, 1), repeat=3)]
            for s1 in (-1, 1):
                for s2 in (-1, 1):
                    normals += _cyclic(mp.mpf(0), phi, 1 / phi, s1, s2)
        return _assemble(3, SOLIDS[k], verts, normals, digits, ("platonic", k, edge_s))


def make_polygon(n: int, edge, digits: int = DEFAULT_DIGITS) -> Polytope:
    """Regular n-gon, centroid at origin, one vertex on the positive x axis."""
    n = int(n)
    if n < 3:
        raise GeometryError("polygon needs n >= 3")
    edge_s = str(edge)
    with mp.workdps(digits + GUARD_DPS):
        e = mp.mpf(edge_s)
        if e <= 0:
            raise GeometryError("edge length must be positive")
        R = e / (2 * mp.sin(mp.pi / n))
        verts = [(R * mp.cos(2 * mp.pi * k / n), R * mp.sin(2 * mp.pi * k / n))
                 for k in range(n)]
        normals = [(mp.cos((2 * k + 1) * mp.pi / n), mp.sin((2 * k + 1) * mp.pi / n))
                   for k in range(n)]
        return _assemble(2, f"{n}-gon", verts, normals, digits, ("polygon", n, edge_s))


def build_from_recipe(recipe: tuple, digits: int) -> Polytope:
    tag = recipe[0]
    if tag == "platonic":
        return make_platonic(recipe[1], recipe[2], digits)
    if tag == "polygon":
        return make_polygon(recipe[1], recipe[2], digits)
    if tag == "polar":
        return polar_dual(build_from_recipe(recipe[1], digits))
    raise GeometryError(f"unknown recipe {recipe!r}")


def inradius(P: Polytope, dps: int | None = None) -> mp.mpf:
    """Distance from the centroid to the nearest facet plane."""
    if not P.halfspaces or not P.vertices:
        raise GeometryError("both representations required")
    with mp.workdps(dps or P.precision_digits):
        c = P.centroid_mp(dps)
        normals, offsets = P.halfspaces_mp(dps)
        return min(b - mp.fsum(ai * ci for ai, ci in zip(a, c))
                   for a, b in zip(normals, offsets))


def circumradius(P: Polytope, dps: int | None = None) -> mp.mpf:
    """Distance from the centroid to the farthest vertex."""
    if not P.vertices:
        raise GeometryError("vertex representation required")
    with mp.workdps(dps or P.precision_digits):
        c = P.centroid_mp(dps)
        return max(mp.sqrt(mp.fsum((vi - ci) ** 2 for vi, ci in zip(v, c)))
                   for v in P.vertices_mp(dps))


def polar_dual(P: Polytope) -> Polytope:
    """The polar body {y : y.x <= 1 for all x in P}; origin must be interior.

    Facets of P map to vertices a/b of the dual; vertices v of P map to
    facets with normal v/|v| and offset 1/|v|.
    """
    digits = P.precision_digits
    with mp.workdps(digits + GUARD_DPS):
        normals, offsets = P.halfspaces_mp()
        if min(offsets) <= mp.mpf(10) ** (-digits // 2):
            raise GeometryError("origin is not strictly interior")
        dverts = [[ai / b for ai in a] for a, b in zip(normals, offsets)]
        dnormals = [[mp.mpf(c) for c in v] for v in P.vertices]
        hs = []
        for v in dnormals:
            nrm = mp.sqrt(mp.fsum(c * c for c in v))
            hs.append(Halfspace(tuple(_fmt(c / nrm, digits) for c in v),
                                _fmt(1 / nrm, digits)))
        vs = tuple(tuple(_fmt(c, digits) for c in v) for v in dverts)
    recipe = ("polar", P.recipe) if P.recipe is not None else None
    return Polytope(P.dim, f"polar({P.name})", vs, tuple(hs), digits, recipe)


def contains(Q: Polytope, x, tol=0) -> bool:
    """True iff a.x <= b + tol for every halfspace of Q."""
    if len(x) != Q.dim:
        raise GeometryError(f"point has dim {len(x)}, polytope has dim {Q.dim}")
    with mp.workdps(Q.precision_digits):
        pt = [mp.mpf(c) if isinstance(c, str) else mp.mpf(repr(c)) if isinstance(c, float) else mp.mpf(c) for c in x]
        normals, offsets = Q.halfspaces_mp()
        t = mp.mpf(str(tol))
        return all(mp.fsum(ai * xi for ai, xi in zip(a, pt)) <= b + t
                   for a, b in zip(normals, offsets))


def centrally_symmetric(P: Polytope, tol="1e-25") -> bool:
    """Vertex set closed under reflection through the centroid."""
    with mp.workdps(P.precision_digits):
        c = P.centroid_mp()
        vs = P.vertices_mp()
        t = mp.mpf(tol)
        for v in vs:
            refl = [2 * ci - vi for ci, vi in zip(c, v)]
            if not any(all(abs(ri - wi) < t for ri, wi in zip(refl, w)) for w in vs):
                return False
        return True


def hull_2d3d(points, digits: int = DEFAULT_DIGITS, name: str = "hull") -> Polytope:
    """Convex hull facets of a 2D or 3D point set.

    Brute-force support-plane enumeration with coplanar merging at 1e-25;
    fine for the desk-scale inputs this package handles (n <= a few dozen).
    """
    with mp.workdps(digits + GUARD_DPS):
        pts = [[mp.mpf(str(c)) if not isinstance(c, str) else mp.mpf(c) for c in p]
               for p in points]
        if not pts or len(pts[0]) not in (2, 3):
            raise GeometryError("hull supports dim 2 or 3")
        dim = len(pts[0])
        scale = max(max(abs(c) for c in p) for p in pts)
        eps = scale * mp.mpf("1e-25")
        facets = []
        idx_sets = itertools.combinations(range(len(pts)), dim)
        for idx in idx_sets:
            base = pts[idx[0]]
            if dim == 2:
                d = [pts[idx[1]][j] - base[j] for j in range(2)]
                a = [d[1], -d[0]]
            else:
                u = [pts[idx[1]][j] - base[j] for j in range(3)]
                w = [pts[idx[2]][j] - base[j] for j in range(3)]
                a = [u[1] * w[2] - u[2] * w[1],
                     u[2] * w[0] - u[0] * w[2],
                     u[0] * w[1] - u[1] * w[0]]
            nrm = mp.sqrt(mp.fsum(c * c for c in a))
            if nrm < eps:
                continue
            a = [c / nrm for c in a]
            b = mp.fsum(ai * bi for ai, bi in zip(a, base))
            side = [mp.fsum(ai * pi for ai, pi in zip(a, p)) - b for p in pts]
            if all(s <= eps for s in side):
                facets.append((a, b))
            elif all(s >= -eps for s in side):
                facets.append(([-c for c in a], -b))
        merged = []
        for a, b in facets:
            if not any(all(abs(ai - mi) < mp.mpf("1e-25") for ai, mi in zip(a, m[0]))
                       and abs(b - m[1]) < mp.mpf("1e-25") for m in merged):
                merged.append((a, b))
        if not merged:
            raise GeometryError("degenerate input: points do not span the space")
        extreme = []
        for p in pts:
            on = sum(1 for a, b in merged
                     if abs(mp.fsum(ai * pi for ai, pi in zip(a, p)) - b) < mp.mpf("1e-20"))
            if on >= dim and not any(
                    all(abs(pi - qi) < eps for pi, qi in zip(p, q)) for q in extreme):
                extreme.append(p)
        hs = tuple(Halfspace(tuple(_fmt(c, digits) for c in a), _fmt(b, digits))
                   for a, b in merged)
        vs = tuple(tuple(_fmt(c, digits) for c in p) for p in extreme)
    return Polytope(dim, name, vs, hs, digits, None)


def facet_vertices(P: Polytope, k: int, tol="1e-20") -> list[int]:
    """Indices of vertices incident to facet k, ordered around the facet."""
    with mp.workdps(P.precision_digits):
        normals, offsets = P.halfspaces_mp()
        a, b = normals[k], offsets[k]
        vs = P.vertices_mp()
        t = mp.mpf(tol)
        inc = [i for i, v in enumerate(vs)
               if abs(mp.fsum(ai * vi for ai, vi in zip(a, v)) - b) < t]
        if P.dim == 2 or len(inc) <= 2:
            return inc
        center = [mp.fsum(vs[i][j] for i in inc) / len(inc) for j in range(3)]
        ref = [vs[inc[0]][j] - center[j] for j in range(3)]
        u = _unit(ref)
        w = _unit(_cross(a, u))
        def angle(i):
            d = [vs[i][j] - center[j] for j in range(3)]
            return mp.atan2(mp.fsum(dj * wj for dj, wj in zip(d, w)),
                            mp.fsum(dj * uj for dj, uj in zip(d, u)))
        return sorted(inc, key=angle)


def _cross(u, w):
    return [u[1] * w[2] - u[2] * w[1], u[2] * w[0] - u[0] * w[2], u[0] * w[1] - u[1] * w[0]]


def _unit(v):
    nrm = mp.sqrt(mp.fsum(c * c for c in v))
    return [c / nrm for c in v]


def to_off(P: Polytope) -> str:
    """OFF text for a 3D body, coordinates at 17 significant digits."""
    if P.dim != 3:
        raise GeometryError("OFF export is for 3D bodies")
    nv, nf = P.n_vertices, P.n_facets
    lines = ["OFF", f"{nv} {nf} {nv + nf - 2}"]
    for v in P.vertices:
        lines.append(" ".join(f"{float(mp.mpf(c)):.17g}" for c in v))
    for k in range(nf):
        inc = facet_vertices(P, k)
        lines.append(" ".join(str(x) for x in [len(inc)] + inc))
    return "\n".join(lines) + "\n"


def validate(P: Polytope, tol="1e-30"):
    """Raise GeometryError if the two representations disagree.

    Checks: every vertex inside every halfspace within tol, unit normals
    within tol, every facet carrying at least dim affinely independent
    incident vertices.
    """
    with mp.workdps(P.precision_digits):
        t = mp.mpf(tol)
        vs = P.vertices_mp()
        normals, offsets = P.halfspaces_mp()
        for a in normals:
            if abs(mp.fsum(c * c for c in a) - 1) > t:
                raise GeometryError("halfspace normal is not unit length")
        for i, v in enumerate(vs):
            for a, b in zip(normals, offsets):
                if mp.fsum(ai * vi for ai, vi in zip(a, v)) - b > t:
                    raise GeometryError(f"vertex {i} violates a halfspace")
        for k, (a, b) in enumerate(zip(normals, offsets)):
            inc = [v for v in vs
                   if abs(mp.fsum(ai * vi for ai, vi in zip(a, v)) - b) <= mp.mpf("1e-20")]
            if len(inc) < P.dim:
                raise GeometryError(f"facet {k} touches fewer than dim vertices")
