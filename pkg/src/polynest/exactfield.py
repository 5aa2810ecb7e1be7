"""Exact arithmetic in the real field Q(sqrt2, sqrt3, sqrt5).

Every closed-form dilation factor of the solid pairs lives in this tower
(the golden ratio is (1+sqrt5)/2, sqrt6 = sqrt2*sqrt3, sqrt10 = sqrt2*sqrt5),
so equalities between recovered polynomials and closed forms can be decided
with no tolerance at all. An element is a rational combination over the
basis {sqrt(r) : r | 30}; multiplication reduces radicands to squarefree
form, division goes through the Galois conjugates (flipping the signs of
sqrt2, sqrt3, sqrt5 independently), and minimal polynomials come from the
orbit product.
"""
from __future__ import annotations

import math
from fractions import Fraction

import mpmath as mp

RADICANDS = (1, 2, 3, 5, 6, 10, 15, 30)
_PRIMES = (2, 3, 5)


class FieldError(ValueError):
    pass


def _squarefree_split(n: int):
    """n = k^2 * m with m squarefree; returns (k, m)."""
    if n <= 0:
        raise FieldError("radicand must be positive")
    k, m = 1, 1
    for p in (2, 3, 5, 7, 11, 13):
        while n % (p * p) == 0:
            n //= p * p
            k *= p
        if n % p == 0:
            n //= p
            m *= p
    if n != 1:
        m *= n
    return k, m


class QuadExt:
    """An element of Q(sqrt2, sqrt3, sqrt5): sum of Fraction * sqrt(r)."""

    __slots__ = ("_c",)

    def __init__(self, value=0):
        if isinstance(value, QuadExt):
            self._c = dict(value._c)
        elif isinstance(value, dict):
            self._c = {r: Fraction(c) for r, c in value.items()
                       if r in RADICANDS and c != 0}
            if any(r not in RADICANDS for r in value):
                raise FieldError(f"radicand outside the tower in {value}")
        else:
            f = Fraction(value)
            self._c = {1: f} if f else {}

    @classmethod
    def sqrt(cls, n) -> "QuadExt":
        f = Fraction(n)
        if f < 0:
            raise FieldError("negative radicand")
        num_k, num_m = _squarefree_split(f.numerator) if f.numerator else (0, 1)
        if f.numerator == 0:
            return cls(0)
        den_k, den_m = _squarefree_split(f.denominator)
        # sqrt(a/b) = sqrt(a*b)/b
        k, m = _squarefree_split(num_m * den_m)
        m = m
        coeff = Fraction(num_k * k, den_k * den_m)
        if m not in RADICANDS:
            raise FieldError(f"sqrt({n}) is outside Q(sqrt2, sqrt3, sqrt5)")
        return cls({m: coeff})

    @classmethod
    def phi(cls) -> "QuadExt":
        return cls({1: Fraction(1, 2), 5: Fraction(1, 2)})

    def __bool__(self):
        return bool(self._c)

    def is_rational(self) -> bool:
        return all(r == 1 for r in self._c)

    def rational_value(self) -> Fraction:
        if not self.is_rational():
            raise FieldError(f"{self} is irrational")
        return self._c.get(1, Fraction(0))

    def __eq__(self, other):
        other = other if isinstance(other, QuadExt) else QuadExt(other)
        return self._c == other._c

    def __hash__(self):
        return hash(frozenset(self._c.items()))

    def __neg__(self):
        return QuadExt({r: -c for r, c in self._c.items()})

    def __add__(self, other):
        other = other if isinstance(other, QuadExt) else QuadExt(other)
        out = dict(self._c)
        for r, c in other._c.items():
            out[r] = out.get(r, Fraction(0)) + c
        return QuadExt(out)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-(other if isinstance(other, QuadExt) else QuadExt(other)))

    def __rsub__(self, other):
        return QuadExt(other) - self

    def __mul__(self, other):
        other = other if isinstance(other, QuadExt) else QuadExt(other)
        out: dict = {}
        for r1, c1 in self._c.items():
            for r2, c2 in other._c.items():
                g = math.gcd(r1, r2)
                r = (r1 // g) * (r2 // g)
                out[r] = out.get(r, Fraction(0)) + c1 * c2 * g
        return QuadExt(out)

    __rmul__ = __mul__

    def conjugates(self) -> list:
        """The 8 images under independently flipping sqrt2, sqrt3, sqrt5."""
        outs = []
        for s2 in (1, -1):
            for s3 in (1, -1):
                for s5 in (1, -1):
                    signs = {2: s2, 3: s3, 5: s5}
                    d = {}
                    for r, c in self._c.items():
                        sg = 1
                        for p in _PRIMES:
                            if r % p == 0:
                                sg *= signs[p]
                        d[r] = c * sg
                    outs.append(QuadExt(d))
        return outs

    def inverse(self) -> "QuadExt":
        if not self._c:
            raise ZeroDivisionError("QuadExt division by zero")
        num = QuadExt(1)
        for conj in self.conjugates()[1:]:
            num = num * conj
        den = self * num
        if not den.is_rational():
            raise FieldError("norm failed to land in the rationals")
        return num * QuadExt(Fraction(1) / den.rational_value())

    def __truediv__(self, other):
        other = other if isinstance(other, QuadExt) else QuadExt(other)
        return self * other.inverse()

    def __rtruediv__(self, other):
        return QuadExt(other) * self.inverse()

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        out = QuadExt(1)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def to_mp(self, dps: int = 50):
        with mp.workdps(dps + 10):
            total = mp.fsum(mp.mpf(c.numerator) / c.denominator * mp.sqrt(r)
                            for r, c in self._c.items())
            return +total

    def min_poly(self) -> list:
        """Primitive integer minimal polynomial, coefficients low to high."""
        orbit = []
        for conj in self.conjugates():
            if conj not in orbit:
                orbit.append(conj)
        coeffs = [QuadExt(1)]
        for y in orbit:
            nxt = [QuadExt(0)] * (len(coeffs) + 1)
            for i, c in enumerate(coeffs):
                nxt[i + 1] = nxt[i + 1] + c
                nxt[i] = nxt[i] - c * y
            coeffs = nxt
        rats = []
        for c in coeffs:
            if not c.is_rational():
                raise FieldError("orbit product has irrational coefficients")
            rats.append(c.rational_value())
        den = math.lcm(*(f.denominator for f in rats)) if rats else 1
        ints = [int(f * den) for f in rats]
        g = math.gcd(*(abs(i) for i in ints if i)) or 1
        ints = [i // g for i in ints]
        if ints[-1] < 0:
            ints = [-i for i in ints]
        return ints

    def __repr__(self):
        if not self._c:
            return "QuadExt(0)"
        parts = []
        for r in RADICANDS:
            if r in self._c:
                c = self._c[r]
                parts.append(f"{c}" if r == 1 else f"{c}*sqrt({r})")
        return "QuadExt(" + " + ".join(parts) + ")"


def eval_poly(coeffs, x: QuadExt) -> QuadExt:
    """Horner evaluation of an integer/rational polynomial at a field point."""
    acc = QuadExt(0)
    for c in reversed(list(coeffs)):
        acc = acc * x + QuadExt(c)
    return acc


def _sqrt2():
    return QuadExt.sqrt(2)


def _sqrt5():
    return QuadExt.sqrt(5)


def exact_sigma(q_kind: str, p_kind: str) -> QuadExt | None:
    """Known closed-form dilation factor for p_kind placed inside q_kind.

    None for the two pairs whose factor is a higher-degree algebraic number
    (T inside I and D inside T) and for the diagonal.
    """
    phi = QuadExt.phi()
    r2, r3, r5 = QuadExt.sqrt(2), QuadExt.sqrt(3), QuadExt.sqrt(5)
    r6, r10 = QuadExt.sqrt(6), QuadExt.sqrt(10)
    half = Fraction(1, 2)
    table = {
        ("T", "C"): 1 / (1 + Fraction(2, 3) * r3 + half * r6),
        ("T", "O"): QuadExt(half),
        ("T", "I"): 1 / (phi ** 2 * r2),
        ("C", "T"): r2,
        ("C", "O"): Fraction(3, 4) * r2,
        ("C", "D"): (1 - half * r10 + half * r2 + r5) / (r2 * phi ** 3),
        ("C", "I"): 1 / phi,
        ("O", "T"): QuadExt(1),
        ("O", "C"): 2 - r2,
        ("O", "D"): (25 * r2 - 9 * r10) / 22,
        ("O", "I"): r2 / phi ** 2,
        ("D", "T"): phi * r2,
        ("D", "C"): phi,
        ("D", "O"): phi ** 2 / r2,
        ("D", "I"): 1 / (2 * phi) + 1,
        ("I", "C"): (5 + 7 * r5) / 22,
        ("I", "O"): half * (1 - half * r10 + half * r2 + r5),
        ("I", "D"): (15 - r5) / 22,
    }
    return table.get((q_kind, p_kind))


def circumradius_exact(kind: str) -> QuadExt:
    """Unit-edge circumradius, for the kinds where it lies in the tower."""
    phi = QuadExt.phi()
    vals = {
        "T": QuadExt.sqrt(6) / 4,
        "C": QuadExt.sqrt(3) / 2,
        "O": QuadExt.sqrt(2) / 2,
        "D": QuadExt.sqrt(3) * phi / 2,
    }
    if kind not in vals:
        raise FieldError(f"circumradius of {kind} is outside the tower")
    return vals[kind]


def inradius_exact(kind: str) -> QuadExt:
    """Unit-edge inradius, for the kinds where it lies in the tower."""
    phi = QuadExt.phi()
    vals = {
        "T": QuadExt.sqrt(6) / 12,
        "C": QuadExt(Fraction(1, 2)),
        "O": QuadExt.sqrt(6) / 6,
        "I": phi ** 2 * QuadExt.sqrt(3) / 6,
    }
    if kind not in vals:
        raise FieldError(f"inradius of {kind} is outside the tower")
    return vals[kind]


def dual_edge_product(kind: str) -> QuadExt:
    """Exact e(P) * e(P polar) for concentric reciprocals w.r.t. the unit
    sphere. Polarity is an involution, so the product for a kind equals the
    product for its dual; it is computed from the cube and dodecahedron
    sides, whose radii stay inside the tower."""
    base = {"C": "C", "O": "C", "D": "D", "I": "D"}.get(kind)
    if base is None:
        raise FieldError(f"no dual edge product for {kind}")
    dual = {"C": "O", "D": "I"}[base]
    # edge e gives circumradius R(e) = R1*e; the polar body has inradius
    # 1/R(e), so its edge is 1/(R1*e*r1(dual)); the product is 1/(R1*r1).
    return 1 / (circumradius_exact(base) * inradius_exact(dual))
