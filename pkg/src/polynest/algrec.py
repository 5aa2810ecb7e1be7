"""Integer minimal polynomials from high-precision decimals, verified.

Recovery is an integer-relation problem: if x is algebraic of degree d,
the lattice spanned by rows [e_i | round(N * x^i)] contains a short vector
whose first d+1 entries are the minimal polynomial's coefficients. LLL
finds it when enough digits are supplied. A candidate is accepted only if
its normalized residual beats 10^(-D/2), far below lattice noise; the
result is made squarefree and primitive, an isolating interval is attached,
and verification reruns exact Sturm counting plus a Newton shrink test on
the (exactly re-evaluated) polynomial.

Coefficient lists are low degree first throughout this module.
"""
from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass
from fractions import Fraction

import gmpy2
import mpmath as mp

mpz = gmpy2.mpz

ACCEPT_GUARD = 40  # lattice scale N = 10^(D - ACCEPT_GUARD)


class AlgrecError(ValueError):
    pass


class VerificationFailed(AlgrecError):
    def __init__(self, check: str, report: dict):
        super().__init__(f"verification failed at check {check!r}")
        self.check = check
        self.report = report


# ---------------------------------------------------------------- polynomials

def poly_trim(c):
    c = list(c)
    while len(c) > 1 and c[-1] == 0:
        c.pop()
    return c


def poly_degree(c) -> int:
    return len(poly_trim(c)) - 1


def poly_derivative(c):
    return [i * ci for i, ci in enumerate(c)][1:] or [0]


def poly_eval_frac(c, x: Fraction) -> Fraction:
    acc = Fraction(0)
    for ci in reversed(c):
        acc = acc * x + ci
    return acc


def poly_eval_mp(c, x):
    acc = mp.mpf(0)
    for ci in reversed(c):
        acc = acc * x + ci
    return acc


def poly_content(c) -> int:
    g = 0
    for ci in c:
        g = math.gcd(g, abs(int(ci)))
    return g or 1


def poly_primitive(c):
    g = poly_content(c)
    out = [int(ci) // g for ci in c]
    if out[-1] < 0:
        out = [-ci for ci in out]
    return out


def _poly_divmod_frac(a, b):
    a = [Fraction(x) for x in a]
    b = [Fraction(x) for x in b]
    q = [Fraction(0)] * max(1, len(a) - len(b) + 1)
    r = a[:]
    while len(r) >= len(b) and any(r):
        if r[-1] == 0:
            r.pop()
            continue
        s = r[-1] / b[-1]
        k = len(r) - len(b)
        q[k] = s
        for i, bi in enumerate(b):
            r[i + k] -= s * bi
        r.pop()
    return q, poly_trim(r)


def poly_gcd(a, b):
    """Primitive integer gcd of integer polynomials (Euclid over Q)."""
    a = poly_trim([int(x) for x in a])
    b = poly_trim([int(x) for x in b])
    if poly_degree(a) < poly_degree(b):
        a, b = b, a
    A = [Fraction(x) for x in a]
    B = [Fraction(x) for x in b]
    while any(B) and poly_degree(B) >= 0 and B != [Fraction(0)]:
        _, R = _poly_divmod_frac(A, B)
        A, B = B, R
        if B == [] or B == [Fraction(0)] or not any(B):
            break
    den = math.lcm(*(f.denominator for f in A))
    return poly_primitive([int(f * den) for f in A])


def squarefree_part(c):
    """c divided by gcd(c, c'), primitive with positive leading term."""
    c = poly_primitive(poly_trim(c))
    g = poly_gcd(c, poly_derivative(c))
    if poly_degree(g) == 0:
        return c
    q, r = _poly_divmod_frac(c, g)
    if any(r):
        raise AlgrecError("squarefree division left a remainder")
    den = math.lcm(*(f.denominator for f in q))
    return poly_primitive([int(f * den) for f in q])


def is_squarefree(c) -> bool:
    return poly_degree(poly_gcd(c, poly_derivative(c))) == 0


# ----------------------------------------------------------------------- LLL

def lll_reduce(basis, delta_num: int = 3, delta_den: int = 4):
    """Integral LLL (integer Gram-Schmidt with d[], lambda[][] bookkeeping).

    basis: list of integer rows. Returns the reduced rows as plain ints.
    """
    b = [[mpz(x) for x in row] for row in basis]
    n = len(b)

    def dot(u, v):
        s = mpz(0)
        for x, y in zip(u, v):
            s += x * y
        return s

    d = [mpz(1)] * (n + 1)
    lam = [[mpz(0)] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1):
            u = dot(b[i], b[j])
            for k in range(j):
                u = (d[k + 1] * u - lam[i][k] * lam[j][k]) // d[k]
            if j < i:
                lam[i][j] = u
            else:
                d[i + 1] = u

    def reduce_row(k, l):
        if 2 * abs(lam[k][l]) > d[l + 1]:
            q = (2 * lam[k][l] + d[l + 1]) // (2 * d[l + 1])
            for idx in range(len(b[k])):
                b[k][idx] -= q * b[l][idx]
            lam[k][l] -= q * d[l + 1]
            for i in range(l):
                lam[k][i] -= q * lam[l][i]

    k = 1
    while k < n:
        reduce_row(k, k - 1)
        lhs = d[k + 1] * d[k - 1] * delta_den
        rhs = delta_num * d[k] * d[k] - delta_den * lam[k][k - 1] * lam[k][k - 1]
        if lhs < rhs:
            b[k], b[k - 1] = b[k - 1], b[k]
            for j in range(k - 1):
                lam[k][j], lam[k - 1][j] = lam[k - 1][j], lam[k][j]
            lam_ = lam[k][k - 1]
            bnew = (d[k - 1] * d[k + 1] + lam_ * lam_) // d[k]
            for i in range(k + 1, n):
                t = lam[i][k]
                lam[i][k] = (d[k + 1] * lam[i][k - 1] - lam_ * t) // d[k]
                lam[i][k - 1] = (bnew * t + lam[i][k] * lam_) // d[k + 1]
            d[k] = bnew
            k = max(k - 1, 1)
        else:
            for l in range(k - 2, -1, -1):
                reduce_row(k, l)
            k += 1
    return [[int(x) for x in row] for row in b]


# ------------------------------------------------------------------ recovery

@dataclass(frozen=True)
class AlgebraicNumber:
    poly: tuple  # int coefficients, low degree first, primitive, lead > 0
    interval: tuple  # (Fraction lo, Fraction hi), exactly one real root inside
    approx: str
    digits_used: int
    minimality: str  # "certified" | "unknown"

    @property
    def degree(self) -> int:
        return poly_degree(self.poly)

    def to_json_dict(self) -> dict:
        return {
            "coeffs": [str(c) for c in self.poly],
            "interval": [_frac_str(self.interval[0]), _frac_str(self.interval[1])],
            "approx": self.approx,
            "digits_used": self.digits_used,
            "minimality": self.minimality,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2)

    @classmethod
    def from_json_dict(cls, d: dict) -> "AlgebraicNumber":
        return cls(
            poly=tuple(int(c) for c in d["coeffs"]),
            interval=(Fraction(d["interval"][0]), Fraction(d["interval"][1])),
            approx=d["approx"],
            digits_used=int(d["digits_used"]),
            minimality=d["minimality"],
        )

    @classmethod
    def from_json(cls, text: str) -> "AlgebraicNumber":
        return cls.from_json_dict(json.loads(text))


def _frac_str(f: Fraction) -> str:
    return f"{f.numerator}/{f.denominator}"


def _sig_digits(xstr: str) -> int:
    mantissa = xstr.split("e")[0].split("E")[0]
    return sum(ch.isdigit() for ch in mantissa)


def _relation_rows(x, degree: int, scale_pow: int):
    N = mpz(10) ** scale_pow
    rows = []
    xi = mp.mpf(1)
    for i in range(degree + 1):
        v = [mpz(0)] * (degree + 2)
        v[i] = mpz(1)
        v[degree + 1] = mpz(int(mp.floor(N * xi + mp.mpf("0.5"))))
        rows.append(v)
        xi = xi * x
    return rows


def _accepted(cand, x, digits: int, scale_pow: int, lattice_degree: int) -> bool:
    """Residual far below half the supplied digits, and the coefficient
    vector far shorter than the lattice noise floor 10^(scale/(deg+1)).
    The second gate rejects spurious short vectors that any reduced
    lattice contains when no true relation exists at the probed degree."""
    with mp.workdps(digits + 20):
        val = abs(poly_eval_mp(cand, x))
        nrm = mp.sqrt(mp.fsum(mp.mpf(int(c)) ** 2 for c in cand))
        if nrm == 0:
            return False
        if val / nrm >= mp.mpf(10) ** (-digits // 2):
            return False
        floor_log = mp.mpf(3) * scale_pow / (4 * (lattice_degree + 1))
        return mp.log10(nrm) <= floor_log


def _search_degree(xstr: str, degree: int, digits: int):
    """One LLL pass at a fixed degree; best accepted candidate or None."""
    with mp.workdps(digits + 20):
        x = mp.mpf(xstr)
        scale_pow = max(20, digits - ACCEPT_GUARD)
        rows = _relation_rows(x, degree, scale_pow)
        red = lll_reduce(rows)
        for row in red:
            cand = poly_trim(row[:degree + 1])
            if poly_degree(cand) < 1:
                continue
            if _accepted(cand, x, digits, scale_pow, degree):
                return poly_primitive(cand)
    return None


def _strip_rational_roots(cand, xstr: str, digits: int):
    """Remove factors (q*t - p) whose rational root is not our x."""
    with mp.workdps(digits + 10):
        x = mp.mpf(xstr)
        changed = True
        while changed and poly_degree(cand) > 1:
            changed = False
            c0, cd = cand[0], cand[-1]
            if c0 == 0:
                if abs(x) > mp.mpf(10) ** (-digits // 2):
                    cand = poly_trim(cand[1:])
                    changed = True
                    continue
            for p in _small_divisors(abs(c0) or 1):
                for q in _small_divisors(abs(cd)):
                    for sgn in (1, -1):
                        r = Fraction(sgn * p, q)
                        if poly_eval_frac(cand, r) == 0:
                            if abs(x - mp.mpf(r.numerator) / r.denominator) > \
                                    mp.mpf(10) ** (-digits // 2):
                                quo, rem = _poly_divmod_frac(
                                    cand, [-r.numerator, r.denominator])
                                if not any(rem):
                                    den = math.lcm(*(f.denominator for f in quo))
                                    cand = poly_primitive([int(f * den) for f in quo])
                                    changed = True
                                    break
                    if changed:
                        break
                if changed:
                    break
    return cand


def _small_divisors(n: int, cap: int = 64):
    n = abs(n)
    out = [d for d in range(1, min(n, 10 ** 6) + 1) if n % d == 0]
    if len(out) > cap:
        out = out[:cap // 2] + out[-cap // 2:]
    return out or [1]


def isolating_interval(poly, xstr: str, digits: int):
    """Rational interval around x certified by Sturm to hold one root."""
    k = max(5, digits // 2)
    with mp.workdps(digits + 10):
        x = mp.mpf(xstr)
        center = Fraction(mp.nstr(x, k + 10)).limit_denominator(10 ** (k + 5))
    lo = center - Fraction(1, 10 ** k)
    hi = center + Fraction(1, 10 ** k)
    return lo, hi


def min_poly_guess(xstr: str, max_degree: int, height_digits: int = 10):
    """Integer polynomial of degree <= max_degree vanishing at x, or None.

    Searches the full degree first (an LLL relation absorbs lower-degree
    numbers at no cost), strips spurious rational-root factors, reduces to
    the squarefree primitive part. Minimality is certified by exhaustive
    lower-degree relation searches when the found degree is at most 8,
    otherwise flagged "unknown".
    """
    digits = _sig_digits(xstr)
    want = max_degree * height_digits + 50
    if digits < want:
        warnings.warn(
            f"{digits} digits may be too few for degree {max_degree} with "
            f"{height_digits}-digit coefficients (heuristic: {want})",
            stacklevel=2)
    cand = _search_degree(xstr, max_degree, digits)
    if cand is None:
        return None
    cand = _strip_rational_roots(cand, xstr, digits)
    cand = squarefree_part(cand)
    scale_pow = max(20, digits - ACCEPT_GUARD)
    with mp.workdps(digits + 20):
        still_ok = _accepted(cand, mp.mpf(xstr), digits, scale_pow, max_degree)
    if not still_ok:
        return None
    deg = poly_degree(cand)
    minimality = "unknown"
    if deg == 1:
        minimality = "certified"
    elif deg <= 8:
        # exhaustive lower-degree relation search; the first hit, if any,
        # is the minimal polynomial, and no hit certifies the candidate
        for d in range(1, deg):
            lower = _search_degree(xstr, d, digits)
            if lower is not None:
                cand = squarefree_part(_strip_rational_roots(lower, xstr, digits))
                deg = poly_degree(cand)
                break
        minimality = "certified"
    lo, hi = isolating_interval(cand, xstr, digits)
    got = sturm_count(cand, lo, hi)
    if got != 1:
        raise AlgrecError(
            f"isolating interval holds {got} roots instead of 1")
    return AlgebraicNumber(
        poly=tuple(cand), interval=(lo, hi), approx=xstr,
        digits_used=digits, minimality=minimality)


# ---------------------------------------------------------------------- Sturm

def _sturm_chain(poly):
    p0 = [Fraction(c) for c in poly_trim(poly)]
    p1 = [Fraction(c) for c in poly_derivative(poly_trim(poly))]
    chain = [p0, p1]
    while poly_degree(chain[-1]) > 0:
        _, r = _poly_divmod_frac(chain[-2], chain[-1])
        r = [-c for c in r]
        if not any(r):
            break
        mx = max(abs(c) for c in r)
        r = [c / mx for c in r]  # keep coefficient growth in check
        chain.append(r)
    return chain


def _variations(chain, x: Fraction) -> int:
    signs = []
    for p in chain:
        v = poly_eval_frac(p, x)
        if v != 0:
            signs.append(1 if v > 0 else -1)
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def sturm_count(poly, lo, hi) -> int:
    """Distinct real roots of a squarefree polynomial in (lo, hi]."""
    lo, hi = Fraction(lo), Fraction(hi)
    if lo >= hi:
        raise AlgrecError("interval must satisfy lo < hi")
    if not is_squarefree(poly):
        raise AlgrecError("sturm_count needs a squarefree polynomial")
    chain = _sturm_chain(poly)
    return _variations(chain, lo) - _variations(chain, hi)


# ---------------------------------------------------------------- verification

def verify_algebraic(a: AlgebraicNumber, recheck_digits: int,
                     closed_form=None) -> dict:
    """Run the exactness checks; raises VerificationFailed naming the check.

    Checks: (1) exact Sturm count of 1 on the isolating interval; (2) one
    extra Newton stage from the stored approximation shrinks |poly| to the
    recheck precision's floor; (3) optional exact substitution of a closed
    form from the quadratic tower.
    """
    report: dict = {}
    n = sturm_count(a.poly, a.interval[0], a.interval[1])
    report["sturm_count"] = n
    if n != 1:
        raise VerificationFailed("sturm_count", report)
    digits = a.digits_used
    with mp.workdps(max(recheck_digits, digits) + 20):
        x0 = mp.mpf(a.approx)
        r0 = abs(poly_eval_mp(a.poly, x0))
        report["residual_at_approx"] = mp.nstr(r0, 8)
        dpoly = poly_derivative(a.poly)
        x = x0
        for _ in range(int(math.log2(max(2, recheck_digits / max(digits, 1)))) + 4):
            fx = poly_eval_mp(a.poly, x)
            dx = poly_eval_mp(dpoly, x)
            if dx == 0:
                raise VerificationFailed("newton_derivative_zero", report)
            x = x - fx / dx
        r1 = abs(poly_eval_mp(a.poly, x))
        report["residual_after_newton"] = mp.nstr(r1, 8)
        height = max(abs(int(c)) for c in a.poly)
        bound = mp.mpf(10) ** (-recheck_digits + len(str(height)) + a.degree + 10)
        if not (r1 < bound and (r0 == 0 or r1 <= r0)):
            raise VerificationFailed("newton_shrink", report)
        if abs(x - x0) > mp.mpf(10) ** (-digits + 5):
            raise VerificationFailed("newton_drift", report)
    if closed_form is not None:
        from polynest.exactfield import QuadExt, eval_poly
        val = eval_poly(list(a.poly), closed_form)
        report["closed_form_zero"] = (val == QuadExt(0))
        if not report["closed_form_zero"]:
            raise VerificationFailed("closed_form_substitution", report)
    report["ok"] = True
    return report
