from fractions import Fraction

import mpmath as mp
import pytest

from polynest.cli import sig8
from polynest.exactfield import (FieldError, QuadExt, dual_edge_product,
                                 eval_poly, exact_sigma)

# independently known optimal dilations, 8 significant digits, keyed (Q, P)
TABLE = {
    ("T", "C"): "0.29590654", ("T", "O"): "0.50000000",
    ("T", "D"): "0.16263158", ("T", "I"): "0.27009076",
    ("C", "T"): "1.4142136", ("C", "O"): "1.0606602",
    ("C", "D"): "0.39428348", ("C", "I"): "0.61803399",
    ("O", "T"): "1.0000000", ("O", "C"): "0.58578644",
    ("O", "D"): "0.31340182", ("O", "I"): "0.54018151",
    ("D", "T"): "2.2882456", ("D", "C"): "1.6180340",
    ("D", "O"): "1.8512296", ("D", "I"): "1.3090170",
    ("I", "T"): "1.3474429", ("I", "C"): "0.93874890",
    ("I", "O"): "1.1810180", ("I", "D"): "0.58017873",
}


@pytest.mark.parametrize("pair", sorted(TABLE))
def test_closed_forms_match_decimals(pair):
    x = exact_sigma(*pair)
    if pair in (("T", "D"), ("I", "T")):
        assert x is None  # these two dilations leave the quadratic tower
        return
    with mp.workdps(40):
        assert sig8(mp.nstr(x.to_mp(40), 20)) == TABLE[pair]


def test_no_closed_form_cases():
    assert exact_sigma("I", "T") is None
    assert exact_sigma("T", "D") is None
    assert exact_sigma("C", "C") is None


def test_minimal_polynomials():
    assert exact_sigma("I", "C").min_poly() == [-5, -5, 11]
    assert exact_sigma("O", "D").min_poly() == [100, 0, -1030, 0, 121]
    assert exact_sigma("C", "T").min_poly() == [-2, 0, 1]
    assert exact_sigma("T", "C").min_poly() == [-36, 144, -12, -264, 167]
    assert exact_sigma("I", "D").min_poly() == [5, -15, 11]
    assert exact_sigma("O", "T").min_poly() == [-1, 1]


def test_arithmetic_and_inverse():
    phi = QuadExt.phi()
    assert phi * phi == phi + 1
    assert 1 / phi == phi - 1
    assert QuadExt.sqrt(5) == 2 * phi - 1
    x = exact_sigma("T", "C")
    assert x * (1 / x) == QuadExt(1)
    assert (x - x) == QuadExt(0)
    assert QuadExt.sqrt(8) == 2 * QuadExt.sqrt(2)
    assert QuadExt.sqrt(Fraction(3, 2)) * QuadExt.sqrt(6) == QuadExt(3)


def test_tower_limits():
    with pytest.raises(FieldError):
        QuadExt.sqrt(7)
    with pytest.raises(FieldError):
        QuadExt.sqrt(-2)
    with pytest.raises(FieldError):
        QuadExt({7: 1})
    with pytest.raises(FieldError):
        QuadExt.sqrt(2).rational_value()


def test_conjugate_orbit_products_are_rational():
    for x in (exact_sigma("T", "C"), exact_sigma("C", "D"),
              exact_sigma("I", "O")):
        prod = QuadExt(1)
        for y in x.conjugates():
            prod = prod * y
        assert prod.is_rational()


def test_eval_poly():
    phi = QuadExt.phi()
    assert eval_poly([-1, -1, 1], phi) == QuadExt(0)
    assert eval_poly([5, -15, 11], exact_sigma("I", "D")) == QuadExt(0)
    assert eval_poly([1], QuadExt.sqrt(30)) == QuadExt(1)


def test_reciprocity_of_concentric_duals():
    # sigma(D in O) * phi^3 / sqrt2 = sigma(C in I), exactly
    phi = QuadExt.phi()
    lhs = exact_sigma("O", "D") * phi ** 3 / QuadExt.sqrt(2)
    assert lhs == exact_sigma("I", "C")
    # and the matching pair of polar edge-product constants
    assert dual_edge_product("C") == 2 * QuadExt.sqrt(2)
    assert dual_edge_product("O") == 2 * QuadExt.sqrt(2)
    assert dual_edge_product("D") == 4 / phi ** 3
    assert dual_edge_product("I") == 4 / phi ** 3
    with pytest.raises(FieldError):
        dual_edge_product("T")


def test_min_poly_of_rational():
    assert QuadExt(Fraction(3, 7)).min_poly() == [-3, 7]
    assert QuadExt(0).min_poly() == [0, 1]


def test_to_mp_precision():
    with mp.workdps(220):
        got = QuadExt.phi().to_mp(200)
        want = (1 + mp.sqrt(5)) / 2
        assert abs(got - want) < mp.mpf(10) ** -198
