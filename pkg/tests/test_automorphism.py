import pytest
import sympy
from hypothesis import given, settings

from leviflat.automorphism import (F1_SPACE, automorphisms_equal, complete_automorphism, compose,
                                   identity_automorphism, invert, linear_part_law, verify_automorphism)
from leviflat.parse import parse_series, to_sympy
from leviflat.series import Series
from strategies import nonzero_gaussians, series_in
from test_c1 import low_part

D = 6


def f1_series(c, h):
    return (Series.var(F1_SPACE, "z1") * c + h).truncate(D)


def sympy_identity_holds(aut, D):
    z1, z2, zb1, w = sympy.symbols("z1 z2 zb1 w")
    Q = zb1 * z2 + zb1 ** 2
    a = to_sympy(aut.F1.conj_coeffs()).subs(z1, zb1)
    F2Q = to_sympy(aut.F2).subs(w, Q)
    GQ = to_sympy(aut.G).subs(w, Q)
    diff = sympy.expand(GQ - a * F2Q - a ** 2)
    return low_part(diff, [zb1, z2], D) == 0


@given(nonzero_gaussians, series_in(F1_SPACE, max_deg=D, min_deg=2, max_terms=3))
@settings(max_examples=25, deadline=None)
def test_completion_is_verified(c, h):
    aut = complete_automorphism(f1_series(c, h), 2, D)
    assert verify_automorphism(aut, D).verified
    assert linear_part_law(aut)
    assert sympy_identity_holds(aut, D)


def test_known_completion():
    aut = complete_automorphism(parse_series("z1 + z1^2", F1_SPACE, D), 2, D)
    assert aut.F2 == parse_series("z2 - z2^2 - 2*w", aut.F2.space, D)
    assert aut.G == parse_series("w - z2*w - w^2", aut.G.space, D)


def test_opposite_sign_fails():
    aut = complete_automorphism(Series.var(F1_SPACE, "z1", D), 2, D, sign=+1)
    v = verify_automorphism(aut, D)
    assert not v.verified
    assert v.violation["monomial"] == "zb1*z2"


def test_perturbed_f2_fails():
    aut = complete_automorphism(parse_series("z1 + z1^3", F1_SPACE, D), 2, D)
    aut.F2 = aut.F2 + Series.monomial(aut.F2.space, {"z2": 3}, 1, D)
    assert not verify_automorphism(aut, D).verified


@given(nonzero_gaussians, series_in(F1_SPACE, max_deg=D, min_deg=2, max_terms=2),
       nonzero_gaussians, series_in(F1_SPACE, max_deg=D, min_deg=2, max_terms=2))
@settings(max_examples=10, deadline=None)
def test_group_laws(c1, h1, c2, h2):
    a = complete_automorphism(f1_series(c1, h1), 3, D)
    b = complete_automorphism(f1_series(c2, h2), 3, D)
    ab = compose(a, b, D)
    assert verify_automorphism(ab, D).verified
    ident = identity_automorphism(3, D)
    assert automorphisms_equal(compose(a, invert(a, D), D), ident, D)
    assert automorphisms_equal(compose(invert(a, D), a, D), ident, D)


def test_composition_is_determined_by_f1():
    # F1 determines the automorphism: compose equals completing the composed F1
    a = complete_automorphism(parse_series("z1 + z1^2", F1_SPACE, D), 2, D)
    b = complete_automorphism(parse_series("2*z1 - I*z1^3", F1_SPACE, D), 2, D)
    ab = compose(a, b, D)
    direct = complete_automorphism(ab.F1, 2, D)
    assert automorphisms_equal(ab, direct, D)


def test_non_invertible_f1_rejected():
    with pytest.raises(ValueError):
        complete_automorphism(parse_series("z1^2", F1_SPACE, D), 2, D)
