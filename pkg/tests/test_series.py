import json

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from leviflat.parse import parse_series, to_sympy
from leviflat.series import (GaussianRational, Series, TruncationError, VarSpace, gr, invert_map,
                             invert_series, parse_rational, sqrt_unit, substitute)
from strategies import gaussians, nonzero_gaussians, series_in

XY = VarSpace(("x", "y"))
ZW = VarSpace(("z", "w"), (1, 2))
CPLX = VarSpace.complexified(2)


def same(u: Series, expr) -> bool:
    return sympy.expand(to_sympy(u) - expr) == 0


# -- Gaussian rationals ------------------------------------------------------

@given(gaussians, gaussians, gaussians)
def test_gaussian_field_laws(a, b, c):
    assert a * (b + c) == a * b + a * c
    assert (a * b) * c == a * (b * c)
    assert (a * b).conjugate() == a.conjugate() * b.conjugate()


@given(nonzero_gaussians)
def test_gaussian_inverse(a):
    assert a * a.inverse() == GaussianRational(1)
    assert a.norm2() == (a * a.conjugate()).re


def test_parse_rational_is_strict():
    assert parse_rational("-3/4") == parse_rational("-6/8")
    with pytest.raises(ZeroDivisionError):
        parse_rational("1/0")
    with pytest.raises(ValueError):
        parse_rational(0.5)


# -- ring operations against sympy ---------------------------------------------

@given(series_in(XY), series_in(XY))
def test_add_mul_match_sympy(u, v):
    assert same(u + v, to_sympy(u) + to_sympy(v))
    assert same(u * v, to_sympy(u) * to_sympy(v))


@given(series_in(XY), series_in(XY), series_in(XY))
def test_ring_laws(u, v, w):
    assert (u * v) * w == u * (v * w)
    assert u * (v + w) == u * v + u * w
    assert u * v == v * u


@given(series_in(XY, trunc=5), series_in(XY, trunc=3))
def test_truncated_product_keeps_min_trunc(u, v):
    p = u * v
    assert p.trunc == 3
    exact = Series(XY, u.terms) * Series(XY, v.terms)
    assert p.equals_mod(exact.truncate(3), 3)


def test_equals_mod_refuses_beyond_trunc():
    u = Series.var(XY, "x", 3)
    with pytest.raises(TruncationError):
        u.equals_mod(u, 4)


def test_weighted_degree_grading():
    u = parse_series("z^3 + z*w + w^2", ZW)
    assert u.weighted_part(3) == parse_series("z^3 + z*w", ZW)
    assert u.weighted_part(4) == parse_series("w^2", ZW)


@given(series_in(XY), st.sampled_from(["x", "y"]))
def test_differentiate_matches_sympy(u, name):
    assert same(u.differentiate(name), sympy.diff(to_sympy(u), sympy.Symbol(name)))


@given(series_in(CPLX))
def test_conjugate_is_an_involution(u):
    assert u.conjugate().conjugate() == u
    assert (u + u.conjugate()).is_real()


@given(series_in(XY, max_deg=3), series_in(XY, max_deg=2, min_deg=1), series_in(XY, max_deg=2, min_deg=1))
@settings(max_examples=40)
def test_substitute_matches_sympy(u, a, b):
    got = substitute(u, {"x": a, "y": b}, XY)
    x, y = sympy.symbols("x y")
    want = to_sympy(u).subs({x: to_sympy(a), y: to_sympy(b)}, simultaneous=True)
    assert same(got, want)


def test_substitution_trunc_follows_valuation():
    u = Series.var(XY, "x", 6) ** 2
    v = parse_series("x + y^2", XY, 6)
    assert substitute(u, {"x": v}, XY).trunc == 6


# -- inversion -------------------------------------------------------------------

@given(nonzero_gaussians, series_in(XY, max_deg=4, min_deg=2))
@settings(max_examples=40)
def test_invert_series_roundtrip(c, h):
    D = 6
    u = (Series.var(XY, "x") * c + h).truncate(D)
    v = invert_series(u, "x", D)
    back = substitute(u, {"x": v}, XY, D)
    assert back.equals_mod(Series.var(XY, "x"), D)


def test_invert_map_with_weights():
    D = 7
    F = [parse_series("z + z^2 + w", ZW, D), parse_series("2*w + z^2 + z*w", ZW, D)]
    inv = invert_map(F, ["z", "w"], D)
    comp = [substitute(f, dict(zip(["z", "w"], inv)), ZW, D) for f in F]
    assert comp[0].equals_mod(Series.var(ZW, "z"), D)
    assert comp[1].equals_mod(Series.var(ZW, "w"), D)


@given(series_in(XY, max_deg=3, min_deg=1))
@settings(max_examples=30)
def test_sqrt_unit(h):
    u = (Series.const(XY, 1) + h).truncate(6)
    s = sqrt_unit(u, 6)
    assert (s * s).equals_mod(u, 6)


# -- serialization -----------------------------------------------------------------

@given(series_in(CPLX, trunc=5))
def test_json_roundtrip_is_canonical(u):
    text = json.dumps(u.to_json(), sort_keys=True)
    v = Series.from_json(json.loads(text))
    assert v == u and v.trunc == u.trunc
    assert json.dumps(v.to_json(), sort_keys=True) == text


def test_json_rejects_zero_denominator():
    obj = {"vars": ["x"], "terms": [{"exp": [1], "re": "1/0", "im": "0/1"}]}
    with pytest.raises(ZeroDivisionError):
        Series.from_json(obj)


def test_parse_series_gaussian_coefficients():
    u = parse_series("I/2*x^2 - (1 + I)*y", XY)
    assert u.coeff({"x": 2}) == gr(0, "1/2")
    assert u.coeff({"y": 1}) == gr(-1, -1)
