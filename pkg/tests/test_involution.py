import pytest
import sympy
from hypothesis import given, settings

from leviflat.involution import (lambda_coefficients, lambda_prime_coefficients, sigma_context,
                                 tau_context)
from leviflat.parse import to_sympy
from leviflat.series import Series, VarSpace, gr, substitute
from strategies import series_in

CTX = sigma_context()
SP = CTX.space


@given(series_in(SP, max_deg=5))
def test_apply_is_an_involution(u):
    assert CTX.apply(CTX.apply(u)) == u


@given(series_in(SP, max_deg=5))
@settings(deadline=None)
def test_decomposition_matches_sympy(u):
    d = CTX.decompose(u)
    z, zb, xi, w = sympy.symbols("z zb xi w")
    plus = to_sympy(d.plus).subs(w, zb * xi + zb ** 2)
    minus = to_sympy(d.minus).subs(w, zb * xi + zb ** 2)
    assert sympy.expand(plus + (zb + xi / 2) * minus - to_sympy(u)) == 0


@given(series_in(SP, max_deg=5))
def test_recompose_roundtrip(u):
    assert CTX.recompose(CTX.decompose(u)) == u


@given(series_in(SP, max_deg=5))
def test_parts_are_invariant(u):
    d = CTX.decompose(u)
    for part in (d.plus, d.minus):
        e = CTX.expand(part)
        assert CTX.apply(e) == e
    assert CTX.apply(CTX.eta()) == -CTX.eta()


@given(series_in(SP, max_deg=5))
def test_minus_part_on_w_zero(u):
    # on w = 0 the two sheets are zb = 0 and zb = -xi
    d = CTX.decompose(u)
    m0 = substitute(d.minus, {"w": Series.zero(CTX.inv_space)}, CTX.inv_space)
    xi = Series.var(SP, "xi")
    at0 = substitute(u, {"zb": Series.zero(SP)}, SP)
    at1 = substitute(u, {"zb": -xi}, SP)
    lhs = (at1 - at0)
    rhs = -xi * m0.to_space(SP)
    assert lhs == rhs


def test_invariant_part_rejects_skew():
    with pytest.raises(ArithmeticError):
        CTX.invariant_part(CTX.eta())


def test_truncation_of_minus_part():
    u = Series.var(SP, "zb", 6) ** 3
    d = CTX.decompose(u)
    assert d.plus.trunc == 6 and d.minus.trunc == 5


@pytest.mark.parametrize("N", range(1, 13))
def test_lambda_coefficients(N):
    lam, _ = lambda_coefficients(N)
    assert lam == gr((-1) ** N)
    if N >= 2:
        lam1, _ = lambda_prime_coefficients(N)
        assert lam1 == gr((-1) ** (N - 1))


def test_tau_context_fixes_quadric():
    ctx = tau_context()
    Q = ctx.w()
    assert ctx.apply(Q) == Q
    assert ctx.invariant_part(Q) == Series.var(ctx.inv_space, "w")


def test_weight_mismatch_rejected():
    with pytest.raises(ValueError):
        from leviflat.involution import InvolutionContext
        InvolutionContext(VarSpace(("zb", "xi"), (1, 2)), "zb", "xi")
