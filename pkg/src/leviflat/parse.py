"""Parse polynomial expressions such as ``"zb1*z2 + zb1**2 + I/2*z1^3"``.

Parsing is delegated to sympy; coefficients must be Gaussian rationals.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Optional

import sympy

from .series import GaussianRational, Series, VarSpace


def _rat(x) -> Fraction:
    x = sympy.nsimplify(x) if not isinstance(x, sympy.Rational) else x
    if not isinstance(x, sympy.Rational):
        raise ValueError(f"coefficient {x} is not rational")
    return Fraction(int(x.p), int(x.q))


def parse_series(expr: str, space: VarSpace, trunc: Optional[int] = None) -> Series:
    syms = {n: sympy.Symbol(n) for n in space.names}
    local = dict(syms)
    local["I"] = sympy.I
    e = sympy.parse_expr(expr.replace("^", "**"), local_dict=local, evaluate=True)
    e = sympy.expand(e)
    free = {str(s) for s in e.free_symbols}
    unknown = free - set(space.names)
    if unknown:
        raise ValueError(f"unknown variables {sorted(unknown)} in {expr!r}")
    gens = [syms[n] for n in space.names]
    poly = sympy.Poly(e, *gens) if gens else None
    terms = {}
    if poly is None:
        c = sympy.nsimplify(e)
        terms[()] = c
    else:
        for monom, c in poly.terms():
            terms[monom] = c
    out = {}
    for monom, c in terms.items():
        re, im = c.as_real_imag()
        out[tuple(monom) if monom else (0,) * space.nvars] = GaussianRational(_rat(re), _rat(im))
    return Series.from_dict(space, out, trunc)


def to_sympy(u: Series):
    """Convert to a sympy expression (used as an independent oracle in tests)."""
    syms = [sympy.Symbol(n) for n in u.space.names]
    acc = sympy.Integer(0)
    for exps, c in u.items():
        coef = sympy.Rational(int(c.re.numerator), int(c.re.denominator)) + \
            sympy.I * sympy.Rational(int(c.im.numerator), int(c.im.denominator))
        mono = sympy.Integer(1)
        for s, e in zip(syms, exps):
            if e:
                mono *= s ** e
        acc += coef * mono
    return acc


def parse_complex(s) -> GaussianRational:
    """A Gaussian rational from ``"2-I"``, ``"I/2"``, ``"1/3"`` or a ``{"re", "im"}`` object."""
    if isinstance(s, dict):
        from .series import parse_rational
        return GaussianRational(parse_rational(s.get("re", "0/1")), parse_rational(s.get("im", "0/1")))
    e = sympy.expand(sympy.sympify(str(s).replace("^", "**"), locals={"I": sympy.I}))
    if e.free_symbols:
        raise ValueError(f"not a constant: {s!r}")
    re, im = e.as_real_imag()
    return GaussianRational(_rat(re), _rat(im))
