"""Local automorphisms of the C.1 quadric ``w = zb1*z2 + zb1^2``.

An automorphism is ``(z, w) -> (F1(z1), F2(z2, w), F3, ..., Fn, G(z2, w))``.
``F1`` determines the rest.  Writing ``a = conj(F1)(zb1)`` and
``b = conj(F1)(-zb1 - z2)``, the two substitution identities

    G = a*F2 + a^2,      G = b*F2 + b^2       (on w = zb1*z2 + zb1^2)

give ``F2 = (a^2 - b^2)/(b - a) = -(a + b)`` and ``G = -a*b``.  Both are fixed by
the involution ``zb1 -> -zb1 - z2`` and are rewritten in the invariants
``(z2, w)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional

from . import linalg as la
from .c1 import Verdict, first_violation, map_space
from .involution import tau_context
from .series import Series, TruncationError, VarSpace, invert_map, invert_series, substitute

F1_SPACE = VarSpace(("z1",))
PAIR_SPACE = VarSpace(("z2", "w"), (1, 2))

IDENTITY = "G(z2, zb1*z2 + zb1^2) = conj(F1)(zb1)*F2(z2, Q) + conj(F1)(zb1)^2"
COMPANION = "same identity with conj(F1)(-zb1 - z2)"


@dataclass
class QuadricAutomorphism:
    n: int
    F1: Series
    F2: Series
    G: Series
    F_rest: List[Series] = field(default_factory=list)

    def components(self, D: Optional[int] = None) -> List[Series]:
        """The map as n + 1 series in (z1, ..., zn, w)."""
        ms = map_space(self.n)
        comps = [self.F1.to_space(ms), self.F2.to_space(ms)]
        comps += list(self.F_rest)
        comps.append(self.G.to_space(ms))
        if D is not None:
            comps = [c.truncate(D, _force=True) if c.trunc is None or c.trunc >= D else c for c in comps]
        return comps

    @classmethod
    def from_components(cls, n: int, comps: List[Series]) -> "QuadricAutomorphism":
        F1 = comps[0]
        F2 = comps[1]
        G = comps[-1]
        bad = set(F1.variables()) - {"z1"}
        if bad:
            raise ArithmeticError(f"F1 depends on {sorted(bad)}")
        for name, s in (("F2", F2), ("G", G)):
            bad = set(s.variables()) - {"z2", "w"}
            if bad:
                raise ArithmeticError(f"{name} depends on {sorted(bad)}")
        return cls(n, F1.to_space(F1_SPACE), F2.to_space(PAIR_SPACE), G.to_space(PAIR_SPACE), list(comps[2:-1]))

    def to_json(self) -> dict:
        return {"n": self.n, "F1": self.F1.to_json(), "F2": self.F2.to_json(), "G": self.G.to_json(),
                "F_rest": [s.to_json() for s in self.F_rest]}


def conj_F1(F1: Series, target: VarSpace, var: str = "zb1") -> Series:
    """conj(F1)(var): conjugate coefficients and rename z1 -> var."""
    return F1.conj_coeffs().to_space(target, {"z1": var})


def complete_automorphism(F1: Series, n: int, D: int, F_rest: Optional[List[Series]] = None,
                          sign: int = -1) -> QuadricAutomorphism:
    """Complete F1 to an automorphism mod weighted degree D.

    ``sign=-1`` is the derived convention F2 = -(a + b).  ``sign=+1``
    uses the opposite sign, which fails verification; kept for regression tests.
    """
    if F1.space != F1_SPACE:
        F1 = F1.to_space(F1_SPACE)
    if F1.constant_term():
        raise ValueError("F1(0) must be 0")
    if not F1.coeff((1,)):
        raise ValueError("F1 is not invertible: zero linear coefficient")
    if F1.trunc is not None and F1.trunc < D:
        raise TruncationError(f"F1 known to degree {F1.trunc} < {D}")
    F1 = F1.truncate(D)
    ctx = tau_context()
    a = conj_F1(F1, ctx.space)
    b = ctx.apply(a)
    s_plus = ctx.invariant_part(a + b)
    prod = ctx.invariant_part(a * b)
    F2 = s_plus * sign
    G = -prod
    ms = map_space(n)
    if F_rest is None:
        F_rest = [Series.var(ms, f"z{j}", D) for j in range(3, n + 1)]
    return QuadricAutomorphism(n, F1, F2.to_space(PAIR_SPACE), G.to_space(PAIR_SPACE), list(F_rest))


def verify_automorphism(aut: QuadricAutomorphism, D: int) -> Verdict:
    ctx = tau_context()
    xs = ctx.space
    zb1 = Series.var(xs, "zb1", D)
    z2 = Series.var(xs, "z2", D)
    Q = zb1 * z2 + zb1 * zb1
    F2Q = substitute(aut.F2, {"z2": z2, "w": Q}, xs, D)
    GQ = substitute(aut.G, {"z2": z2, "w": Q}, xs, D)
    a = conj_F1(aut.F1.truncate(D, _force=True), xs)
    for label, x in ((IDENTITY, a), (COMPANION, ctx.apply(a))):
        diff = (GQ - x * F2Q - x * x).truncate(D, _force=True)
        if not diff.is_zero():
            return Verdict(False, label, first_violation(diff))
    if aut.n >= 3:
        ms = map_space(aut.n)
        rows = [[s.coeff({f"z{k}": 1}) for k in range(1, aut.n + 1)]
                for s in [Series.var(ms, "z1"), Series.var(ms, "z2")] + list(aut.F_rest)]
        if la.rank(rows) != aut.n:
            return Verdict(False, "(z1, z2, F3, ..., Fn) has rank n at 0",
                           {"rank": la.rank(rows)})
    return Verdict(True, IDENTITY + "; " + COMPANION)


def linear_part_law(aut: QuadricAutomorphism) -> bool:
    """F1 = a z1 + ..., F2 = conj(a) z2 + ..., G = conj(a)^2 w + ..."""
    a = aut.F1.coeff((1,))
    return (aut.F2.coeff({"z2": 1}) == a.conjugate()
            and aut.G.coeff({"w": 1}) == a.conjugate() ** 2
            and not aut.G.coeff({"z2": 1}))


def identity_automorphism(n: int, D: int) -> QuadricAutomorphism:
    return complete_automorphism(Series.var(F1_SPACE, "z1", D), n, D)


def compose(aut1: QuadricAutomorphism, aut2: QuadricAutomorphism, D: int) -> QuadricAutomorphism:
    """aut1 o aut2 (aut2 applied first), re-verified."""
    if aut1.n != aut2.n:
        raise ValueError("dimension mismatch")
    n = aut1.n
    ms = map_space(n)
    inner = aut2.components(D)
    names = list(ms.names)
    sub = dict(zip(names, inner))
    comps = [substitute(c, sub, ms, D) for c in aut1.components(D)]
    out = QuadricAutomorphism.from_components(n, comps)
    v = verify_automorphism(out, D)
    if not v.verified:
        raise ArithmeticError(f"composition failed verification: {v.violation}")
    return out


def invert(aut: QuadricAutomorphism, D: int) -> QuadricAutomorphism:
    n = aut.n
    ms = map_space(n)
    comps = aut.components(D)
    inv = invert_map(comps, list(ms.names), D)
    out = QuadricAutomorphism.from_components(n, inv)
    # the first component must be the one-variable inverse of F1
    assert (out.F1 - invert_series(aut.F1.truncate(D, _force=True), "z1", D)).truncate(D, _force=True).is_zero()
    v = verify_automorphism(out, D)
    if not v.verified:
        raise ArithmeticError(f"inverse failed verification: {v.violation}")
    return out


def automorphisms_equal(a: QuadricAutomorphism, b: QuadricAutomorphism, D: int) -> bool:
    return all((x - y).truncate(D, _force=True).is_zero() for x, y in zip(a.components(D), b.components(D)))
