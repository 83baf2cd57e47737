"""The involution zb -> -zb - xi and the invariant/skew decomposition.

For a skew variable ``zb`` and a partner ``xi`` the substitution
``zb -> -zb - xi`` is an involution fixing ``xi``, every other variable and
``w = zb*xi + zb^2``.  The element ``eta = zb + xi/2`` changes sign.  Every
series splits uniquely as ``u = u_plus + eta*u_minus`` with ``u_plus`` and
``u_minus`` written in the invariant coordinates (others, xi, w).

The split uses ``zb = eta - xi/2`` and ``eta^2 = w + xi^2/4``, so powers of
``zb`` obey the recurrence

    zb^(j+1) = (-xi/2*P_j + (w + xi^2/4)*M_j) + eta*(P_j - xi/2*M_j)

with ``zb^j = P_j + eta*M_j``.  This is the closed form of the binomial sums
for the two projections, evaluated incrementally.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

from .series import BITS, MASK, GaussianRational, Series, VarSpace, gr, min_trunc, substitute

HALF = gr("1/2")
QUARTER = gr("1/4")


@dataclass(frozen=True)
class Decomposition:
    """``u = plus + eta*minus`` in invariant coordinates."""

    plus: Series
    minus: Series

    def to_json(self) -> dict:
        return {"plus": self.plus.to_json(), "minus": self.minus.to_json()}


@dataclass(frozen=True)
class InvolutionContext:
    """Involution on ``space`` acting by ``skew -> -skew - partner``.

    ``inv_space`` holds the invariant coordinates: the untouched variables in
    their original order, then ``partner``, then ``w_name`` with weight 2
    (twice the partner weight).
    """

    space: VarSpace
    skew: str = "zb"
    partner: str = "xi"
    w_name: str = "w"
    _cache: dict = field(default_factory=dict, compare=False, hash=False, repr=False)

    def __post_init__(self):
        sp = self.space
        if self.skew not in sp or self.partner not in sp:
            raise ValueError("skew and partner variables must belong to the space")
        if sp.weight_of(self.skew) != sp.weight_of(self.partner):
            raise ValueError("skew and partner must carry equal weight")
        if self.w_name in sp:
            raise ValueError(f"invariant name {self.w_name!r} clashes with the space")
        others = [n for n in sp.names if n not in (self.skew, self.partner)]
        names = others + [self.partner, self.w_name]
        pw = sp.weight_of(self.partner)
        weights = [sp.weight_of(n) for n in others] + [pw, 2 * pw]
        self._cache["inv"] = VarSpace(tuple(names), tuple(weights))
        self._cache["powers"] = {}

    @property
    def inv_space(self) -> VarSpace:
        return self._cache["inv"]

    # -- elements ----------------------------------------------------------
    def w(self, trunc: Optional[int] = None) -> Series:
        """``w`` expanded in the source space."""
        sp = self.space
        zb = Series.var(sp, self.skew, trunc)
        xi = Series.var(sp, self.partner, trunc)
        return zb * xi + zb * zb

    def eta(self, trunc: Optional[int] = None) -> Series:
        sp = self.space
        return Series.var(sp, self.skew, trunc) + Series.var(sp, self.partner, trunc) * HALF

    # -- the involution ----------------------------------------------------
    def apply(self, u: Series) -> Series:
        if u.space != self.space:
            raise ValueError("series does not live over the involution's space")
        sp = self.space
        zb = Series.var(sp, self.skew)
        xi = Series.var(sp, self.partner)
        return substitute(u, {self.skew: -zb - xi}, sp)

    # -- decomposition -----------------------------------------------------
    def _zb_power(self, j: int) -> Tuple[Series, Series]:
        cache: Dict[int, Tuple[Series, Series]] = self._cache["powers"]
        if j in cache:
            return cache[j]
        inv = self.inv_space
        if j == 0:
            res = (Series.const(inv, 1), Series.zero(inv))
        else:
            P, M = self._zb_power(j - 1)
            xi = Series.var(inv, self.partner)
            w = Series.var(inv, self.w_name)
            eta2 = w + xi * xi * QUARTER
            res = (xi * P * (-HALF) + eta2 * M, P - xi * M * HALF)
        cache[j] = res
        return res

    def decompose(self, u: Series) -> Decomposition:
        sp = self.space
        if u.space != sp:
            raise ValueError(f"series over {u.space.names} is outside the context {sp.names}")
        inv = self.inv_space
        ks = sp.index(self.skew)
        # map every non-skew variable to its invariant slot
        slot = [None if i == ks else inv.index(n) for i, n in enumerate(sp.names)]
        groups: Dict[int, Dict[int, GaussianRational]] = {}
        for k, c in u.terms.items():
            j = (k >> (BITS * ks)) & MASK
            rest = 0
            for i in range(sp.nvars):
                if i == ks:
                    continue
                e = (k >> (BITS * i)) & MASK
                if e:
                    rest += e << (BITS * slot[i])
            groups.setdefault(j, {})[rest] = c
        plus: Dict[int, GaussianRational] = {}
        minus: Dict[int, GaussianRational] = {}
        for j, rest_terms in sorted(groups.items()):
            P, M = self._zb_power(j)
            for target, src in ((plus, P), (minus, M)):
                for kk, cc in src.terms.items():
                    for rk, rc in rest_terms.items():
                        key = kk + rk
                        v = target.get(key)
                        p = cc * rc
                        target[key] = p if v is None else v + p
        tp = u.trunc
        tm = None if u.trunc is None else u.trunc - sp.weight_of(self.skew)
        return Decomposition(Series(inv, plus, tp), Series(inv, minus, tm))

    def expand(self, v: Series, trunc: Optional[int] = None) -> Series:
        """Rewrite a series in invariant coordinates back in the source space."""
        if v.space != self.inv_space:
            raise ValueError("series is not in invariant coordinates")
        sp = self.space
        w = self.w()
        return substitute(v, {self.w_name: w}, sp, trunc)

    def recompose(self, d: Decomposition) -> Series:
        t = min_trunc(d.plus.trunc, None if d.minus.trunc is None else d.minus.trunc + 1)
        return (self.expand(d.plus) + self.eta() * self.expand(d.minus)).truncate(t, _force=True) \
            if t is not None else self.expand(d.plus) + self.eta() * self.expand(d.minus)

    def invariant_part(self, u: Series) -> Series:
        """Rewrite an invariant series in (others, partner, w); asserts the skew part vanishes."""
        d = self.decompose(u)
        if not d.minus.is_zero():
            raise ArithmeticError(f"series is not invariant: skew part {d.minus!r}")
        return d.plus


def sigma_context(z: str = "z", zb: str = "zb", xi: str = "xi") -> InvolutionContext:
    """The involution on (z, zb, xi) used for parametrized submanifolds in C^3."""
    sp = VarSpace((z, zb, xi), (1, 1, 1), ((0, 1),))
    return InvolutionContext(sp, zb, xi, "w")


def tau_context() -> InvolutionContext:
    """The involution on (zb1, z2) fixing the C.1 quadric."""
    sp = VarSpace(("zb1", "z2"))
    return InvolutionContext(sp, "zb1", "z2", "w")


def _ctx_plain() -> InvolutionContext:
    return InvolutionContext(VarSpace(("zb", "xi")), "zb", "xi", "w")


def lambda_coefficients(N: int) -> Tuple[GaussianRational, Series]:
    """Split zb^N + (-zb-xi)^N = lambda_N*xi^N + remainder in invariants."""
    if N < 1:
        raise ValueError("N must be positive")
    ctx = _ctx_plain()
    sp = ctx.space
    zb = Series.var(sp, "zb")
    xi = Series.var(sp, "xi")
    inv = ctx.invariant_part(zb ** N + (-zb - xi) ** N)
    lam = inv.coeff({"xi": N})
    rem = inv - Series.monomial(ctx.inv_space, {"xi": N}, lam)
    assert lam == gr((-1) ** N), f"lambda_{N} = {lam}"
    return lam, rem


def lambda_prime_coefficients(N: int) -> Tuple[GaussianRational, Series]:
    """Split sum_i zb^i (-zb-xi)^(N-1-i) = lambda'_(N-1)*xi^(N-1) + remainder."""
    if N < 2:
        raise ValueError("N must be at least 2")
    ctx = _ctx_plain()
    sp = ctx.space
    zb = Series.var(sp, "zb")
    xi = Series.var(sp, "xi")
    s = Series.zero(sp)
    for i in range(N):
        s = s + zb ** i * (-zb - xi) ** (N - 1 - i)
    inv = ctx.invariant_part(s)
    lam = inv.coeff({"xi": N - 1})
    rem = inv - Series.monomial(ctx.inv_space, {"xi": N - 1}, lam)
    assert lam == gr((-1) ** (N - 1)), f"lambda'_{N - 1} = {lam}"
    return lam, rem
