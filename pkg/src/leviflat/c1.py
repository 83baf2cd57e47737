"""Normal forms for mixed-holomorphic submanifolds.

* :func:`normalize_mixed_c1` reduces ``w = zb1*z2 + zb1^2 + r(z1, zb1, z2, ..., zn)``
  to the C.1 quadric degree by degree.
* :func:`polynomial_solver` gives the exact polynomial solution when ``r``
  depends on ``zb1`` alone.
* :func:`mixed_c2_d_invariant` and :func:`morse_normalize` cover the
  one-variable and the A.n situations.

A transformation is stored as the pair ``(f, g)`` of series in
``(z1, ..., zn, w)`` (``w`` of weight 2); the full map is
``(z1, f, z3, ..., zn, g)`` and it sends the quadric ``w = zb1*z2 + zb1^2``
into ``M``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from .involution import tau_context
from .levi import GraphSubmanifold, is_mixed_holomorphic
from .series import (BITS, MASK, Series, TruncationError, VarSpace, divide_exact, gr, invert_map, mul,
                     sqrt_unit, substitute)


class HypothesisViolation(ValueError):
    """Input does not satisfy the normalizer's hypotheses."""


def map_space(n: int) -> VarSpace:
    """(z1, ..., zn, w) with w of weight 2."""
    return VarSpace(tuple(f"z{j}" for j in range(1, n + 1)) + ("w",), (1,) * n + (2,))


def mixed_space(n: int) -> VarSpace:
    """(z1, ..., zn, zb1): the variables a mixed-holomorphic remainder uses."""
    return VarSpace(tuple(f"z{j}" for j in range(1, n + 1)) + ("zb1",))


def quadric_Q(sp: VarSpace, trunc: Optional[int] = None) -> Series:
    zb1 = Series.var(sp, "zb1", trunc)
    return zb1 * Series.var(sp, "z2", trunc) + zb1 * zb1


@dataclass
class C1Transformation:
    n: int
    f: Series
    g: Series
    absorbed: Optional[Series] = None
    steps: List[dict] = field(default_factory=list)

    @classmethod
    def identity(cls, n: int, D: Optional[int] = None) -> "C1Transformation":
        sp = map_space(n)
        return cls(n, Series.var(sp, "z2", D), Series.var(sp, "w", D))

    def compose(self, other: "C1Transformation", D: int) -> "C1Transformation":
        """self o other (apply ``other`` first)."""
        sub = {"z2": other.f, "w": other.g}
        f = substitute(self.f, sub, other.f.space, D)
        g = substitute(self.g, sub, other.f.space, D)
        return C1Transformation(self.n, f, g, self.absorbed, self.steps + other.steps)

    def to_json(self) -> dict:
        d = {"n": self.n, "f": self.f.to_json(), "g": self.g.to_json()}
        if self.absorbed is not None:
            d["absorbed_holomorphic"] = self.absorbed.to_json()
        d["steps"] = self.steps
        return d


def split_remainder(M: GraphSubmanifold) -> Series:
    """r = rho - (zb1*z2 + zb1^2) as a series in (z1..zn, zb1)."""
    n = M.n
    if n < 2:
        raise HypothesisViolation("need n >= 2")
    if not is_mixed_holomorphic(M):
        raise HypothesisViolation("rho depends on zb2, ..., zbn")
    sp = M.space
    quad = Series.var(sp, "zb1") * Series.var(sp, "z2") + Series.var(sp, "zb1") ** 2
    r = M.rho - quad
    if any(sp.tdeg(k) < 3 for k in r.terms):
        raise HypothesisViolation("quadratic part is not zb1*z2 + zb1^2")
    xs = mixed_space(n)
    return r.to_space(xs)


def _top_power(part: Series) -> int:
    i = part.space.index("zb1")
    return max(((k >> (BITS * i)) & MASK) for k in part.terms)


def normalize_mixed_c1(M: GraphSubmanifold, D: int) -> C1Transformation:
    n = M.n
    if D < 2:
        raise ValueError("degree must be at least 2")
    if M.trunc is not None and D > M.trunc:
        raise TruncationError(f"target degree {D} exceeds trunc {M.trunc}")
    r = split_remainder(M).truncate(D, _force=True)
    xs = r.space
    ys = map_space(n)
    zb_i = xs.index("zb1")
    # absorb the holomorphic part into w
    h = r.filter(lambda e: e[zb_i] == 0)
    hy = Series(ys, {k: c for k, c in h.to_space(VarSpace(xs.names[:-1])).to_space(ys).terms.items()}, D)
    total = C1Transformation(n, Series.var(ys, "z2", D), Series.var(ys, "w", D) + hy, absorbed=hy)
    cur = Series(xs, (r - h).terms, D)
    Q = quadric_Q(xs, D)
    zb1 = Series.var(xs, "zb1", D)
    for d in range(3, D + 1):
        guard = 0
        while True:
            part = cur.weighted_part(d)
            if part.is_zero():
                break
            k = _top_power(part)
            top = part.filter(lambda e: e[zb_i] == k)
            # P(z, w) = sum c w^(k//2) z^alpha
            half = k // 2
            P = Series.zero(ys, D)
            for exps, c in top.items():
                alpha = {f"z{j + 1}": exps[j] for j in range(n) if exps[j]}
                alpha["w"] = half
                P = P + Series.monomial(ys, alpha, c, D)
            if k % 2 == 0:
                step = C1Transformation(n, Series.var(ys, "z2", D), Series.var(ys, "w", D) + P)
                cur = _solve_even(cur, P, Q, D)
            else:
                step = C1Transformation(n, Series.var(ys, "z2", D) - P, Series.var(ys, "w", D))
                cur = _solve_odd(cur, P, Q, zb1, D)
            step.steps = [{"degree": d, "zb1_power": k, "kind": "even" if k % 2 == 0 else "odd"}]
            new_part = cur.weighted_part(d)
            if not new_part.is_zero():
                assert _top_power(new_part) < k, "elementary step failed to lower the top power"
            total = total.compose(step, D)
            guard += 1
            assert guard <= d + 1
    return total


def _solve_even(cur: Series, P: Series, Q: Series, D: int) -> Series:
    """r_new = r_cur - P(z, Q + r_new)."""
    xs = cur.space
    new = cur
    for _ in range(D + 2):
        val = substitute(P, {"w": Q + new, **_z_identity(xs, P.space)}, xs, D)
        nxt = (cur - val).truncate(D, _force=True)
        if nxt.terms == new.terms:
            return nxt
        new = nxt
    raise RuntimeError("even step did not stabilize")  # pragma: no cover


def _solve_odd(cur: Series, P: Series, Q: Series, zb1: Series, D: int) -> Series:
    """r_new = r_cur(z1, zb1, z2 - P(z, Q + r_new), ...) - zb1 * P(z, Q + r_new)."""
    xs = cur.space
    new = cur
    for _ in range(D + 2):
        val = substitute(P, {"w": Q + new, **_z_identity(xs, P.space)}, xs, D)
        shifted = substitute(cur, {"z2": Series.var(xs, "z2", D) - val}, xs, D)
        nxt = (shifted - zb1 * val).truncate(D, _force=True)
        if nxt.terms == new.terms:
            return nxt
        new = nxt
    raise RuntimeError("odd step did not stabilize")  # pragma: no cover


def _z_identity(xs: VarSpace, ys: VarSpace) -> Dict[str, Series]:
    return {n: Series.var(xs, n) for n in ys.names if n != "w"}


# ---------------------------------------------------------------------------
# verification


@dataclass
class Verdict:
    verified: bool
    identity: str
    violation: Optional[dict] = None

    def to_json(self) -> dict:
        d = {"verified": self.verified, "identity": self.identity}
        if self.violation is not None:
            d["violation"] = self.violation
        return d


def first_violation(diff: Series) -> Optional[dict]:
    if diff.is_zero():
        return None
    k = diff.sorted_keys()[0]
    sp = diff.space
    exps = sp.unpack(k)
    return {"exp": list(exps), "vars": list(sp.names),
            "monomial": "*".join(f"{n}^{e}" if e > 1 else n for n, e in zip(sp.names, exps) if e) or "1",
            "coefficient": diff.terms[k].to_json()}


PRIMARY_IDENTITY = "g(z, zb1*z2 + zb1^2) = zb1*f(z, Q) + zb1^2 + r(z1, zb1, f(z, Q), z3, ..., zn)"
COMPANION_IDENTITY = "same identity after zb1 -> -z2 - zb1"


def verify_transformation(t: C1Transformation, M: GraphSubmanifold, D: int) -> Verdict:
    r = split_remainder(M).truncate(D, _force=True)
    xs = r.space
    n = t.n
    for companion in (False, True):
        zb1 = Series.var(xs, "zb1", D)
        if companion:
            zb1 = -Series.var(xs, "z2", D) - zb1
        Q = quadric_Q(xs, D)
        sub = {"w": Q, **{f"z{j}": Series.var(xs, f"z{j}", D) for j in range(1, n + 1)}}
        fQ = substitute(t.f, sub, xs, D)
        gQ = substitute(t.g, sub, xs, D)
        rr = substitute(r, {"z2": fQ, "zb1": zb1}, xs, D)
        diff = (gQ - zb1 * fQ - zb1 * zb1 - rr).truncate(D, _force=True)
        if not diff.is_zero():
            return Verdict(False, COMPANION_IDENTITY if companion else PRIMARY_IDENTITY, first_violation(diff))
    return Verdict(True, PRIMARY_IDENTITY + "; " + COMPANION_IDENTITY)


# ---------------------------------------------------------------------------
# exact polynomial solver


def polynomial_solver(r: Series) -> Tuple[Series, Series]:
    """Exact (f, g) in (z2, w) with g - zb1*f = r after w = zb1*z2 + zb1^2.

    ``r`` is a polynomial in ``zb1`` alone without terms of degree <= 3.
    """
    if r.trunc is not None:
        raise ValueError("polynomial_solver needs an exact polynomial")
    if set(r.variables()) - {"zb1"}:
        raise HypothesisViolation("r must depend on zb1 alone")
    for e, c in r.items():
        if sum(e) <= 3:
            raise HypothesisViolation(f"r has a nonzero coefficient of zb1^{sum(e)}")
    ctx = tau_context()
    rr = r.to_space(ctx.space) if r.space != ctx.space else r
    dec = ctx.decompose(rr)
    f = -dec.minus
    g = dec.plus + Series.var(ctx.inv_space, "z2") * dec.minus * gr("1/2")
    # exact check g - zb1 f = r
    check = ctx.expand(g) - Series.var(ctx.space, "zb1") * ctx.expand(f) - rr
    assert check.is_zero()
    return f, g


# ---------------------------------------------------------------------------
# C^2 invariant and Morse lemma


def mixed_c2_d_invariant(f: Series) -> int:
    """Order of vanishing of f(zb); 0 for the zero series."""
    if f.constant_term():
        raise ValueError("f(0) must vanish")
    v = f.valuation()
    return 0 if v is None else v


@dataclass
class MorseResult:
    new_coords: List[Series]     # Z(z) with sum Z_i^2 = q
    change: List[Series]         # phi(z) with q(phi(z)) = sum z_i^2
    degree: int

    def to_json(self) -> dict:
        return {"new_coordinates": [s.to_json() for s in self.new_coords],
                "change": [s.to_json() for s in self.change], "degree": self.degree}


def morse_normalize(q: Series, D: int) -> MorseResult:
    sp = q.space
    names = list(sp.names)
    if q.trunc is not None and D > q.trunc:
        raise TruncationError(f"degree {D} exceeds trunc {q.trunc}")
    quad = q.filter(lambda e: sum(e) == 2)
    target = sum((Series.var(sp, x) ** 2 for x in names), Series.zero(sp))
    if quad != target.with_trunc(quad.trunc):
        raise HypothesisViolation("quadratic part must be z1^2 + ... + zn^2")
    if any(sp.tdeg(k) < 2 for k in q.terms):
        raise HypothesisViolation("q must vanish to second order")
    cur = Series(sp, q.truncate(D, _force=True).terms, D)
    Z = []
    for i, x in enumerate(names):
        X = Series.var(sp, x, D)
        dx = cur.differentiate(x)
        c = Series.zero(sp, D)
        for _ in range(D + 2):
            nc = (c - substitute(dx, {x: c}, sp, D) * gr("1/2")).truncate(D, _force=True)
            nc = Series(sp, nc.terms, D)
            if nc.terms == c.terms:
                break
            c = nc
        shifted = substitute(cur, {x: X + c}, sp, D)
        xi = sp.index(x)
        rest = shifted.filter(lambda e: e[xi] == 0)
        lin = shifted.filter(lambda e: e[xi] == 1)
        assert lin.is_zero(), "critical point solve failed"
        U = divide_exact(shifted - rest, Series.monomial(sp, {x: 2}))
        s = sqrt_unit(U)
        y = X
        Zi = mul(y, s, D - 1)
        Zi = substitute(Zi, {x: X - c}, sp, D - 1)
        Z.append(Zi)
        cur = Series(sp, rest.terms, D)
    # the pieces have valuation one, so their squares are reliable to degree D
    total = Series.zero(sp, D)
    for Zi in Z:
        total = total + mul(Zi, Zi, D)
    assert total.equals_mod(q.truncate(D, _force=True).with_trunc(D), D)
    inv = invert_map(Z, names, D - 1)
    return MorseResult(Z, inv, D)


def verify_morse(q: Series, res: MorseResult) -> bool:
    sp = q.space
    D = res.degree
    names = sp.names
    total = Series.zero(sp, D)
    for Zi in res.new_coords:
        total = total + mul(Zi, Zi, D)
    if not (total - q.truncate(D, _force=True).with_trunc(D)).truncate(D, _force=True).is_zero():
        return False
    # q(phi(z)) = sum z_i^2 through degree D - 1
    D1 = D - 1
    comp = substitute(q.truncate(D, _force=True), {x: s for x, s in zip(names, res.change)}, sp, D1)
    target = sum((Series.var(sp, x) ** 2 for x in names), Series.zero(sp))
    return (comp - target).truncate(D1, _force=True).is_zero()
