"""Formal normal form of parametrized C.1 Levi-flat submanifolds in C^3.

A submanifold is the image of ``phi(z, zb, xi) = (z + a, xi + b, w + r)`` with
``w = zb*xi + zb^2``.  We look for a holomorphic ``F = I + (f1, f2, f3)`` on
C^3 and a CR map ``G = (z + g1(z, zb), xi + g2(z, zb, xi))`` with

    phi o G = F o phihat,      phihat = (z + eta*a_minus(z, xi, w), xi, w).

Series in ``(z, zb, xi)`` are graded by total degree; series in the invariants
``(z, xi, w)`` by weight with ``w`` of weight 2, so both gradings agree under
``w = zb*xi + zb^2``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from typing import Dict, List, Optional, Tuple

from .c1 import Verdict, first_violation
from .involution import sigma_context
from .series import (GaussianRational, I, ONE, ZERO, Series, TruncationError, divide_exact, gr,
                     invert_series, substitute)

CTX = sigma_context()
X = CTX.space
INV = CTX.inv_space
HALF = gr(Fraction(1, 2))

IDENTITY = "phi o G = F o phihat"


def _z(t=None):
    return Series.var(X, "z", t)


def _zb(t=None):
    return Series.var(X, "zb", t)


def _xi(t=None):
    return Series.var(X, "xi", t)


def w_source(t=None) -> Series:
    return CTX.w(t)


def _cut(u: Series, D: int) -> Series:
    return u.truncate(D, _force=True) if u.trunc is None or u.trunc > D else u


def tilde(g1: Series) -> Series:
    """conj(g1)(zb, z): conjugate coefficients and swap z with zb."""
    if "xi" in g1.variables():
        raise ValueError("g1 must depend on (z, zb) only")
    return g1.conjugate()


@dataclass
class CRParametrization:
    """phi(z, zb, xi) = (z + a, xi + b, zb*xi + zb^2 + r); a, b = O(2), r = O(3)."""

    a: Series
    b: Series
    r: Series

    def __post_init__(self):
        for name, s, v in (("a", self.a, 2), ("b", self.b, 2), ("r", self.r, 3)):
            if s.space != X:
                s = s.to_space(X)
                setattr(self, name, s)
            val = s.valuation()
            if val is not None and val < v:
                raise ValueError(f"{name} must be O({v}); found a term of degree {val}")

    @classmethod
    def quadric(cls, trunc=None) -> "CRParametrization":
        return cls(Series.zero(X, trunc), Series.zero(X, trunc), Series.zero(X, trunc))

    @classmethod
    def from_normal_form(cls, a_minus: Series, D: Optional[int] = None) -> "CRParametrization":
        # eta has valuation 1, so eta*a_minus is known one degree beyond a_minus
        t = None if a_minus.trunc is None else a_minus.trunc + 1
        a = (CTX.eta() * CTX.expand(a_minus.with_trunc(None))).truncate(t, _force=True)
        if D is not None:
            a = _cut(a, D)
        return cls(a, Series.zero(X, a.trunc), Series.zero(X, a.trunc))

    def components(self, D: int) -> List[Series]:
        return [_cut(_z(D) + self.a, D), _cut(_xi(D) + self.b, D), _cut(w_source(D) + self.r, D)]

    def compose_right(self, G: List[Series], D: int) -> List[Series]:
        """phi o G, with G given as its three images of (z, zb, xi)."""
        sub = {"z": G[0], "zb": G[1], "xi": G[2]}
        a, b, r = (substitute(_cut(s, D), sub, X, D) for s in (self.a, self.b, self.r))
        return [_cut(G[0] + a, D), _cut(G[2] + b, D), _cut(G[1] * G[2] + G[1] * G[1] + r, D)]

    def to_json(self) -> dict:
        return {"a": self.a.to_json(), "b": self.b.to_json(), "r": self.r.to_json()}

    @classmethod
    def from_json(cls, obj) -> "CRParametrization":
        return cls(Series.from_json(obj["a"]).to_space(X), Series.from_json(obj["b"]).to_space(X),
                   Series.from_json(obj["r"]).to_space(X))


# ---------------------------------------------------------------------------
# maps


@dataclass
class Transformation:
    """F on C^3 in coordinates (z, xi, w) and G on (z, zb, xi) as full images."""

    F: List[Series]
    G: List[Series]

    @classmethod
    def identity(cls, D: int) -> "Transformation":
        return cls([Series.var(INV, n, D) for n in INV.names], [_z(D), _zb(D), _xi(D)])

    @classmethod
    def from_parts(cls, f: List[Series], g1: Series, g2: Series, D: int) -> "Transformation":
        F = [_cut(Series.var(INV, n, D) + fi, D) for n, fi in zip(INV.names, f)]
        return cls(F, [_cut(_z(D) + g1, D), _cut(_zb(D) + tilde(g1), D), _cut(_xi(D) + g2, D)])

    def then(self, other: "Transformation", D: int) -> "Transformation":
        """The pair (F o F', G o G'): if phi G = F phi1 and phi1 G' = F' phi2 then phi (G G') = (F F') phi2."""
        fs = dict(zip(INV.names, other.F))
        gs = dict(zip(("z", "zb", "xi"), other.G))
        return Transformation([substitute(c, fs, INV, D) for c in self.F],
                              [substitute(c, gs, X, D) for c in self.G])

    def to_json(self) -> dict:
        return {"F": [s.to_json() for s in self.F], "G": [s.to_json() for s in self.G]}


def apply_F(F: List[Series], p: CRParametrization, D: int) -> List[Series]:
    comps = p.components(D)
    sub = dict(zip(INV.names, comps))
    return [substitute(c, sub, X, D) for c in F]


def verify_equivalence(p: CRParametrization, phat: CRParametrization, t: Transformation, D: int) -> Verdict:
    """Check phi o G = F o phihat mod degree D, and that G has the CR shape."""
    lhs = p.compose_right(t.G, D)
    rhs = apply_F(t.F, phat, D)
    for k, (x, y) in enumerate(zip(lhs, rhs)):
        diff = _cut(x - y, D)
        if not diff.is_zero():
            return Verdict(False, f"{IDENTITY} (component {k + 1})", first_violation(diff))
    g1 = t.G[0]
    if "xi" in g1.variables() or not (_cut(t.G[1], D) - _cut(g1.conjugate(), D)).is_zero():
        return Verdict(False, "G = (z + g1(z, zb), xi + g2) with its conjugate slot", None)
    return Verdict(True, IDENTITY)


# ---------------------------------------------------------------------------
# removing b


def kill_b(p: CRParametrization, D: int) -> Tuple[CRParametrization, Transformation]:
    """Precompose with G0 = (z, psi), psi the inverse of xi -> xi + b in the xi slot."""
    if p.b.is_zero():
        return p, Transformation.identity(D)
    u = _cut(_xi(D) + p.b, D)
    psi = invert_series(u, "xi", D)
    G0 = [_z(D), _zb(D), psi]
    sub = {"xi": psi}
    a = substitute(_cut(p.a, D), sub, X, D)
    r = _cut(_zb(D) * (psi - _xi(D)) + substitute(_cut(p.r, D), sub, X, D), D)
    out = CRParametrization(a, Series.zero(X, D), r)
    return out, Transformation(Transformation.identity(D).F, G0)


# ---------------------------------------------------------------------------
# preliminary normalization


@dataclass
class PreliminaryNF:
    a_minus: Series
    transformation: Transformation
    log: List[dict] = field(default_factory=list)

    def parametrization(self, D: int) -> CRParametrization:
        return CRParametrization.from_normal_form(self.a_minus, D)


def _w_divisible(u: Series) -> bool:
    iw = INV.index("w")
    return all(e[iw] >= 1 for e, _ in u.items())


def _g1_from_minus(Rm: Series, k: int, seed: GaussianRational) -> Series:
    """Weight-k g1 with T^- g1 (z, xi, 0) = -Rm(z, xi, 0) and g1(z, 0) = seed*z^k."""
    terms = {}
    if seed:
        terms[(k, 0, 0)] = seed
    iw = INV.index("w")
    for e, c in Rm.items():
        if e[iw]:
            continue
        i, j = e[INV.index("z")], e[INV.index("xi")] + 1
        terms[(i, j, 0)] = c if j % 2 == 0 else -c
    return Series.from_dict(X, terms)


def preliminary_normalize(p: CRParametrization, D: int,
                          seeds: Optional[Dict[int, GaussianRational]] = None) -> PreliminaryNF:
    """Tangent-to-identity (F, G) with phihat = (z + eta*a_minus, xi, w), w | a_minus.

    ``seeds[k]`` prescribes the pure holomorphic coefficient of z^k in g1
    (zero by default, which makes the transformation unique).
    """
    if not p.b.is_zero():
        raise ValueError("preliminary_normalize needs b = 0; run kill_b first")
    for s in (p.a, p.r):
        if s.trunc is not None and s.trunc < D:
            raise TruncationError(f"input known to degree {s.trunc} < {D}")
    seeds = dict(seeds or {})
    zero_inv = Series.zero(INV, D)
    f1, f2, f3 = zero_inv, zero_inv, zero_inv
    g1 = Series.zero(X, D)
    a_minus = Series.zero(INV, D - 1)
    eta = CTX.eta(D)
    log = []

    def state(t: int):
        ph = CRParametrization.from_normal_form(a_minus, t)
        comps = ph.components(t)
        sub = dict(zip(INV.names, comps))
        g2 = substitute(_cut(f2, t), sub, X, t)
        gt = tilde(_cut(g1, t))
        G = [_cut(_z(t) + g1, t), _cut(_zb(t) + gt, t), _cut(_xi(t) + g2, t)]
        return ph, sub, g2, gt, G

    for k in range(2, D + 1):
        t = k
        ph, sub, g2, gt, G = state(t)
        aG = substitute(_cut(p.a, t), {"z": G[0], "zb": G[1], "xi": G[2]}, X, t)
        R1 = aG - ph.a - substitute(_cut(f1, t), sub, X, t) + _cut(g1, t)
        R1k = R1.homogeneous_part(k)
        lower = _cut(R1 - R1k, t)
        assert lower.is_zero(), f"unresolved lower-weight residual at {k}: {lower!r}"
        dec = CTX.decompose(R1k.with_trunc(None))
        dg1 = _g1_from_minus(dec.minus, k, GaussianRational.coerce(seeds.get(k, 0)))
        T = CTX.decompose(dg1)
        df1 = dec.plus + T.plus
        da = dec.minus + T.minus
        if not _w_divisible(da):
            raise ArithmeticError(f"normal-form correction at weight {k} is not divisible by w")
        f1 = _cut(f1 + df1.with_trunc(D), D)
        g1 = _cut(g1 + dg1.with_trunc(D), D)
        a_minus = _cut(a_minus + da.with_trunc(D - 1), D - 1)
        entry = {"weight": k, "g1": dg1.to_json(), "f1": df1.to_json(), "a_minus": da.to_json()}
        if k + 1 <= D:
            t = k + 1
            ph, sub, g2, gt, G = state(t)
            rG = substitute(_cut(p.r, t), {"z": G[0], "zb": G[1], "xi": G[2]}, X, t)
            E = rG + eta.truncate(t, _force=True) * gt * 2 + gt * g2 + gt * gt
            lhs = substitute(_cut(f3, t), sub, X, t) - _zb(t) * g2
            C = (E - lhs).homogeneous_part(t)
            lower = _cut(E - lhs - C, t)
            assert lower.is_zero(), f"unresolved third-slot residual below {t}: {lower!r}"
            dC = CTX.decompose(C.with_trunc(None))
            df2 = -dC.minus
            df3 = dC.plus - df2 * Series.var(INV, "xi") * HALF
            f2 = _cut(f2 + df2.with_trunc(D), D)
            f3 = _cut(f3 + df3.with_trunc(D), D)
            entry.update({"f2": df2.to_json(), "f3": df3.to_json()})
        log.append(entry)
    ph = CRParametrization.from_normal_form(a_minus, D)
    sub = dict(zip(INV.names, ph.components(D)))
    g2 = substitute(_cut(f2, D), sub, X, D)
    t = Transformation.from_parts([f1, f2, f3], g1, g2, D)
    return PreliminaryNF(a_minus, t, log)


def check_preliminary(nf: PreliminaryNF) -> bool:
    """a_minus divisible by w (so ahat is skew with a w factor and rhat = 0 by construction)."""
    return _w_divisible(nf.a_minus)


# ---------------------------------------------------------------------------
# invariants and the second stage


@dataclass
class Invariants:
    s: int
    istar: int
    jstar: int
    kstar: int

    def to_json(self) -> dict:
        return {"s": self.s, "istar": self.istar, "jstar": self.jstar, "kstar": self.kstar}


class QuadricCase(ValueError):
    """a_minus vanishes: the submanifold is formally the quadric to this order."""


def _weight(e) -> int:
    return e[0] + e[1] + 2 * e[2]


def compute_invariants(a_minus: Series) -> Invariants:
    """s = lowest weight; j* maximal there; ties broken by smallest i, then smallest k."""
    if a_minus.is_zero():
        raise QuadricCase("a_minus = 0: formally the quadric within the truncation")
    exps = [e for e, _ in a_minus.items()]
    s = min(_weight(e) for e in exps)
    low = [e for e in exps if _weight(e) == s]
    jmax = max(e[1] for e in low)
    i, j, k = min((e for e in low if e[1] == jmax), key=lambda e: (e[0], e[2]))
    return Invariants(s, i, j, k)


def key_factor(N: int, inv: Invariants) -> int:
    """Coefficient of conj(b_N)*A_{i*j*k*} in slot (i*, j*+N-1, k*) of L b_N.

    Equals lambda'_(N-1) - j* lambda_N + k* lambda_(N-1) = -(-1)^N (1 + j* + k*),
    never zero.
    """
    lam = lambda m: (-1) ** m
    return lam(N - 1) - inv.jstar * lam(N) + inv.kstar * lam(N - 1)


def flipped_key_factor(N: int, inv: Invariants) -> int:
    """The opposite-sign form -lambda'_(N-1) - j* lambda_(N-1) + k* lambda_N, kept for comparison."""
    lam = lambda m: (-1) ** m
    return -lam(N - 1) - inv.jstar * lam(N - 1) + inv.kstar * lam(N)


def apply_L_operator(bN, N: int, a_minus_s: Series) -> Series:
    """The linear action of the coefficient b_N z^N of g1(z, 0) on the weight N + s - 1 part of a_minus.

    Evaluated in (z, zb, xi) from its three-term expression and rewritten in the
    invariants.  Asserts w-divisibility and weighted homogeneity.
    """
    if N < 2:
        raise ValueError("N must be at least 2")
    b = gr(bN) if not isinstance(bN, GaussianRational) else bN
    bb = b.conjugate()
    wts = {_weight(e) for e, _ in a_minus_s.items()}
    if not wts:
        return Series.zero(INV)
    if len(wts) != 1:
        raise ValueError("a_minus_s must be weighted homogeneous")
    s = wts.pop()
    z, zb, xi = _z(), _zb(), _xi()
    w = w_source()
    other = -zb - xi
    A = CTX.expand(a_minus_s.with_trunc(None))
    dz = CTX.expand(a_minus_s.with_trunc(None).differentiate("z"))
    dxi = CTX.expand(a_minus_s.with_trunc(None).differentiate("xi"))
    dw = CTX.expand(a_minus_s.with_trunc(None).differentiate("w"))
    geo = Series.zero(X)
    for i in range(N):
        geo = geo + zb ** i * other ** (N - 1 - i)
    # the skew shift conj(g1) + g2/2 = eta*conj(b_N)*geo enters with a plus sign
    out = (z ** (N - 1) * A * (-b * N) + A * geo * bb
           + dz * z ** N * b
           + dxi * (zb ** N + other ** N) * (-bb)
           + dw * w * (zb ** (N - 1) + other ** (N - 1)) * bb)
    res = CTX.invariant_part(out)
    assert _w_divisible(res), "L b_N is not divisible by w"
    assert all(_weight(e) == N + s - 1 for e, _ in res.items()), "L b_N is not homogeneous"
    return res


@dataclass
class NormalFormResult:
    A: Series
    a_minus: Series
    invariants: Optional[Invariants]
    normalized: bool
    transformation: Transformation
    verdict: Verdict
    rounds: List[dict] = field(default_factory=list)

    @property
    def quadric(self) -> bool:
        return self.invariants is None

    def to_json(self) -> dict:
        d = {"A": self.A.to_json(), "a_minus": self.a_minus.to_json(), "normalized": self.normalized,
             "quadric": self.quadric, "rounds": self.rounds, "transformation": self.transformation.to_json()}
        d.update(self.verdict.to_json())
        if self.invariants is not None:
            d["invariants"] = self.invariants.to_json()
        return d


def slot_window(inv: Invariants, D: int) -> List[Tuple[int, int, int]]:
    """Indices (i*, j* + n, k*), n >= 1, of a_minus that lie below weight D."""
    out = []
    n = 1
    while inv.s + n <= D - 1:
        out.append((inv.istar, inv.jstar + n, inv.kstar))
        n += 1
    return out


def is_normalized(a_minus: Series, inv: Invariants, D: int) -> bool:
    return all(not a_minus.coeff(e) for e in slot_window(inv, D))


def seed_response(nf: PreliminaryNF, N: int, D: int) -> Tuple[Series, Series]:
    """Measured change of a_minus at weight N + s - 1 per unit b_N and per unit i*b_N.

    An independent check on ``apply_L_operator``: re-normalize with g1(z, 0) seeded
    by z^N and by i*z^N and subtract the unseeded a_minus.
    """
    inv = compute_invariants(nf.a_minus)
    p = nf.parametrization(D)
    d = N + inv.s - 1
    base = nf.a_minus.weighted_part(d)
    return tuple(preliminary_normalize(p, D, {N: c}).a_minus.weighted_part(d) - base for c in (ONE, I))


def second_stage_normalize(nf: PreliminaryNF, D: int) -> Tuple[PreliminaryNF, Optional[Invariants], List[dict]]:
    """Remove A_{i*(j*+n)k*}, n >= 1, one weight at a time through the z^N coefficient of g1."""
    if nf.a_minus.is_zero():
        return nf, None, []
    inv = compute_invariants(nf.a_minus)
    cur = nf
    rounds = []
    for N in range(2, D - inv.s + 1):
        slot = (inv.istar, inv.jstar + N - 1, inv.kstar)
        c0 = cur.a_minus.coeff(slot)
        entry = {"N": N, "slot": list(slot), "key_factor": key_factor(N, inv)}
        if not c0:
            entry["b_N"] = ZERO.to_json()
            rounds.append(entry)
            continue
        a_s = cur.a_minus.weighted_part(inv.s)
        beta = apply_L_operator(ONE, N, a_s).coeff(slot)
        assert beta == a_s.coeff((inv.istar, inv.jstar, inv.kstar)) * key_factor(N, inv)
        b = (-c0 / beta).conjugate()
        step = preliminary_normalize(cur.parametrization(D), D, {N: b})
        assert not step.a_minus.coeff(slot), "slot coefficient survived its elimination round"
        change = (step.a_minus - cur.a_minus).weighted_part(N + inv.s - 1)
        if not (change - apply_L_operator(b, N, a_s)).is_zero():
            raise ArithmeticError(f"weight {N + inv.s - 1} change differs from L b_{N}")
        entry.update({"b_N": b.to_json(), "eliminated": True})
        rounds.append(entry)
        cur = PreliminaryNF(step.a_minus, cur.transformation.then(step.transformation, D), cur.log + step.log)
    return cur, inv, rounds


def normal_form(p: CRParametrization, D: int) -> NormalFormResult:
    """kill_b, preliminary normalization, then the second stage; verified mod degree D."""
    p1, t0 = kill_b(p, D)
    nf = preliminary_normalize(p1, D)
    nf = PreliminaryNF(nf.a_minus, t0.then(nf.transformation, D), nf.log)
    final, inv, rounds = second_stage_normalize(nf, D)
    phat = final.parametrization(D)
    verdict = verify_equivalence(p, phat, final.transformation, D)
    A = divide_exact(final.a_minus, Series.var(INV, "w")) if not final.a_minus.is_zero() else final.a_minus
    normalized = inv is None or is_normalized(final.a_minus, inv, D)
    return NormalFormResult(A, final.a_minus, inv, normalized, final.transformation, verdict, rounds)


# ---------------------------------------------------------------------------
# dilations


def dilation_transformation(c, D: int) -> Transformation:
    """G = (c z, conj(c) xi) and F = (c z, conj(c) xi, conj(c)^2 w)."""
    c = GaussianRational.coerce(c)
    cb = c.conjugate()
    F = [Series.var(INV, "z", D) * c, Series.var(INV, "xi", D) * cb, Series.var(INV, "w", D) * (cb * cb)]
    return Transformation(F, [_z(D) * c, _zb(D) * cb, _xi(D) * cb])


def dilate(A: Series, c) -> Series:
    """Normal form coefficient after the dilation by c: conj(c)^3/c * A(c z, conj(c) xi, conj(c)^2 w)."""
    c = GaussianRational.coerce(c)
    cb = c.conjugate()
    out = {}
    for (i, j, k), v in A.items():
        out[(i, j, k)] = v * cb ** (3 + j + 2 * k) * c ** (i - 1)
    return Series.from_dict(INV, out, A.trunc)


def _exponents(e) -> Tuple[int, int]:
    """(power of |c|, power of the phase) carried by A_{ijk} under a dilation."""
    i, j, k = e
    return i + j + 2 * k + 2, i - j - 2 * k - 4


def _integer_kernel(v: List[int]) -> Tuple[int, List[int], List[List[int]]]:
    """g = gcd(v) >= 0, x with x.v = g, and a basis of {k in Z^m : k.v = 0}.

    Column operations on the identity keep a unimodular U with v U = (g, 0, ..., 0).
    """
    m = len(v)
    v = list(v)
    U = [[int(a == b) for b in range(m)] for a in range(m)]
    while True:
        nz = [t for t in range(m) if v[t]]
        if len(nz) <= 1:
            break
        p = min(nz, key=lambda t: abs(v[t]))
        for t in nz:
            if t != p:
                q = v[t] // v[p]
                v[t] -= q * v[p]
                for row in U:
                    row[t] -= q * row[p]
    p = next((t for t in range(m) if v[t]), 0)
    if v[p] < 0:
        v[p] = -v[p]
        for row in U:
            row[p] = -row[p]
    col = lambda t: [U[r][t] for r in range(m)]
    return v[p], col(p), [col(t) for t in range(m) if t != p]


def _rational_root(q, n: int):
    """The positive rational n-th root of q > 0, or None."""
    import gmpy2
    num, den = gmpy2.mpz(q.numerator), gmpy2.mpz(q.denominator)
    rn, ok1 = gmpy2.iroot(num, n)
    rd, ok2 = gmpy2.iroot(den, n)
    return gmpy2.mpq(rn, rd) if ok1 and ok2 else None


def _gpow(z: GaussianRational, k: int) -> GaussianRational:
    return z ** k if k >= 0 else z.inverse() ** (-k)


@dataclass
class DilationReport:
    equivalent: bool
    reason: str
    modulus_squared: Optional[str] = None
    modulus_relation: Optional[dict] = None
    phase_period: Optional[int] = None
    c: Optional[GaussianRational] = None

    def to_json(self) -> dict:
        d = {"equivalent": self.equivalent, "reason": self.reason}
        if self.modulus_squared is not None:
            d["modulus_squared"] = self.modulus_squared
        if self.modulus_relation is not None:
            d["modulus_relation"] = self.modulus_relation
        if self.phase_period is not None:
            d["phase_period"] = self.phase_period
        if self.c is not None:
            d["c"] = self.c.to_json()
        return d


def dilation_reduce(A1: Series, A2: Series, D: Optional[int] = None) -> DilationReport:
    """Decide whether A2 = dilate(A1, c) for some c != 0 (within weight D when given).

    Each common monomial gives |c|^n_t = |r_t| and phase^e_t = r_t/|r_t| with
    r_t = A2_t/A1_t.  Moduli must agree as q_t^n_s = q_s^n_t (q = |r|^2).  The
    phases are consistent iff prod r_t^k_t is a positive rational for every
    integer k with k.e = 0; a solution then exists since theta only has to meet
    one condition modulo 2*pi/gcd(e).
    """
    if D is not None:
        A1, A2 = (_cut(a, D) for a in (A1, A2))
    s1 = {e: v for e, v in A1.items()}
    s2 = {e: v for e, v in A2.items()}
    if set(s1) != set(s2):
        return DilationReport(False, "supports differ")
    if not s1:
        return DilationReport(True, "both zero", c=ONE)
    ts = sorted(s1)
    ratios = [s2[t] / s1[t] for t in ts]
    ns = [_exponents(t)[0] for t in ts]
    es = [_exponents(t)[1] for t in ts]
    qs = [r.norm2() for r in ratios]
    for q, n in zip(qs[1:], ns[1:]):
        if q ** ns[0] != qs[0] ** n:
            return DilationReport(False, "moduli are inconsistent")
    n0 = ns[0]
    rho2 = _rational_root(qs[0], n0)
    rel = {"q": _qstr_public(qs[0]), "n": n0}
    gph, _, kernel = _integer_kernel(es)
    for k in kernel:
        prod = ONE
        for r, kt in zip(ratios, k):
            if kt:
                prod = prod * _gpow(r, kt)
        if prod.im or prod.re <= 0:
            return DilationReport(False, "phases are inconsistent", modulus_relation=rel)
    c = _find_rational_c(s1, s2, rho2)
    return DilationReport(True, "dilation exists", None if rho2 is None else _qstr_public(rho2), rel,
                          gph if gph else None, c)


def _qstr_public(q) -> str:
    return f"{q.numerator}/{q.denominator}"


def _find_rational_c(s1, s2, rho2) -> Optional[GaussianRational]:
    """A Gaussian rational dilation realizing the equivalence when one is easy to find."""
    if rho2 is None:
        return None
    rho = _rational_root(rho2, 2)
    cands = []
    if rho is not None:
        cands += [gr(rho), gr(0, rho), gr(-rho), gr(0, -rho)]
    # |c|^2 = a^2 + b^2 for small Gaussian rationals with a nonzero real and imaginary part
    for a in range(1, 6):
        for b in range(1, 6):
            for den in (1, 2, 3, 4, 5):
                z = gr(Fraction(a, den), Fraction(b, den))
                if z.norm2() == rho2:
                    cands += [z, z.conjugate(), -z, -z.conjugate()]
    for c in cands:
        cb = c.conjugate()
        if all(v * cb ** (3 + e[1] + 2 * e[2]) * _gpow(c, e[0] - 1) == s2[e] for e, v in s1.items()):
            return c
    return None


@dataclass
class Stabilizer:
    kind: str  # "finite" or "circle"
    order: Optional[int]

    def to_json(self) -> dict:
        return {"kind": self.kind, "order": self.order}


def stabilizer(A: Series, D: Optional[int] = None) -> Stabilizer:
    """Dilations fixing A: |c| = 1 and c^e_t = 1 on the support, so gcd(e)-th roots of unity."""
    if D is not None:
        A = _cut(A, D)
    if A.is_zero():
        raise QuadricCase("the quadric has a larger symmetry group")
    g = 0
    for e, _ in A.items():
        g = gcd(g, abs(_exponents(e)[1]))
    return Stabilizer("circle", None) if g == 0 else Stabilizer("finite", g)
