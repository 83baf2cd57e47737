"""Analysis of graphs ``w = rho(z, zb)``: Levi-flatness to a stated order, the
CR-singular locus, Segre varieties of quadrics, pointwise reclassification
and the normalized tangent frame of the Levi foliation for types C.0/C.1.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from . import linalg as la
from .parse import parse_series
from .quadric import (QuadraticPair, QuadricType, classify_quadric, kernel_generators,
                      sesquilinear)
from .series import ZERO, Series, TruncationError, VarSpace, gr, substitute


class NotCRSingular(ValueError):
    """The requested point is a CR point."""


@dataclass
class GraphSubmanifold:
    """``w = rho(z, zb)`` with ``rho = O(2)`` over the complexified space."""

    n: int
    rho: Series

    def __post_init__(self):
        sp = VarSpace.complexified(self.n)
        if self.rho.space != sp:
            self.rho = self.rho.to_space(sp)
        low = [k for k in self.rho.terms if sp.tdeg(k) < 2]
        if low:
            raise ValueError("rho must vanish to second order at the origin")

    @property
    def space(self) -> VarSpace:
        return self.rho.space

    @property
    def trunc(self) -> Optional[int]:
        return self.rho.trunc

    @classmethod
    def from_expr(cls, expr: str, n: int, trunc: Optional[int] = None) -> "GraphSubmanifold":
        return cls(n, parse_series(expr, VarSpace.complexified(n), trunc))

    @classmethod
    def from_pair(cls, p: QuadraticPair) -> "GraphSubmanifold":
        return cls(p.n, p.rho())

    def quadratic_pair(self) -> QuadraticPair:
        return QuadraticPair.from_rho(self.rho, self.n)

    def is_quadric(self) -> bool:
        sp = self.space
        return self.rho.trunc is None and all(sp.tdeg(k) == 2 for k in self.rho.terms)

    def zbar(self, j: int) -> str:
        return f"zb{j}"

    def z(self, j: int) -> str:
        return f"z{j}"


# ---------------------------------------------------------------------------
# Levi-flatness to a given order


@dataclass
class LeviOrderVerdict:
    degree: int
    levi_flat: bool
    obstruction: Optional[dict] = None

    def to_json(self) -> dict:
        if self.levi_flat:
            return {"leviflat_mod": self.degree}
        return {"leviflat_mod": None, "obstruction": self.obstruction}


def levi_matrix(rho: Series, n: int) -> List[List[Series]]:
    """L_jk = d^2 rho / d zb_j d z_k."""
    return [[rho.differentiate(f"zb{j + 1}").differentiate(f"z{k + 1}") for k in range(n)] for j in range(n)]


def levi_flat_to_order(M: GraphSubmanifold, d: int) -> LeviOrderVerdict:
    """Check that the Levi form vanishes on the complex tangent through degree ``d``.

    The degree-``d`` coefficients of the products depend on ``rho`` only through
    degree ``d``, so any ``d <= trunc`` is decidable.
    """
    if d < 2:
        raise ValueError("degree must be at least 2")
    if M.trunc is not None and d > M.trunc:
        raise TruncationError(f"degree {d} exceeds trunc {M.trunc}")
    n = M.n
    sp = M.space
    rho = Series(sp, M.rho.truncate(d, _force=True).terms, None)
    ells = [rho.differentiate(f"zb{m + 1}").conjugate() for m in range(n)]
    if all(e.is_zero() for e in ells):
        return LeviOrderVerdict(d, True)
    _, gens = kernel_generators(ells)
    L = levi_matrix(rho, n)
    best = None
    for a, u in enumerate(gens):
        for b, v in enumerate(gens):
            prod = sesquilinear(u, L, v, d)
            if prod.is_zero():
                continue
            k = prod.sorted_keys()[0]
            deg = sp.tdeg(k)
            if best is None or deg < best["degree"]:
                exps = sp.unpack(k)
                best = {"degree": deg, "pair": [a, b], "exp": list(exps),
                        "monomial": "*".join(f"{nm}^{e}" if e > 1 else nm for nm, e in zip(sp.names, exps) if e),
                        "coefficient": prod.terms[k].to_json()}
    if best is None:
        return LeviOrderVerdict(d, True)
    return LeviOrderVerdict(d, False, best)


def is_mixed_holomorphic(M: GraphSubmanifold) -> bool:
    used = set(M.rho.variables())
    return not any(f"zb{j}" in used for j in range(2, M.n + 1))


# ---------------------------------------------------------------------------
# CR-singular locus


@dataclass
class CRSingularLocus:
    generators: List[Series]
    complex_submanifold: bool = False
    description: Optional[dict] = None

    def to_json(self) -> dict:
        d = {"generators": [g.to_json() for g in self.generators],
             "complex_submanifold": self.complex_submanifold}
        if self.description is not None:
            d["description"] = self.description
        return d


def _linear_system(forms: List[Series], sp: VarSpace, order: List[str]) -> la.Matrix:
    rows = []
    for f in forms:
        if f.constant_term() or any(sp.tdeg(k) > 1 for k in f.terms):
            raise ValueError("generator is not a linear form")
        rows.append([f.coeff({v: 1}) for v in order])
    return rows


def describe_linear_locus(M: GraphSubmanifold) -> dict:
    """For a quadric: real dimension, reduced equations and ``w`` on the locus."""
    n = M.n
    sp = M.space
    gens = [M.rho.differentiate(f"zb{m + 1}") for m in range(n)]
    order = [f"zb{j + 1}" for j in range(n)] + [f"z{j + 1}" for j in range(n)]
    forms = [g for g in gens if not g.is_zero()]
    forms = forms + [g.conjugate() for g in forms]
    if not forms:
        return {"real_dimension": 2 * n, "equations": [], "w_on_locus": M.rho.to_json()}
    red, piv = la.row_reduce(_linear_system(forms, sp, order))
    eqs = []
    subst = {}
    for i, p in enumerate(piv):
        row = red[i]
        s = Series.zero(sp)
        for c, v in zip(row, order):
            if c:
                s = s + Series.var(sp, v) * c
        eqs.append(s)
        subst[order[p]] = Series.var(sp, order[p]) - s
    w = substitute(M.rho, subst, sp)
    return {"real_dimension": 2 * n - len(piv), "equations": eqs, "w_on_locus": w}


def cr_singular_locus(M: GraphSubmanifold) -> CRSingularLocus:
    gens = [M.rho.differentiate(f"zb{m + 1}") for m in range(M.n)]
    if all(g.is_zero() for g in gens):
        return CRSingularLocus(gens, complex_submanifold=True)
    desc = None
    if M.is_quadric():
        raw = describe_linear_locus(M)
        desc = {"real_dimension": raw["real_dimension"],
                "equations": [e.to_json() for e in raw["equations"]],
                "w_on_locus": raw["w_on_locus"].to_json()}
    return CRSingularLocus(gens, False, desc)


def same_linear_locus(eqs1: Sequence[Series], eqs2: Sequence[Series], n: int) -> bool:
    """Equality of the real-linear loci cut out by two sets of (z, zb) forms."""
    sp = VarSpace.complexified(n)
    order = [f"zb{j + 1}" for j in range(n)] + [f"z{j + 1}" for j in range(n)]

    def rref(eqs):
        forms = [e for e in eqs if not e.is_zero()]
        forms = forms + [e.conjugate() for e in forms]
        if not forms:
            return []
        red, piv = la.row_reduce(_linear_system(forms, sp, order))
        return red[: len(piv)]

    return la.mat_eq(rref(eqs1), rref(eqs2))


# ---------------------------------------------------------------------------
# Segre variety at the origin


SEGRE_TABLE = {
    # type: (singular, complex dim as string, contained, Q'_0 description)
    "A.1": {"singular": False, "dim": "n-1", "contained": True, "Qprime": "Q0"},
    "A.k": {"singular": True, "dim": "n-1", "contained": True, "Qprime": "Q0"},
    "B.0": {"singular": False, "dim": "n", "contained": False, "Qprime": "w=0, z1=0"},
    "B.gamma": {"singular": False, "dim": "n-1", "contained": True, "Qprime": "Q0"},
    "C.0": {"singular": False, "dim": "n", "contained": False, "Qprime": "w=0, z1=0"},
    "C.1": {"singular": False, "dim": "n-1", "contained": True, "Qprime": "Q0"},
}


def _segre_key(t: QuadricType) -> str:
    if t.kind == "A":
        return "A.1" if t.k == 1 else "A.k"
    return t.tag


def _vanishes_on_hyperplane(rho: Series, ell: Series, n: int) -> bool:
    """rho restricted to {ell(z) = 0} (and its conjugate) is identically zero."""
    sp = rho.space
    p = next(j for j in range(n) if ell.coeff({f"z{j + 1}": 1}))
    c = ell.coeff({f"z{p + 1}": 1})
    zp = Series.var(sp, f"z{p + 1}") - ell * c.inverse()
    return substitute(rho, {f"z{p + 1}": zp, f"zb{p + 1}": zp.conjugate()}, sp).is_zero()


def segre_at_origin(M: GraphSubmanifold) -> dict:
    if not M.is_quadric():
        raise ValueError("Segre table is only computed for quadrics")
    n = M.n
    sp = M.space
    t, _ = classify_quadric(M.quadratic_pair())
    zb_zero = {f"zb{j + 1}": Series.zero(sp) for j in range(n)}
    eq_w = substitute(M.rho, zb_zero, sp)              # w = rho(z, 0)
    eq_b = substitute(M.rho.conjugate(), zb_zero, sp)  # conj(B)(z, z)
    assert eq_w.is_zero()
    meta = SEGRE_TABLE[_segre_key(t)]
    out = {"type": t.tag, "equations": {"w": "0", "Bbar": eq_b.to_json()}, "table": dict(meta)}
    if eq_b.is_zero():
        out["complex_dimension"] = n
        out["singular"] = False
        out["contained"] = M.rho.is_zero()
    else:
        q = QuadraticPair.from_rho(eq_b.conjugate(), n)
        r = la.rank(q.B)
        out["complex_dimension"] = n - 1
        out["singular"] = r >= 2
        if r == 1:
            # Bbar = c * ell^2; pick ell from a nonzero row
            i = next(i for i in range(n) if any(x for x in q.B[i]))
            row = [x.conjugate() for x in q.B[i]]
            ell = Series.zero(sp)
            for j, c in enumerate(row):
                if c:
                    ell = ell + Series.var(sp, f"z{j + 1}") * c
            out["contained"] = _vanishes_on_hyperplane(M.rho, ell, n)
        else:
            # rho is a constant multiple of conj(Bbar): it vanishes wherever Bbar does
            rb = eq_b.conjugate()
            k = next(iter(rb.terms))
            c = M.rho.terms.get(k, ZERO) / rb.terms[k]
            out["contained"] = (M.rho - rb * c).is_zero() and bool(c)
    # Q'_0 for the types where it differs from Q_0
    if meta["Qprime"] == "w=0, z1=0":
        out["Qprime_contained"] = _vanishes_on_hyperplane(M.rho, Series.var(sp, "z1"), n)
    dims = {"n": n, "n-1": n - 1}
    out["matches_table"] = (out["singular"] == meta["singular"] and out["contained"] == meta["contained"]
                            and out["complex_dimension"] == dims[meta["dim"]])
    return out


# ---------------------------------------------------------------------------
# pointwise reclassification


def recenter(M: GraphSubmanifold, z0: Sequence) -> Series:
    """rho(Z + z0, Zb + conj(z0)) - rho(z0, conj(z0)) for polynomial rho."""
    z0 = [gr() + c for c in z0]
    if all(not c for c in z0):
        return M.rho
    if M.rho.trunc is not None:
        raise TruncationError("truncation budget exhausted: a truncated rho cannot be recentered at a nonzero point")
    sp = M.space
    subst = {}
    for j, c in enumerate(z0):
        subst[f"z{j + 1}"] = Series.var(sp, f"z{j + 1}") + c
        subst[f"zb{j + 1}"] = Series.var(sp, f"zb{j + 1}") + c.conjugate()
    out = substitute(M.rho, subst, sp)
    return out - out.constant_term()


def classify_at_point(M: GraphSubmanifold, z0: Sequence) -> dict:
    n = M.n
    rho = recenter(M, z0)
    grad = [rho.differentiate(f"zb{j + 1}").constant_term() for j in range(n)]
    if any(grad):
        raise NotCRSingular(f"point {list(map(repr, z0))} is a CR point")
    pair = QuadraticPair.from_rho(rho, n)
    t, wit = classify_quadric(pair)
    holo = rho.filter(lambda e: sum(e[n:]) == 0 and sum(e[:n]) <= 2)
    return {"type": t, "pair": pair, "witness": wit, "absorbed_holomorphic": holo}


def rank_profile(M: GraphSubmanifold, z0: Sequence) -> Tuple[int, int]:
    """(rank A, rank B) of the quadratic part at a CR-singular point."""
    pair = QuadraticPair.from_rho(recenter(M, z0), M.n)
    return la.rank(pair.A), la.rank(pair.B)


def ranks_semicontinuous(M: GraphSubmanifold, base: Sequence, nearby: Sequence[Sequence]) -> bool:
    """Ranks of A and B at each nearby CR-singular point are at least the ranks at ``base``."""
    ra, rb = rank_profile(M, base)
    return all(a >= ra and b >= rb for a, b in (rank_profile(M, z) for z in nearby))


# ---------------------------------------------------------------------------
# normalized frame of the Levi foliation for C.0 / C.1


def foliation_basis(M: GraphSubmanifold, d: int) -> List[List[Series]]:
    """Vectors ``w_j = (v1, 1, e_j)`` (j = 2..n) with ``v* L v = 0`` mod degree ``d``.

    Requires the quadratic part in normal form ``A = E12``.  The first
    component is found by the fixed point ``v1 <- v1 - conj(phi(v))``, where
    ``phi(v) = sum L_ab conj(v_a) v_b`` has ``conj(v1)`` with unit coefficient.
    """
    n = M.n
    if n < 2:
        raise ValueError("need n >= 2")
    if M.trunc is not None and d > M.trunc - 2:
        raise TruncationError(f"degree {d} exceeds trunc - 2 = {M.trunc - 2}")
    pair = M.quadratic_pair()
    t, _ = classify_quadric(pair)
    if t.kind != "C":
        raise ValueError(f"foliation basis needs type C.0 or C.1, got {t.tag}")
    if not la.mat_eq(pair.A, la.unit(n, 0, 1)):
        raise ValueError("quadratic part must be in normal form A = E12")
    sp = M.space
    rho = Series(sp, M.rho.terms if M.trunc is None else M.rho.truncate(M.trunc).terms, None)
    L = levi_matrix(rho, n)
    basis = []
    for j in range(2, n + 1):
        v = [Series.zero(sp, d) for _ in range(n)]
        v[1] = Series.const(sp, 1, d)
        if j > 2:
            v[j - 1] = Series.const(sp, 1, d)
        for _ in range(d + 2):
            phi = sesquilinear(v, L, v, d)
            new1 = (v[0] - phi.conjugate()).truncate(d, _force=True)
            if new1.terms == v[0].terms:
                break
            v[0] = new1
        else:  # pragma: no cover
            raise RuntimeError("foliation iteration did not stabilize")
        assert sesquilinear(v, L, v, d).is_zero(), "frame equation not solved"
        basis.append(v)
    return basis


def verify_foliation_basis(M: GraphSubmanifold, basis: List[List[Series]], d: int) -> bool:
    sp = M.space
    rho = Series(sp, M.rho.terms if M.trunc is None else M.rho.truncate(M.trunc).terms, None)
    L = levi_matrix(rho, M.n)
    return all(sesquilinear(v, L, v, d).is_zero() for v in basis)


# ---------------------------------------------------------------------------
# catalog tables for the six quadric types


def _ps(expr: str, n: int) -> Series:
    return parse_series(expr, VarSpace.complexified(n))


def cr_singular_table(n: int) -> Dict[str, dict]:
    """Reference CR-singular rows.  The B.1/2 row lists ``w = 0``; see
    the ``computed_w`` field of :func:`check_cr_row` for the computed value."""
    rows = {
        "A.1": {"equations": ["z1"], "w": "0", "dim": 2 * n - 2, "structure": "complex"},
        f"A.{n}": {"equations": [f"z{j}" for j in range(1, n + 1)], "w": "0", "dim": 0, "structure": "complex"},
        "B.0": {"equations": ["z1"], "w": "0", "dim": 2 * n - 2, "structure": "complex"},
        "B.gamma": {"equations": ["z1"], "w": "0", "dim": 2 * n - 2, "structure": "complex"},
        "B.1/2": {"equations": ["z1 + zb1"], "w": "0", "dim": 2 * n - 1, "structure": "Levi-flat"},
        "C.0": {"equations": ["z2"], "w": "0", "dim": 2 * n - 2, "structure": "complex"},
        "C.1": {"equations": ["z2 + 2*zb1"], "w": "-z2^2/4", "dim": 2 * n - 2, "structure": "Levi-flat"},
    }
    return rows


def check_cr_row(M: GraphSubmanifold, row: dict) -> dict:
    """Compare the computed locus of a quadric with a table row."""
    n = M.n
    raw = describe_linear_locus(M)
    eqs = [_ps(e, n) for e in row["equations"]]
    same_locus = same_linear_locus(raw["equations"], eqs, n)
    table_w = _ps(row["w"], n)
    # compare w on the locus after reducing the table value the same way
    sp = M.space
    red_table = substitute(table_w, _locus_substitution(raw["equations"], sp), sp)
    return {"locus_matches": same_locus, "dimension_matches": raw["real_dimension"] == row["dim"],
            "w_matches": (raw["w_on_locus"] - red_table).is_zero(),
            "computed_w": raw["w_on_locus"]}


def _locus_substitution(eqs: List[Series], sp: VarSpace) -> Dict[str, Series]:
    n = sp.nvars // 2
    order = [f"zb{j + 1}" for j in range(n)] + [f"z{j + 1}" for j in range(n)]
    out = {}
    for e in eqs:
        p = next(v for v in order if e.coeff({v: 1}))
        out[p] = Series.var(sp, p) - e * e.coeff({p: 1}).inverse()
    return out
