"""Levi-flat quadrics ``w = A(z, zb) + B(zb, zb)``: transformation law,
Levi-flatness test and the classifier into the types A.k, B.gamma, C.0, C.1.

Conventions: ``A(z, zb) = sum a_jk zb_j z_k`` and ``B(zb, zb) = sum b_jk zb_j zb_k``
with ``B`` symmetric.  A linear change ``z = T z'`` together with ``w = w'/lam``
sends ``(A, B)`` to ``(lam T* A T, lam T* B conj(T))``.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import gmpy2

from . import linalg as la
from .linalg import Matrix
from .series import ONE, ZERO, GaussianRational, Series, VarSpace, gr, mpq


class NotLeviFlat(ValueError):
    """The quadric fails the Levi-flatness test."""


class Degenerate(ValueError):
    """A = B = 0: the complex tangent is not of the expected form."""


# ---------------------------------------------------------------------------
# exact square roots in Q(i)


def rational_sqrt(q: mpq) -> Optional[mpq]:
    if q < 0:
        return None
    n, d = q.numerator, q.denominator
    if gmpy2.is_square(n) and gmpy2.is_square(d):
        return mpq(gmpy2.isqrt(n), gmpy2.isqrt(d))
    return None


def gaussian_sqrt(z: GaussianRational) -> Optional[GaussianRational]:
    """A square root inside Q(i), or ``None`` when it does not exist."""
    if not z:
        return ZERO
    m = rational_sqrt(z.norm2())
    if m is None:
        return None
    a2 = (z.re + m) / 2
    a = rational_sqrt(a2)
    if a is None:
        return None
    if a:
        b = z.im / (2 * a)
    else:
        b = rational_sqrt(-z.re)
        if b is None:
            return None
    r = GaussianRational(a, b)
    return r if r * r == z else None


# ---------------------------------------------------------------------------
# data types


@dataclass
class QuadraticPair:
    n: int
    A: Matrix
    B: Matrix

    def __post_init__(self):
        self.A = la.as_matrix(self.A)
        B = la.as_matrix(self.B)
        if len(self.A) != self.n or len(B) != self.n:
            raise ValueError("matrix size does not match n")
        half = gr("1/2")
        self.B = [[(B[i][j] + B[j][i]) * half for j in range(self.n)] for i in range(self.n)]

    def is_zero(self) -> bool:
        return la.is_zero(self.A) and la.is_zero(self.B)

    def space(self) -> VarSpace:
        return VarSpace.complexified(self.n)

    def rho(self, space: Optional[VarSpace] = None) -> Series:
        """The defining function as an exact polynomial in (z, zb)."""
        sp = space or self.space()
        n = self.n
        z = [Series.var(sp, f"z{j + 1}") for j in range(n)]
        zb = [Series.var(sp, f"zb{j + 1}") for j in range(n)]
        out = Series.zero(sp)
        for j in range(n):
            for k in range(n):
                if self.A[j][k]:
                    out = out + zb[j] * z[k] * self.A[j][k]
                if self.B[j][k]:
                    out = out + zb[j] * zb[k] * self.B[j][k]
        return out

    @classmethod
    def from_rho(cls, rho: Series, n: int) -> "QuadraticPair":
        """Read (A, B) off the quadratic part of a defining function."""
        A = la.zeros(n)
        B = la.zeros(n)
        for j in range(n):
            for k in range(n):
                A[j][k] = rho.coeff({f"zb{j + 1}": 1, f"z{k + 1}": 1})
                if j == k:
                    B[j][k] = rho.coeff({f"zb{j + 1}": 2})
                else:
                    B[j][k] = rho.coeff({f"zb{j + 1}": 1, f"zb{k + 1}": 1}) * gr("1/2")
        return cls(n, A, B)

    def to_json(self) -> dict:
        return {"n": self.n, "A": la.to_json(self.A), "B": la.to_json(self.B)}

    @classmethod
    def from_json(cls, obj) -> "QuadraticPair":
        return cls(int(obj["n"]), la.from_json(obj["A"]), la.from_json(obj["B"]))

    def __eq__(self, other):
        return (isinstance(other, QuadraticPair) and self.n == other.n
                and la.mat_eq(self.A, other.A) and la.mat_eq(self.B, other.B))


@dataclass(frozen=True)
class QuadricType:
    """``kind`` is one of "A", "B", "C"; ``k`` is the rank for A and 0/1 for C;
    ``gamma2`` is the exact square of the invariant for B."""

    kind: str
    k: int = 0
    gamma2: Optional[mpq] = None

    @property
    def tag(self) -> str:
        if self.kind == "A":
            return f"A.{self.k}"
        if self.kind == "C":
            return f"C.{self.k}"
        return "B.0" if not self.gamma2 else "B.gamma"

    def __str__(self):
        if self.kind == "B" and self.gamma2:
            return f"B.gamma(gamma^2={self.gamma2.numerator}/{self.gamma2.denominator})"
        return self.tag

    def to_json(self) -> dict:
        d = {"type": self.tag}
        if self.kind == "B":
            d["gamma_squared"] = f"{self.gamma2.numerator}/{self.gamma2.denominator}"
        return d


@dataclass
class NormalizingWitness:
    """``(T, lam)`` is exact over Q(i) and reaches a pre-normal form.

    The last step is a diagonal rescaling ``z_j -> d_j z_j`` recorded through
    ``dbar_sq[j] = conj(d_j)^2``.  When these squares
    have square roots in Q(i) the full witness is folded into ``T`` and
    ``field_note`` is "Q(i)".  Otherwise the entries need a quadratic extension
    and ``field_note`` says so; verification then runs on the squared data.
    """

    T: Matrix
    lam: GaussianRational
    dbar_sq: List[Optional[GaussianRational]] = field(default_factory=list)
    field_note: str = "Q(i)"
    # for C.1 the second coordinate is scaled by 1/conj(d_1); recorded as a flag
    c1_pair: bool = False
    # for B.gamma the final entry squared (gamma^2) and the rotation square
    rotation_sq: Optional[GaussianRational] = None

    def to_json(self) -> dict:
        d = {"T": la.to_json(self.T), "lambda": self.lam.to_json(), "field_note": self.field_note}
        if self.dbar_sq:
            d["diag_conj_squares"] = [x.to_json() if x is not None else None for x in self.dbar_sq]
        if self.rotation_sq is not None:
            d["rotation_fourth_power"] = self.rotation_sq.to_json()
        return d


# ---------------------------------------------------------------------------
# operations


def transform_pair(p: QuadraticPair, T: Matrix, lam) -> QuadraticPair:
    lam = gr() + lam
    if not lam:
        raise ValueError("lambda must be nonzero")
    T = la.as_matrix(T)
    if la.rank(T) != len(T):
        raise ValueError("T is singular")
    Ts = la.adjoint(T)
    A = la.mat_scale(la.mat_mul(la.mat_mul(Ts, p.A), T), lam)
    B = la.mat_scale(la.mat_mul(la.mat_mul(Ts, p.B), la.conj(T)), lam)
    assert la.mat_eq(B, la.transpose(B))
    return QuadraticPair(p.n, A, B)


def pullback_pair(p: QuadraticPair, K: Matrix) -> QuadraticPair:
    """(K* A K, K* B conj(K)) for a rectangular n x m matrix K."""
    Ks = la.adjoint(K)
    A = la.mat_mul(la.mat_mul(Ks, p.A), K)
    B = la.mat_mul(la.mat_mul(Ks, p.B), la.conj(K))
    return QuadraticPair(len(K[0]), A, B)


def restrict_pair(p: QuadraticPair, L: Matrix) -> QuadraticPair:
    """Restrict to the subspace {L z = 0} using the kernel basis of ``L``."""
    L = la.as_matrix(L)
    if la.rank(L) != len(L):
        raise ValueError("L must have full row rank")
    K = la.transpose(la.kernel(L))
    q = pullback_pair(p, K)
    if q.is_zero():
        raise Degenerate("restriction is identically zero")
    return q


def _dbar_forms(p: QuadraticPair, sp: VarSpace) -> List[Series]:
    """g_m = d rho / d zb_m for m = 1..n."""
    rho = p.rho(sp)
    return [rho.differentiate(f"zb{m + 1}") for m in range(p.n)]


def kernel_generators(ells: List[Series]) -> Tuple[int, List[List[Series]]]:
    """Generators ell_j e_p - ell_p e_j of the kernel of v -> sum v_m ell_m."""
    n = len(ells)
    p = next((m for m in range(n) if not ells[m].is_zero()), None)
    if p is None:
        raise Degenerate("the functional vanishes identically")
    sp = ells[p].space
    gens = []
    for j in range(n):
        if j == p:
            continue
        v = [Series.zero(sp) for _ in range(n)]
        v[p] = ells[j]
        v[j] = -ells[p]
        gens.append(v)
    return p, gens


def sesquilinear(u: List[Series], M: List[List], v: List[Series], trunc: Optional[int] = None) -> Series:
    """u* M v with formal conjugation of the components of u."""
    sp = u[0].space
    out = Series.zero(sp, trunc)
    ub = [x.conjugate() for x in u]
    for i, ui in enumerate(ub):
        if ui.is_zero():
            continue
        inner = Series.zero(sp, trunc)
        for k, vk in enumerate(v):
            m = M[i][k]
            if isinstance(m, Series):
                if m.is_zero() or vk.is_zero():
                    continue
                inner = inner + (m * vk).truncate(trunc, _force=True) if trunc is not None else inner + m * vk
            elif m and not vk.is_zero():
                inner = inner + vk * m
        prod = ui * inner
        out = out + (prod.truncate(trunc, _force=True) if trunc is not None else prod)
    return out


@dataclass
class LeviVerdict:
    levi_flat: bool
    witness: Optional[dict] = None
    pivot: int = 0

    def to_json(self) -> dict:
        d = {"levi_flat": self.levi_flat}
        if self.witness is not None:
            d["witness"] = self.witness
        return d


def levi_flat_quadric_test(p: QuadraticPair) -> LeviVerdict:
    if p.is_zero():
        raise Degenerate("A = B = 0")
    sp = p.space()
    g = _dbar_forms(p, sp)
    ells = [x.conjugate() for x in g]
    piv, gens = kernel_generators(ells)
    for a, u in enumerate(gens):
        for b, v in enumerate(gens):
            prod = sesquilinear(u, p.A, v)
            if not prod.is_zero():
                k = prod.sorted_keys()[0]
                exps = sp.unpack(k)
                return LeviVerdict(False, {
                    "pair": [a, b],
                    "monomial": _mono_str(sp, exps),
                    "exp": list(exps),
                    "coefficient": prod.terms[k].to_json(),
                    "product": prod.to_json(),
                }, piv)
    return LeviVerdict(True, None, piv)


def _mono_str(sp: VarSpace, exps) -> str:
    parts = [f"{n}^{e}" if e > 1 else n for n, e in zip(sp.names, exps) if e]
    return "*".join(parts) or "1"


# ---------------------------------------------------------------------------
# classification


def symmetric_congruence(B: Matrix) -> Tuple[Matrix, List[GaussianRational]]:
    """Invertible S with S^T B S diagonal (bilinear, not Hermitian)."""
    n = len(B)
    M = [list(r) for r in B]
    S = la.identity(n)

    def col_op(i, j, c):  # e_i <- e_i + c e_j
        for r in range(n):
            S[r][i] = S[r][i] + c * S[r][j]
        for r in range(n):
            M[r][i] = M[r][i] + c * M[r][j]
        for r in range(n):
            M[i][r] = M[i][r] + c * M[j][r]

    def swap(i, j):
        for r in range(n):
            S[r][i], S[r][j] = S[r][j], S[r][i]
            M[r][i], M[r][j] = M[r][j], M[r][i]
        M[i], M[j] = M[j], M[i]

    for i in range(n):
        if not M[i][i]:
            j = next((j for j in range(i + 1, n) if M[j][j]), None)
            if j is not None:
                swap(i, j)
            else:
                j = next((j for j in range(i + 1, n) if M[i][j]), None)
                if j is None:
                    continue
                col_op(i, j, ONE)
        piv = M[i][i]
        for j in range(i + 1, n):
            if M[i][j]:
                col_op(j, i, -(M[i][j] / piv))
    diag = [M[i][i] for i in range(n)]
    for i in range(n):
        for j in range(n):
            assert i == j or not M[i][j]
    return S, diag


def representative(t: QuadricType, n: int, gamma: Optional[GaussianRational] = None) -> QuadraticPair:
    """Catalog representative.  For B.gamma an exact gamma must be supplied
    when it is rational; otherwise use :func:`check_normal_form_squared`."""
    A = la.zeros(n)
    B = la.zeros(n)
    if t.kind == "A":
        for j in range(t.k):
            B[j][j] = ONE
    elif t.kind == "B":
        A[0][0] = ONE
        if gamma is None:
            r = rational_sqrt(t.gamma2)
            if r is None:
                raise ValueError("gamma is irrational; representative is not over Q(i)")
            gamma = GaussianRational(r, 0)
        B[0][0] = gamma
    else:
        A[0][1] = ONE
        if t.k == 1:
            B[0][0] = ONE
    return QuadraticPair(n, A, B)


def _rank1_factor(A: Matrix) -> Tuple[List[GaussianRational], List[GaussianRational]]:
    n = len(A)
    j = next(j for j in range(n) if any(A[i][j] for i in range(n)))
    u = [A[i][j] for i in range(n)]
    i = next(i for i in range(n) if u[i])
    v = [(A[i][k] / u[i]).conjugate() for k in range(n)]
    for r in range(n):
        for c in range(n):
            if A[r][c] != u[r] * v[c].conjugate():
                raise NotLeviFlat("A has rank > 1")
    return u, v


def classify_quadric(p: QuadraticPair, check: bool = True) -> Tuple[QuadricType, NormalizingWitness]:
    if p.is_zero():
        raise Degenerate("A = B = 0")
    if check:
        v = levi_flat_quadric_test(p)
        if not v.levi_flat:
            raise NotLeviFlat(f"not Levi-flat; witness coefficient at {v.witness['monomial']}")
    n = p.n
    if la.is_zero(p.A):
        S, diag = symmetric_congruence(p.B)
        k = sum(1 for d in diag if d)
        # order nonzero diagonal entries first
        order = [i for i in range(n) if diag[i]] + [i for i in range(n) if not diag[i]]
        P = [[ONE if order[c] == r else ZERO for c in range(n)] for r in range(n)]
        S = la.mat_mul(S, P)
        diag = [diag[i] for i in order]
        T = la.conj(S)
        dbar_sq = [d.inverse() if d else None for d in diag]
        wit = NormalizingWitness(T, ONE, dbar_sq)
        _fold_diagonal(wit, p, QuadricType("A", k))
        return QuadricType("A", k), wit
    if la.rank(p.A) != 1:
        raise NotLeviFlat("A has rank > 1")
    u, v = _rank1_factor(p.A)
    if la.rank(la.transpose([u, v])) == 1:
        # v = kappa u ; A = conj(kappa) u u*
        i = next(i for i in range(n) if u[i])
        kappa = v[i] / u[i]
        U = la.complete_basis([u], n)
        Ts = la.mat_inv(U)
        T = la.adjoint(Ts)
        lam = kappa.conjugate().inverse()
        q = transform_pair(p, T, lam)
        beta = q.B[0][0]
        _expect_only(q, [(0, 0)], "A", [(0, 0)])
        g2 = beta.norm2()
        t = QuadricType("B", 0, g2)
        wit = NormalizingWitness(T, lam)
        if beta:
            # conj(d)^2 = gamma/beta ; (conj(d)^2)^2 = gamma^2/beta^2 lies in Q(i)
            wit.rotation_sq = GaussianRational(g2, 0) / (beta * beta)
            gamma = rational_sqrt(g2)
            if gamma is not None:
                dsq = GaussianRational(gamma, 0) / beta
                d = gaussian_sqrt(dsq.conjugate())
                if d is not None:
                    D = la.identity(n)
                    D[0][0] = d
                    wit.T = la.mat_mul(T, D)
                    wit.rotation_sq = None
                else:
                    wit.field_note = "quadratic extension: conj(d1)^2 = gamma/b11 has no square root in Q(i)"
                    wit.dbar_sq = [dsq] + [ONE] * (n - 1)
            else:
                wit.field_note = "quadratic extension: gamma = sqrt(gamma^2) is irrational"
        return t, wit
    # C branch
    U = la.complete_basis([u, v], n)
    Ts = la.mat_inv(U)
    T = la.adjoint(Ts)
    q = transform_pair(p, T, ONE)
    _expect_only(q, [(0, 0)], "A", [(0, 1)])
    beta = q.B[0][0]
    if not beta:
        return QuadricType("C", 0), NormalizingWitness(T, ONE)
    wit = NormalizingWitness(T, ONE, c1_pair=True)
    sbar_sq = beta.inverse()
    sbar = gaussian_sqrt(sbar_sq)
    if sbar is not None:
        D = la.identity(n)
        D[0][0] = sbar.conjugate()
        D[1][1] = sbar.inverse()
        wit.T = la.mat_mul(T, D)
        wit.c1_pair = False
    else:
        wit.dbar_sq = [sbar_sq]
        wit.field_note = "quadratic extension: conj(s)^2 = 1/b11 has no square root in Q(i)"
    return QuadricType("C", 1), wit


def _expect_only(q: QuadraticPair, b_support, _a, a_support):
    n = q.n
    for i in range(n):
        for j in range(n):
            if (i, j) not in a_support and q.A[i][j]:
                raise NotLeviFlat("unexpected A entry after normalization")
            if (i, j) in a_support and q.A[i][j] != ONE:
                raise NotLeviFlat("A did not normalize")
            if (i, j) not in b_support and q.B[i][j]:
                raise NotLeviFlat("B has entries incompatible with Levi-flatness")


def _fold_diagonal(wit: NormalizingWitness, p: QuadraticPair, t: QuadricType):
    """Fold an exact diagonal rescaling into T when all square roots exist."""
    n = p.n
    ds = []
    for x in wit.dbar_sq:
        if x is None:
            ds.append(ONE)
            continue
        r = gaussian_sqrt(x)
        if r is None:
            wit.field_note = "quadratic extension: some diagonal entry of the congruence is not a square in Q(i)"
            return
        ds.append(r.conjugate())
    D = [[ds[i] if i == j else ZERO for j in range(n)] for i in range(n)]
    wit.T = la.mat_mul(wit.T, D)
    wit.dbar_sq = []


def check_witness(p: QuadraticPair, t: QuadricType, wit: NormalizingWitness) -> bool:
    """Exact soundness check of a classification witness."""
    q = transform_pair(p, wit.T, wit.lam)
    n = p.n
    if wit.field_note == "Q(i)":
        if t.kind == "B":
            g = rational_sqrt(t.gamma2)
            return q == representative(t, n, GaussianRational(g, 0))
        return q == representative(t, n)
    if t.kind == "A":
        # B diagonal; conj(d_j)^2 * b_jj = 1 for the first k entries
        for i in range(n):
            for j in range(n):
                if q.A[i][j] or (i != j and q.B[i][j]):
                    return False
        for j in range(n):
            b = q.B[j][j]
            if j < t.k:
                if not b or wit.dbar_sq[j] * b != ONE:
                    return False
            elif b:
                return False
        return True
    if t.kind == "B":
        beta = q.B[0][0]
        if not la.mat_eq(q.A, la.unit(n, 0, 0)):
            return False
        if wit.rotation_sq is not None:
            # (conj(d)^2)^2 has modulus 1 and turns beta^2 into gamma^2
            return wit.rotation_sq.norm2() == 1 and wit.rotation_sq * beta * beta == GaussianRational(t.gamma2, 0)
        return wit.dbar_sq[0] * beta == GaussianRational(rational_sqrt(t.gamma2), 0)
    # C.1 with conj(s)^2 = 1/b11 and second coordinate scaled by 1/conj(s)
    return q.A[0][1] == ONE and wit.dbar_sq[0] * q.B[0][0] == ONE


# ---------------------------------------------------------------------------
# catalog


def catalog_pairs(n: int = 2, gamma: GaussianRational = gr("1/3")) -> Dict[str, QuadraticPair]:
    """One representative per type: A.1, A.2 (or A.n), B.0, B.gamma, C.0, C.1."""
    return {
        "A.1": representative(QuadricType("A", 1), n),
        f"A.{n}": representative(QuadricType("A", n), n),
        "B.0": representative(QuadricType("B", 0, mpq(0)), n),
        "B.gamma": representative(QuadricType("B", 0, gamma.norm2()), n, gamma),
        "C.0": representative(QuadricType("C", 0), n),
        "C.1": representative(QuadricType("C", 1), n),
    }


SMALL_ENTRIES = [gr(a, b) for a in (-2, -1, 0, 1, 2) for b in (-1, 0, 1)] + [gr("1/2"), gr(0, "-1/2"), gr("1/3", 1)]


def random_invertible(n: int, rng: random.Random) -> Matrix:
    while True:
        T = [[rng.choice(SMALL_ENTRIES) for _ in range(n)] for _ in range(n)]
        if la.rank(T) == n:
            return T


def random_conjugate(p: QuadraticPair, rng: random.Random) -> Tuple[QuadraticPair, Matrix, GaussianRational]:
    """(T, lam) with entries from a small Gaussian-rational set; returns the transformed pair."""
    T = random_invertible(p.n, rng)
    lam = rng.choice([x for x in SMALL_ENTRIES if x])
    return transform_pair(p, T, lam), T, lam
