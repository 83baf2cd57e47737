"""Exact truncated multivariate power series over the Gaussian rationals.

A series lives in a :class:`VarSpace`, an ordered list of variable names with
positive weights and an optional conjugate pairing (``z1 <-> zb1``).  The
variables ``z`` and ``zb`` are independent formal symbols; realness is a
property that can be checked, not a type.

Coefficients are :class:`GaussianRational` numbers built on ``gmpy2.mpq`` so
every identity in the package is decided by exact zero tests.

Truncation
----------
``trunc`` is the largest *weighted* degree through which the coefficients are
reliable.  With all weights equal to 1 this is the usual total degree.  The
value ``None`` marks an exact polynomial (no truncation at all), which is the
natural state of closed-form inputs such as quadrics.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

from gmpy2 import mpq

__all__ = [
    "GaussianRational",
    "VarSpace",
    "Series",
    "TruncationError",
    "SpaceMismatch",
    "gr",
    "min_trunc",
]

BITS = 16
MASK = (1 << BITS) - 1
MAX_EXP = MASK


class TruncationError(ValueError):
    """Raised when a request exceeds the reliable degree range."""


class SpaceMismatch(ValueError):
    """Raised when operands live in different variable spaces."""


# ---------------------------------------------------------------------------
# coefficients


def _to_mpq(x) -> mpq:
    if isinstance(x, str):
        s = x.strip()
        if "/" in s:
            p, q = s.split("/")
            q = int(q)
            if q == 0:
                raise ZeroDivisionError(f"zero denominator in {x!r}")
            return mpq(int(p), q)
        return mpq(int(s))
    if isinstance(x, Fraction):
        return mpq(x.numerator, x.denominator)
    if isinstance(x, float):
        raise TypeError("floating point coefficients are not accepted")
    return mpq(x)


class GaussianRational:
    """An element re + i*im of Q(i), stored in lowest terms."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = re if type(re) is type(_ZERO_Q) else _to_mpq(re)
        self.im = im if type(im) is type(_ZERO_Q) else _to_mpq(im)

    @classmethod
    def coerce(cls, x) -> "GaussianRational":
        if isinstance(x, GaussianRational):
            return x
        if isinstance(x, complex):
            raise TypeError("floating point coefficients are not accepted")
        if isinstance(x, (tuple, list)) and len(x) == 2:
            return cls(x[0], x[1])
        if isinstance(x, Mapping):
            return cls(x.get("re", 0), x.get("im", 0))
        return cls(x, 0)

    # arithmetic
    def __add__(self, o):
        o = _coerce(o)
        return GaussianRational(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, o):
        o = _coerce(o)
        return GaussianRational(self.re - o.re, self.im - o.im)

    def __rsub__(self, o):
        return _coerce(o) - self

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __mul__(self, o):
        o = _coerce(o)
        a, b, c, d = self.re, self.im, o.re, o.im
        if not b and not d:
            return GaussianRational(a * c, _ZERO_Q)
        return GaussianRational(a * c - b * d, a * d + b * c)

    __rmul__ = __mul__

    def __truediv__(self, o):
        return self * _coerce(o).inverse()

    def __rtruediv__(self, o):
        return _coerce(o) * self.inverse()

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        out = ONE
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def inverse(self) -> "GaussianRational":
        n = self.re * self.re + self.im * self.im
        if not n:
            raise ZeroDivisionError("inverse of zero")
        return GaussianRational(self.re / n, -self.im / n)

    def conjugate(self) -> "GaussianRational":
        return GaussianRational(self.re, -self.im)

    def norm2(self) -> mpq:
        """|x|^2 as an exact rational."""
        return self.re * self.re + self.im * self.im

    def is_real(self) -> bool:
        return not self.im

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __eq__(self, o):
        if not isinstance(o, GaussianRational):
            try:
                o = _coerce(o)
            except (TypeError, ValueError):
                return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __repr__(self):
        if not self.im:
            return str(self.re)
        if not self.re:
            return f"{self.im}*I"
        return f"({self.re}{'+' if self.im > 0 else ''}{self.im}*I)"

    def to_json(self) -> dict:
        return {"re": _qstr(self.re), "im": _qstr(self.im)}


def _qstr(q: mpq) -> str:
    return f"{q.numerator}/{q.denominator}"


_ZERO_Q = mpq(0)
ZERO = GaussianRational(_ZERO_Q, _ZERO_Q)
ONE = GaussianRational(mpq(1), _ZERO_Q)
I = GaussianRational(_ZERO_Q, mpq(1))


def _coerce(x) -> GaussianRational:
    if type(x) is GaussianRational:
        return x
    return GaussianRational.coerce(x)


def gr(re=0, im=0) -> GaussianRational:
    """Shorthand constructor: ``gr(1, 2)`` is 1 + 2i, ``gr("1/3")`` is 1/3."""
    return GaussianRational(re, im)


def parse_rational(s: str) -> mpq:
    """Strict parser for the canonical ``"p/q"`` JSON form."""
    if not isinstance(s, str):
        raise ValueError(f"rational must be a string 'p/q', got {s!r}")
    return _to_mpq(s)


# ---------------------------------------------------------------------------
# variable spaces


@dataclass(frozen=True)
class VarSpace:
    """Ordered variables with weights and an optional conjugate pairing.

    ``pairs`` lists index pairs (i, j) meaning variable i is the formal
    conjugate of variable j.  ``real`` lists variables that are their own
    conjugate for the purposes of :meth:`Series.conjugate`.
    """

    names: Tuple[str, ...]
    weights: Tuple[int, ...] = ()
    pairs: Tuple[Tuple[int, int], ...] = ()
    real: Tuple[str, ...] = ()
    _cache: dict = field(default_factory=dict, compare=False, hash=False, repr=False)

    def __post_init__(self):
        names = tuple(self.names)
        object.__setattr__(self, "names", names)
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate variable names in {names}")
        w = tuple(self.weights) if self.weights else (1,) * len(names)
        if len(w) != len(names) or any((not isinstance(x, int)) or x <= 0 for x in w):
            raise ValueError("weights must be positive integers, one per variable")
        object.__setattr__(self, "weights", w)
        prs = tuple(sorted(tuple(sorted((int(a), int(b)))) for a, b in self.pairs))
        seen = set()
        for a, b in prs:
            if a == b or a in seen or b in seen or not (0 <= a < len(names) and 0 <= b < len(names)):
                raise ValueError(f"conjugate pairing is not an involution: {prs}")
            if w[a] != w[b]:
                raise ValueError("paired variables must carry equal weights")
            seen.update((a, b))
        object.__setattr__(self, "pairs", prs)
        object.__setattr__(self, "real", tuple(self.real))
        partner = list(range(len(names)))
        for a, b in prs:
            partner[a], partner[b] = b, a
        self._cache["partner"] = tuple(partner)
        self._cache["index"] = {n: i for i, n in enumerate(names)}
        self._cache["wdeg"] = {}
        self._cache["tdeg"] = {}

    # construction helpers
    @classmethod
    def complexified(cls, n: int, extra: Sequence[str] = (), extra_weights: Sequence[int] = (),
                     prefix: str = "z") -> "VarSpace":
        """Variables ``z1..zn, zb1..zbn`` followed by ``extra``."""
        names = [f"{prefix}{j}" for j in range(1, n + 1)] + [f"{prefix}b{j}" for j in range(1, n + 1)]
        names += list(extra)
        weights = [1] * (2 * n) + (list(extra_weights) if extra_weights else [1] * len(extra))
        pairs = [(j, n + j) for j in range(n)]
        return cls(tuple(names), tuple(weights), tuple(pairs))

    @property
    def nvars(self) -> int:
        return len(self.names)

    def index(self, name: str) -> int:
        try:
            return self._cache["index"][name]
        except KeyError:
            raise KeyError(f"variable {name!r} not in space {self.names}") from None

    def __contains__(self, name) -> bool:
        return name in self._cache["index"]

    def partner_index(self, i: int) -> int:
        return self._cache["partner"][i]

    def weight_of(self, name: str) -> int:
        return self.weights[self.index(name)]

    def pack(self, exps: Sequence[int]) -> int:
        if len(exps) != len(self.names):
            raise ValueError(f"exponent vector {tuple(exps)} does not match {self.names}")
        key = 0
        for i, e in enumerate(exps):
            if e < 0 or e > MAX_EXP:
                raise ValueError(f"exponent {e} out of range")
            key |= int(e) << (BITS * i)
        return key

    def unpack(self, key: int) -> Tuple[int, ...]:
        return tuple((key >> (BITS * i)) & MASK for i in range(len(self.names)))

    def wdeg(self, key: int) -> int:
        c = self._cache["wdeg"]
        d = c.get(key)
        if d is None:
            d = sum(w * ((key >> (BITS * i)) & MASK) for i, w in enumerate(self.weights))
            c[key] = d
        return d

    def tdeg(self, key: int) -> int:
        c = self._cache["tdeg"]
        d = c.get(key)
        if d is None:
            d = sum((key >> (BITS * i)) & MASK for i in range(len(self.names)))
            c[key] = d
        return d

    def var_key(self, name: str, power: int = 1) -> int:
        return power << (BITS * self.index(name))

    def to_json(self) -> dict:
        return {"vars": list(self.names), "weights": list(self.weights),
                "pairs": [list(p) for p in self.pairs]}

    def __eq__(self, other):
        if not isinstance(other, VarSpace):
            return NotImplemented
        return (self.names == other.names and self.weights == other.weights
                and self.pairs == other.pairs and self.real == other.real)

    def __hash__(self):
        return hash((self.names, self.weights, self.pairs, self.real))


def min_trunc(*ts: Optional[int]) -> Optional[int]:
    """Minimum of truncation orders, with ``None`` meaning exact."""
    vals = [t for t in ts if t is not None]
    return min(vals) if vals else None


# ---------------------------------------------------------------------------
# series


Coeff = Union[GaussianRational, int, str, Fraction]


class Series:
    """Immutable truncated series.  ``terms`` maps packed exponent keys to
    nonzero :class:`GaussianRational` coefficients."""

    __slots__ = ("space", "terms", "trunc", "_hash")

    def __init__(self, space: VarSpace, terms: Optional[Dict[int, GaussianRational]] = None,
                 trunc: Optional[int] = None, _trusted: bool = False):
        self.space = space
        self.trunc = trunc
        self._hash = None
        if terms is None:
            terms = {}
        if _trusted:
            self.terms = terms
            return
        out = {}
        for k, c in terms.items():
            c = _coerce(c)
            if c and (trunc is None or space.wdeg(k) <= trunc):
                out[k] = c
        self.terms = out

    # -- constructors ------------------------------------------------------
    @classmethod
    def zero(cls, space: VarSpace, trunc: Optional[int] = None) -> "Series":
        return cls(space, {}, trunc, _trusted=True)

    @classmethod
    def const(cls, space: VarSpace, c: Coeff, trunc: Optional[int] = None) -> "Series":
        return cls(space, {0: _coerce(c)}, trunc)

    @classmethod
    def var(cls, space: VarSpace, name: str, trunc: Optional[int] = None) -> "Series":
        return cls(space, {space.var_key(name): ONE}, trunc)

    @classmethod
    def monomial(cls, space: VarSpace, exps: Mapping[str, int], c: Coeff = 1,
                 trunc: Optional[int] = None) -> "Series":
        key = 0
        for name, e in exps.items():
            key += space.var_key(name, e)
        return cls(space, {key: _coerce(c)}, trunc)

    @classmethod
    def from_dict(cls, space: VarSpace, d: Mapping[Tuple[int, ...], Coeff],
                  trunc: Optional[int] = None) -> "Series":
        terms: Dict[int, GaussianRational] = {}
        for exps, c in d.items():
            k = space.pack(exps)
            terms[k] = terms.get(k, ZERO) + _coerce(c)
        return cls(space, terms, trunc)

    # -- basic queries -----------------------------------------------------
    def items(self) -> Iterator[Tuple[Tuple[int, ...], GaussianRational]]:
        """(exponent tuple, coefficient) pairs in canonical graded order."""
        for k in self.sorted_keys():
            yield self.space.unpack(k), self.terms[k]

    def sorted_keys(self) -> List[int]:
        sp = self.space
        return sorted(self.terms, key=lambda k: (sp.wdeg(k), tuple(-e for e in sp.unpack(k))))

    def coeff(self, exps: Union[Sequence[int], Mapping[str, int]]) -> GaussianRational:
        if isinstance(exps, Mapping):
            key = sum(self.space.var_key(n, e) for n, e in exps.items())
        else:
            key = self.space.pack(exps)
        return self.terms.get(key, ZERO)

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def __len__(self):
        return len(self.terms)

    def is_exact(self) -> bool:
        return self.trunc is None

    def valuation(self) -> Optional[int]:
        """Lowest weighted degree present, ``None`` for the zero series."""
        if not self.terms:
            return None
        sp = self.space
        return min(sp.wdeg(k) for k in self.terms)

    def max_degree(self) -> int:
        sp = self.space
        return max((sp.wdeg(k) for k in self.terms), default=-1)

    def max_total_degree(self) -> int:
        sp = self.space
        return max((sp.tdeg(k) for k in self.terms), default=-1)

    def constant_term(self) -> GaussianRational:
        return self.terms.get(0, ZERO)

    def variables(self) -> Tuple[str, ...]:
        """Names of the variables that actually occur."""
        used = 0
        for k in self.terms:
            used |= k
        return tuple(n for i, n in enumerate(self.space.names) if (used >> (BITS * i)) & MASK)

    def degree_in(self, name: str) -> int:
        i = self.space.index(name)
        return max(((k >> (BITS * i)) & MASK for k in self.terms), default=-1)

    # -- arithmetic --------------------------------------------------------
    def _check(self, other: "Series"):
        if self.space != other.space:
            raise SpaceMismatch(f"{self.space.names} vs {other.space.names}")

    def _lift(self, other) -> "Series":
        if isinstance(other, Series):
            self._check(other)
            return other
        return Series(self.space, {0: _coerce(other)}, None)

    def __add__(self, other) -> "Series":
        other = self._lift(other)
        t = min_trunc(self.trunc, other.trunc)
        out = dict(self.terms)
        for k, c in other.terms.items():
            v = out.get(k)
            if v is None:
                out[k] = c
            else:
                s = v + c
                if s:
                    out[k] = s
                else:
                    del out[k]
        return Series(self.space, out, t)._drop_above()

    __radd__ = __add__

    def __neg__(self) -> "Series":
        return Series(self.space, {k: -c for k, c in self.terms.items()}, self.trunc, _trusted=True)

    def __sub__(self, other) -> "Series":
        return self + (-self._lift(other))

    def __rsub__(self, other) -> "Series":
        return self._lift(other) - self

    def __mul__(self, other) -> "Series":
        if not isinstance(other, Series):
            c = _coerce(other)
            if not c:
                return Series.zero(self.space, self.trunc)
            return Series(self.space, {k: v * c for k, v in self.terms.items()}, self.trunc, _trusted=True)
        self._check(other)
        return mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Series":
        if isinstance(other, Series):
            raise TypeError("general series division is not provided; use invert_series or divide_exact")
        return self * _coerce(other).inverse()

    def __pow__(self, k: int) -> "Series":
        if k < 0:
            raise ValueError("negative powers are not supported")
        out = Series.const(self.space, 1, self.trunc)
        base = self
        while k:
            if k & 1:
                out = out * base
            k >>= 1
            if k:
                base = base * base
        return out

    def __eq__(self, other):
        if not isinstance(other, Series):
            return NotImplemented
        return self.space == other.space and self.trunc == other.trunc and self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.space, self.trunc, frozenset(self.terms.items())))
        return self._hash

    def equals_mod(self, other: "Series", d: int) -> bool:
        """Coefficient equality through weighted degree ``d``."""
        t = min_trunc(self.trunc, other.trunc)
        if t is not None and d > t:
            raise TruncationError(f"degree {d} exceeds trunc {t}")
        return (self - other).truncate(d, _force=True).is_zero()

    def _drop_above(self) -> "Series":
        if self.trunc is None:
            return self
        sp = self.space
        t = self.trunc
        if all(sp.wdeg(k) <= t for k in self.terms):
            return self
        return Series(self.space, {k: c for k, c in self.terms.items() if sp.wdeg(k) <= t},
                      t, _trusted=True)

    def truncate(self, d: Optional[int], _force: bool = False) -> "Series":
        """Drop terms above weighted degree ``d`` and declare trunc ``d``.

        Raising the truncation beyond the current reliable range is refused.
        """
        if d is None:
            return self
        if self.trunc is not None and d > self.trunc and not _force:
            raise TruncationError(f"cannot raise trunc from {self.trunc} to {d}")
        t = d if self.trunc is None else min(d, self.trunc)
        sp = self.space
        return Series(self.space, {k: c for k, c in self.terms.items() if sp.wdeg(k) <= d},
                      t, _trusted=True)

    def with_trunc(self, t: Optional[int]) -> "Series":
        """Relabel truncation without dropping terms below it (internal use)."""
        return Series(self.space, self.terms, t)

    # -- graded pieces -----------------------------------------------------
    def homogeneous_part(self, d: int) -> "Series":
        """Part of total degree exactly ``d`` (weights ignored)."""
        sp = self.space
        if self.trunc is not None and d * max(sp.weights) > self.trunc:
            raise TruncationError(f"degree {d} exceeds trunc {self.trunc}")
        return Series(sp, {k: c for k, c in self.terms.items() if sp.tdeg(k) == d}, None, _trusted=True)

    def weighted_part(self, d: int) -> "Series":
        """Part of weighted degree exactly ``d``."""
        if self.trunc is not None and d > self.trunc:
            raise TruncationError(f"weight {d} exceeds trunc {self.trunc}")
        sp = self.space
        return Series(sp, {k: c for k, c in self.terms.items() if sp.wdeg(k) == d}, None, _trusted=True)

    def weighted_parts(self) -> Dict[int, "Series"]:
        sp = self.space
        out: Dict[int, Dict[int, GaussianRational]] = {}
        for k, c in self.terms.items():
            out.setdefault(sp.wdeg(k), {})[k] = c
        return {d: Series(sp, t, None, _trusted=True) for d, t in sorted(out.items())}

    def filter(self, pred) -> "Series":
        """Keep the terms whose exponent tuple satisfies ``pred``."""
        sp = self.space
        return Series(sp, {k: c for k, c in self.terms.items() if pred(sp.unpack(k))},
                      self.trunc, _trusted=True)

    # -- calculus ----------------------------------------------------------
    def differentiate(self, name: str) -> "Series":
        sp = self.space
        i = sp.index(name)
        shift = BITS * i
        unit = 1 << shift
        out = {}
        for k, c in self.terms.items():
            e = (k >> shift) & MASK
            if e:
                out[k - unit] = c * e
        t = None if self.trunc is None else self.trunc - sp.weights[i]
        return Series(sp, out, t, _trusted=True)._drop_above()

    def conjugate(self) -> "Series":
        """Swap paired variables and conjugate every coefficient."""
        sp = self.space
        n = sp.nvars
        partner = [sp.partner_index(i) for i in range(n)]
        real = set(sp.index(r) for r in sp.real if r in sp)
        out = {}
        for k, c in self.terms.items():
            nk = 0
            for i in range(n):
                e = (k >> (BITS * i)) & MASK
                if not e:
                    continue
                j = partner[i]
                if j == i and i not in real:
                    raise ValueError(f"variable {sp.names[i]!r} has no conjugate partner and is not declared real")
                nk |= e << (BITS * j)
            out[nk] = c.conjugate()
        return Series(sp, out, self.trunc, _trusted=True)

    def conj_coeffs(self) -> "Series":
        """Conjugate the coefficients only (variables untouched)."""
        return Series(self.space, {k: c.conjugate() for k, c in self.terms.items()}, self.trunc, _trusted=True)

    def is_real(self) -> bool:
        return self.conjugate() == self

    # -- change of space ---------------------------------------------------
    def to_space(self, target: VarSpace, rename: Optional[Mapping[str, str]] = None) -> "Series":
        """Re-express in ``target`` by name (optionally renamed).  Weights must agree."""
        rename = dict(rename or {})
        sp = self.space
        idx = []
        for i, n in enumerate(sp.names):
            tn = rename.get(n, n)
            idx.append(target.index(tn) if tn in target else None)
        out = {}
        for k, c in self.terms.items():
            nk = 0
            for i in range(sp.nvars):
                e = (k >> (BITS * i)) & MASK
                if not e:
                    continue
                j = idx[i]
                if j is None:
                    raise KeyError(f"variable {sp.names[i]!r} has no image in {target.names}")
                if target.weights[j] != sp.weights[i]:
                    raise ValueError("to_space requires equal weights; use substitute")
                nk += e << (BITS * j)
            out[nk] = out.get(nk, ZERO) + c
        return Series(target, out, self.trunc)

    def substitute(self, assignments: Mapping[str, "Series"], target: Optional[VarSpace] = None,
                   trunc: Optional[int] = None) -> "Series":
        return substitute(self, assignments, target, trunc)

    # -- evaluation --------------------------------------------------------
    def evaluate(self, point: Mapping[str, Coeff]) -> GaussianRational:
        """Exact evaluation of a polynomial at a Gaussian-rational point."""
        sp = self.space
        vals = [_coerce(point.get(n, 0)) for n in sp.names]
        total = ZERO
        for k, c in self.terms.items():
            t = c
            for i in range(sp.nvars):
                e = (k >> (BITS * i)) & MASK
                if e:
                    t = t * vals[i] ** e
            total = total + t
        return total

    # -- display / json ----------------------------------------------------
    def __repr__(self):
        if not self.terms:
            body = "0"
        else:
            parts = []
            for exps, c in self.items():
                mono = "*".join(f"{n}^{e}" if e > 1 else n for n, e in zip(self.space.names, exps) if e)
                if not mono:
                    parts.append(repr(c))
                elif c == ONE:
                    parts.append(mono)
                elif c == -ONE:
                    parts.append("-" + mono)
                else:
                    parts.append(f"{c!r}*{mono}")
            body = " + ".join(parts).replace("+ -", "- ")
        tail = "" if self.trunc is None else f" + O({self.trunc + 1})"
        return body + tail

    def to_json(self) -> dict:
        d = self.space.to_json()
        d["trunc"] = self.trunc
        d["terms"] = [{"exp": list(e), **c.to_json()} for e, c in self.items()]
        return d

    @classmethod
    def from_json(cls, obj: Mapping) -> "Series":
        names = tuple(obj["vars"])
        weights = tuple(obj.get("weights") or (1,) * len(names))
        pairs = tuple(tuple(p) for p in obj.get("pairs", ()))
        space = VarSpace(names, weights, pairs, tuple(obj.get("real", ())))
        trunc = obj.get("trunc")
        terms: Dict[int, GaussianRational] = {}
        for t in obj.get("terms", ()):
            c = GaussianRational(parse_rational(t.get("re", "0/1")), parse_rational(t.get("im", "0/1")))
            k = space.pack(t["exp"])
            terms[k] = terms.get(k, ZERO) + c
        return cls(space, terms, trunc)


# ---------------------------------------------------------------------------
# multiplication and composition


def mul(u: Series, v: Series, trunc: Optional[int] = "auto") -> Series:
    """Product; result trunc is min(u.trunc, v.trunc) unless given explicitly."""
    if u.space != v.space:
        raise SpaceMismatch(f"{u.space.names} vs {v.space.names}")
    t = min_trunc(u.trunc, v.trunc) if trunc == "auto" else trunc
    sp = u.space
    if not u.terms or not v.terms:
        return Series.zero(sp, t)
    if u.max_total_degree() + v.max_total_degree() > MAX_EXP:
        raise OverflowError("exponent overflow in product")
    if len(u.terms) > len(v.terms):
        u, v = v, u
    wd = sp.wdeg
    vs = sorted(((wd(k), k, c) for k, c in v.terms.items()), key=lambda x: x[0])
    out: Dict[int, GaussianRational] = {}
    get = out.get
    for ku, cu in u.terms.items():
        du = wd(ku)
        if t is not None and du > t:
            continue
        lim = None if t is None else t - du
        ure, uim = cu.re, cu.im
        for dv, kv, cv in vs:
            if lim is not None and dv > lim:
                break
            k = ku + kv
            if uim or cv.im:
                p = GaussianRational(ure * cv.re - uim * cv.im, ure * cv.im + uim * cv.re)
            else:
                p = GaussianRational(ure * cv.re, _ZERO_Q)
            o = get(k)
            out[k] = p if o is None else o + p
    return Series(sp, {k: c for k, c in out.items() if c}, t, _trusted=True)


def _substitution_trunc(u: Series, assignments: Mapping[str, Series], target: VarSpace,
                        images: List[Optional[Series]]) -> Optional[int]:
    """Reliable weighted degree of u(assignments) from valuations."""
    sp = u.space
    vals: List[Optional[Fraction]] = []
    bounds: List[Optional[int]] = []
    ratio = None
    for i, s in enumerate(images):
        v = s.valuation()
        vals.append(v)
        bounds.append(s.trunc)
        if v is not None:
            r = Fraction(v, sp.weights[i])
            ratio = r if ratio is None else min(ratio, r)
        elif s.trunc is not None:
            r = Fraction(s.trunc + 1, sp.weights[i])
            ratio = r if ratio is None else min(ratio, r)
    cands: List[int] = []
    if u.trunc is not None:
        if ratio is not None and ratio <= 0:
            raise TruncationError("substituting a unit into a truncated series invalidates truncation")
        if ratio is not None:
            num = ratio * (u.trunc + 1)
            cands.append(-(-num.numerator // num.denominator) - 1)
    if any(b is not None for b in bounds):
        for k in u.terms:
            exps = sp.unpack(k)
            base = 0
            for i, e in enumerate(exps):
                if e:
                    base += e * (vals[i] if vals[i] is not None else (bounds[i] + 1 if bounds[i] is not None else 0))
            for i, e in enumerate(exps):
                if e and bounds[i] is not None:
                    vi = vals[i] if vals[i] is not None else bounds[i] + 1
                    cands.append(bounds[i] + base - vi)
    return min(cands) if cands else None


def substitute(u: Series, assignments: Mapping[str, Series], target: Optional[VarSpace] = None,
               trunc: Optional[int] = None) -> Series:
    """Formal composition: replace variables of ``u`` by series in ``target``.

    Variables without an assignment map to the variable of the same name in
    the target space.  The result trunc follows from the valuations of the
    images; ``trunc`` can only lower it further.
    """
    sp = u.space
    if target is None:
        if assignments:
            target = next(iter(assignments.values())).space
        else:
            target = sp
    images: List[Optional[Series]] = []
    for i, n in enumerate(sp.names):
        if n in assignments:
            s = assignments[n]
            if s.space != target:
                raise SpaceMismatch(f"image of {n!r} lives in {s.space.names}, expected {target.names}")
            images.append(s)
        elif n in target:
            if target.weight_of(n) != sp.weights[i]:
                raise ValueError(f"identity image of {n!r} changes weight")
            images.append(Series.var(target, n))
        else:
            images.append(None)
    used = 0
    for k in u.terms:
        used |= k
    for i, s in enumerate(images):
        if s is None and (used >> (BITS * i)) & MASK:
            raise KeyError(f"variable {sp.names[i]!r} has no image in {target.names}")
    safe = [s if s is not None else Series.zero(target) for s in images]
    t = _substitution_trunc(u, assignments, target, safe)
    t = min_trunc(t, trunc)
    # powers and prefix products, sharing work along lexicographic order
    n = sp.nvars
    powers: List[Dict[int, Series]] = [dict() for _ in range(n)]
    one = Series.const(target, 1, t)

    def power(i: int, e: int) -> Series:
        cache = powers[i]
        if e in cache:
            return cache[e]
        if e == 1:
            r = safe[i].truncate(t, _force=True) if t is not None else safe[i]
            r = Series(target, r.terms, t, _trusted=True)
        else:
            half = power(i, e // 2)
            r = mul(half, half, t)
            if e % 2:
                r = mul(r, power(i, 1), t)
        cache[e] = r
        return r

    prefix: Dict[Tuple[int, ...], Series] = {(): one}
    acc: Dict[int, GaussianRational] = {}
    keys = sorted(u.terms, key=lambda k: sp.unpack(k))
    for k in keys:
        exps = sp.unpack(k)
        # find longest cached prefix
        cut = n
        while cut > 0 and exps[:cut] not in prefix:
            cut -= 1
        cur = prefix[exps[:cut]]
        for i in range(cut, n):
            if exps[i]:
                cur = mul(cur, power(i, exps[i]), t)
            prefix[exps[: i + 1]] = cur
        c = u.terms[k]
        for kk, cc in cur.terms.items():
            p = cc * c
            o = acc.get(kk)
            acc[kk] = p if o is None else o + p
    return Series(target, {k: c for k, c in acc.items() if c}, t, _trusted=True)._drop_above()


# ---------------------------------------------------------------------------
# inversion helpers


def invert_series(u: Series, var: str, trunc: Optional[int] = None) -> Series:
    """Compositional inverse in the distinguished variable ``var``.

    ``u = c*var + (higher order)``, where the coefficients may depend on the
    remaining variables (parameters) only through terms of degree >= 2.
    Returns ``v`` with ``u(var=v) = var`` mod the working truncation.
    """
    sp = u.space
    T = min_trunc(u.trunc, trunc)
    if T is None:
        raise TruncationError("invert_series needs a finite truncation")
    c = u.coeff({var: 1})
    if not c:
        raise ZeroDivisionError(f"zero linear coefficient in {var}")
    if u.constant_term():
        raise ValueError("series has a constant term")
    x = Series.var(sp, var, T)
    lin = Series.monomial(sp, {var: 1}, c, T)
    nonlin = (u.truncate(T) - lin)
    cinv = c.inverse()
    v = x * cinv
    # v = (x - N(v)) / c ; each sweep gains at least one order
    for _ in range(T + 2):
        nv = (x - substitute(nonlin, {var: v}, sp, T)) * cinv
        nv = nv.truncate(T, _force=True)
        if nv.terms == v.terms:
            break
        v = nv
    else:  # pragma: no cover - the iteration is contractive
        raise RuntimeError("inversion did not stabilize")
    return Series(sp, v.terms, T, _trusted=True)


def invert_map(components: Sequence[Series], names: Sequence[str], trunc: int) -> List[Series]:
    """Inverse of a map ``x -> (components)`` fixing the origin.

    The linear part must be invertible.  Works in the space of the
    components; ``names`` lists the coordinates in order.
    """
    sp = components[0].space
    n = len(names)
    L = [[components[i].coeff({names[j]: 1}) for j in range(n)] for i in range(n)]
    from .linalg import mat_inv  # local import keeps series free of matrix code at load time
    Linv = mat_inv(L)
    xs = [Series.var(sp, nm, trunc) for nm in names]
    lin = [reduce(lambda a, b: a + b, (xs[j] * L[i][j] for j in range(n) if L[i][j]), Series.zero(sp, trunc))
           for i in range(n)]
    nonlin = [(components[i].truncate(trunc, _force=True) - lin[i]) for i in range(n)]
    for s in components:
        if s.constant_term():
            raise ValueError("map does not fix the origin")
    v = [reduce(lambda a, b: a + b, (xs[j] * Linv[i][j] for j in range(n) if Linv[i][j]), Series.zero(sp, trunc))
         for i in range(n)]
    for _ in range(trunc + 2):
        sub = {names[i]: v[i] for i in range(n)}
        comp = [xs[i] - substitute(nonlin[i], sub, sp, trunc) for i in range(n)]
        nv = [reduce(lambda a, b: a + b, (comp[j] * Linv[i][j] for j in range(n) if Linv[i][j]),
                     Series.zero(sp, trunc)).truncate(trunc, _force=True) for i in range(n)]
        if all(a.terms == b.terms for a, b in zip(nv, v)):
            break
        v = nv
    else:  # pragma: no cover
        raise RuntimeError("map inversion did not stabilize")
    return [Series(sp, s.terms, trunc, _trusted=True) for s in v]


def sqrt_unit(u: Series, trunc: Optional[int] = None) -> Series:
    """Square root of a series with constant term exactly 1 (Newton iteration)."""
    T = min_trunc(u.trunc, trunc)
    if T is None:
        raise TruncationError("sqrt_unit needs a finite truncation")
    if u.constant_term() != ONE:
        raise ValueError("constant term must be 1")
    sp = u.space
    u = u.truncate(T)
    # s = 1 + h with 2h + h^2 = u - 1; fixed point h = (u - 1 - h^2)/2
    m = u - 1
    h = Series.zero(sp, T)
    for _ in range(T + 2):
        nh = ((m - h * h) * gr("1/2")).truncate(T, _force=True)
        if nh.terms == h.terms:
            break
        h = nh
    else:  # pragma: no cover
        raise RuntimeError("square root did not stabilize")
    return Series(sp, (h + 1).terms, T, _trusted=True)


def divide_exact(u: Series, factor: Series) -> Series:
    """Exact polynomial division ``u / factor``; raises if not divisible.

    Only a monomial factor is supported, which is what divisibility checks
    in the package need (for example dividing by ``w``).
    """
    if len(factor.terms) != 1:
        raise ValueError("only division by a monomial is supported")
    (fk, fc), = factor.terms.items()
    sp = u.space
    fe = sp.unpack(fk)
    finv = fc.inverse()
    out = {}
    for k, c in u.terms.items():
        e = sp.unpack(k)
        if any(a < b for a, b in zip(e, fe)):
            raise ArithmeticError(f"term {e} not divisible by {fe}")
        out[k - fk] = c * finv
    t = None if u.trunc is None else u.trunc - sp.wdeg(fk)
    return Series(sp, out, t, _trusted=True)


def series_sum(items: Iterable[Series], space: VarSpace, trunc: Optional[int] = None) -> Series:
    acc = Series.zero(space, trunc)
    for s in items:
        acc = acc + s
    return acc
