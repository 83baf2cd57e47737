"""Small exact matrix helpers over Q(i).  Matrices are lists of rows."""
from __future__ import annotations

from typing import List, Optional, Sequence, Tuple

from .series import ONE, ZERO, GaussianRational, _coerce

Matrix = List[List[GaussianRational]]


def as_matrix(rows: Sequence[Sequence]) -> Matrix:
    return [[_coerce(x) for x in row] for row in rows]


def zeros(n: int, m: Optional[int] = None) -> Matrix:
    return [[ZERO] * (n if m is None else m) for _ in range(n)]


def identity(n: int) -> Matrix:
    return [[ONE if i == j else ZERO for j in range(n)] for i in range(n)]


def unit(n: int, i: int, j: int, c=1) -> Matrix:
    m = zeros(n)
    m[i][j] = _coerce(c)
    return m


def mat_mul(a: Matrix, b: Matrix) -> Matrix:
    m = len(b[0]) if b else 0
    out = []
    for row in a:
        r = []
        for j in range(m):
            s = ZERO
            for k, x in enumerate(row):
                if x:
                    y = b[k][j]
                    if y:
                        s = s + x * y
            r.append(s)
        out.append(r)
    return out


def mat_add(a: Matrix, b: Matrix) -> Matrix:
    return [[x + y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def mat_scale(a: Matrix, c) -> Matrix:
    c = _coerce(c)
    return [[x * c for x in row] for row in a]


def transpose(a: Matrix) -> Matrix:
    return [list(col) for col in zip(*a)]


def conj(a: Matrix) -> Matrix:
    return [[x.conjugate() for x in row] for row in a]


def adjoint(a: Matrix) -> Matrix:
    return conj(transpose(a))


def is_zero(a: Matrix) -> bool:
    return all(not x for row in a for x in row)


def mat_eq(a: Matrix, b: Matrix) -> bool:
    return len(a) == len(b) and all(x == y for ra, rb in zip(a, b) for x, y in zip(ra, rb))


def row_reduce(a: Matrix) -> Tuple[Matrix, List[int]]:
    """Reduced row echelon form and pivot columns."""
    m = [list(r) for r in a]
    rows = len(m)
    cols = len(m[0]) if m else 0
    piv = []
    r = 0
    for c in range(cols):
        p = next((i for i in range(r, rows) if m[i][c]), None)
        if p is None:
            continue
        m[r], m[p] = m[p], m[r]
        inv = m[r][c].inverse()
        m[r] = [x * inv for x in m[r]]
        for i in range(rows):
            if i != r and m[i][c]:
                f = m[i][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[r])]
        piv.append(c)
        r += 1
        if r == rows:
            break
    return m, piv


def rank(a: Matrix) -> int:
    if not a or not a[0]:
        return 0
    return len(row_reduce(a)[1])


def mat_inv(a: Matrix) -> Matrix:
    n = len(a)
    aug = [list(a[i]) + identity(n)[i] for i in range(n)]
    red, piv = row_reduce(aug)
    if piv[:n] != list(range(n)):
        raise ZeroDivisionError("singular matrix")
    return [row[n:] for row in red]


def kernel(a: Matrix) -> List[List[GaussianRational]]:
    """Basis of the right kernel."""
    cols = len(a[0])
    red, piv = row_reduce(a)
    free = [c for c in range(cols) if c not in piv]
    basis = []
    for f in free:
        v = [ZERO] * cols
        v[f] = ONE
        for i, p in enumerate(piv):
            v[p] = -red[i][f]
        basis.append(v)
    return basis


def complete_basis(vectors: List[List[GaussianRational]], n: int) -> Matrix:
    """Columns: the given independent vectors followed by standard unit vectors."""
    cols = [list(v) for v in vectors]
    for j in range(n):
        e = [ONE if i == j else ZERO for i in range(n)]
        trial = cols + [e]
        if rank(transpose(trial)) == len(trial):
            cols = trial
        if len(cols) == n:
            break
    return transpose(cols)


def to_json(a: Matrix) -> list:
    return [[x.to_json() for x in row] for row in a]


def from_json(rows) -> Matrix:
    from .series import parse_rational
    out = []
    for row in rows:
        r = []
        for x in row:
            if isinstance(x, dict):
                r.append(GaussianRational(parse_rational(x.get("re", "0/1")), parse_rational(x.get("im", "0/1"))))
            elif isinstance(x, str):
                r.append(GaussianRational(parse_rational(x), 0))
            elif isinstance(x, int) and not isinstance(x, bool):
                r.append(GaussianRational(x, 0))
            else:
                raise ValueError(f"bad matrix entry {x!r}")
        out.append(r)
    return out
