"""Acceptance suite: ten criteria, one pass/fail line each.

Run with ``pytest tests/test_acceptance.py -v`` (the lines appear in the
terminal summary) or directly with ``python tests/test_acceptance.py``.
"""
import random
import sys
import time

import pytest
import sympy

from leviflat import fixtures as fxm
from leviflat import linalg as la
from leviflat.automorphism import (F1_SPACE, PAIR_SPACE, automorphisms_equal, complete_automorphism, compose,
                                   conj_F1, identity_automorphism, invert, verify_automorphism)
from leviflat.c1 import mixed_space, normalize_mixed_c1, polynomial_solver, verify_transformation
from leviflat.cli import dumps, run
from leviflat.involution import (lambda_coefficients, lambda_prime_coefficients, sigma_context,
                                 tau_context)
from leviflat.levi import GraphSubmanifold, check_cr_row, cr_singular_table, segre_at_origin
from leviflat.normal_form import INV, X, CRParametrization, is_normalized, normal_form
from leviflat.parse import parse_series, to_sympy
from leviflat.quadric import (QuadraticPair, catalog_pairs, check_witness, classify_quadric,
                              levi_flat_quadric_test, random_conjugate, SMALL_ENTRIES)
from leviflat.series import Series, VarSpace, gr, substitute

# pinned budgets and sizes
CATALOG_CONJUGATES = 200
CATALOG_SECONDS = 10.0
RANK2_PAIRS = 100
C1_CASES = 50
C1_DEGREE = 8
C1_SECONDS = 60.0
SOLVER_CASES = 20
AUT_CASES = 50
AUT_DEGREE = 10
AUT_GROUP_DEGREE = 8
SIGMA_ROUNDTRIPS = 500
SIGMA_TMINUS = 100
LAMBDA_MAX = 12
PIPELINE_WEIGHT = 9
PIPELINE_SECONDS = 300.0
SEED = 20240601

RESULTS = {}


def record(k: int, title: str, ok: bool, detail: str = ""):
    RESULTS[k] = (title, ok, detail)
    return ok


def coeffs(rng, n):
    return [rng.choice([x for x in SMALL_ENTRIES if x]) for _ in range(n)]


def random_series(rng, space, degrees, count, trunc=None):
    terms = {}
    names = space.names
    for _ in range(count):
        d = rng.choice(degrees)
        e = [0] * len(names)
        for _ in range(d):
            e[rng.randrange(len(names))] += 1
        terms[tuple(e)] = coeffs(rng, 1)[0]
    return Series.from_dict(space, terms, trunc)


# ---------------------------------------------------------------------------

def criterion_1():
    rng = random.Random(SEED)
    t0 = time.perf_counter()
    bad = []
    for n in (2, 3):
        for tag, p in catalog_pairs(n).items():
            t, wit = classify_quadric(p)
            if not check_witness(p, t, wit) or classify_quadric(p)[0] != t:
                bad.append((n, tag, "self"))
            if n == 3:
                continue
            for _ in range(CATALOG_CONJUGATES):
                q, _, _ = random_conjugate(p, rng)
                tq, wq = classify_quadric(q)
                if tq != t or not check_witness(q, tq, wq):
                    bad.append((n, tag, str(tq)))
    dt = time.perf_counter() - t0
    ok = not bad and dt < CATALOG_SECONDS
    return ok, f"{6 * CATALOG_CONJUGATES} conjugates, {len(bad)} mismatches, {dt:.2f}s (limit {CATALOG_SECONDS}s)"


def criterion_2():
    rng = random.Random(SEED + 2)
    fails = 0
    done = 0
    while done < RANK2_PAIRS:
        A = [coeffs(rng, 2) if rng.random() < 0.8 else [gr(0), gr(1)] for _ in range(2)]
        if la.rank(A) != 2:
            continue
        b = coeffs(rng, 3)
        B = [[b[0], b[1]], [b[1], b[2]]] if rng.random() < 0.7 else la.zeros(2)
        v = levi_flat_quadric_test(QuadraticPair(2, A, B))
        if v.levi_flat or not gr(v.witness["coefficient"]["re"], v.witness["coefficient"]["im"]):
            fails += 1
        done += 1
    return fails == 0, f"{RANK2_PAIRS} rank-2 pairs, {fails} without a nonzero witness"


def criterion_3():
    notes = []
    ok = True
    for n in (2, 3):
        table = cr_singular_table(n)
        for tag, p in catalog_pairs(n).items():
            M = GraphSubmanifold.from_pair(p)
            row = check_cr_row(M, table[tag])
            seg = segre_at_origin(M)
            good = row["locus_matches"] and row["dimension_matches"] and row["w_matches"] and seg["matches_table"]
            if seg["table"]["contained"]:
                good = good and seg["contained"]
            ok = ok and good
            if not good:
                notes.append(f"{tag}(n={n})")
    # the gamma = 1/2 row: locus and dimension as in the table, w computed as -z1^2/2
    M = GraphSubmanifold.from_expr("z1*zb1 + 1/2*zb1^2", 2)
    half = check_cr_row(M, cr_singular_table(2)["B.1/2"])
    half_ok = (half["locus_matches"] and half["dimension_matches"]
               and half["computed_w"] == parse_series("-1/2*z1^2", M.space))
    ok = ok and half_ok
    return ok, ("all rows match" if not notes else "mismatch: " + ", ".join(notes)) + \
        f"; B.1/2 locus ok, w computed as -z1^2/2 (table lists 0): {half_ok}"


def criterion_4():
    rng = random.Random(SEED + 4)
    t0 = time.perf_counter()
    failures = 0
    for case in range(C1_CASES):
        n = 2 if case % 2 == 0 else 3
        r = random_series(rng, mixed_space(n), [3, 4, 5, 6], rng.randint(1, 4))
        M = GraphSubmanifold(n, parse_series("zb1*z2 + zb1^2", VarSpace.complexified(n)) + r.to_space(VarSpace.complexified(n)))
        t = normalize_mixed_c1(M, C1_DEGREE)
        if not verify_transformation(t, M, C1_DEGREE).verified:
            failures += 1
    dt = time.perf_counter() - t0
    return failures == 0 and dt < C1_SECONDS, \
        f"{C1_CASES} cases, {failures} failures, {dt:.2f}s (limit {C1_SECONDS}s)"


def criterion_5():
    zb = VarSpace(("zb1",))
    z2, w, zb1 = sympy.symbols("z2 w zb1")
    Q = zb1 * z2 + zb1 ** 2

    def exact(r):
        f, g = polynomial_solver(r)
        return sympy.expand(to_sympy(g).subs(w, Q) - zb1 * to_sympy(f).subs(w, Q) - to_sympy(r)) == 0, f, g

    good, f, g = exact(parse_series("zb1^4", zb))
    ok = good and f == parse_series("2*w*z2 + z2^3", f.space) and g == parse_series("w^2 + w*z2^2", g.space)
    rng = random.Random(SEED + 5)
    bad = 0
    for _ in range(SOLVER_CASES):
        r = random_series(rng, zb, [4, 5, 6, 7, 8], rng.randint(1, 5))
        if not exact(r)[0]:
            bad += 1
    return ok and not bad, f"zb1^4 -> f = {f}, g = {g}; {SOLVER_CASES} random: {bad} failures"


def solve_completion(F1, D):
    """F2 (weight <= D-1) and G (weight <= D) from the primary identity alone, by exact linear algebra."""
    ctx = tau_context()
    xs = ctx.space
    a = conj_F1(F1, xs)
    zb1, z2 = Series.var(xs, "zb1"), Series.var(xs, "z2")
    Q = zb1 * z2 + zb1 * zb1
    monos = [(i, k) for k in range(D // 2 + 1) for i in range(D + 1) if 1 <= i + 2 * k]
    f_monos = [m for m in monos if m[0] + 2 * m[1] <= D - 1]
    g_monos = [m for m in monos if m[0] + 2 * m[1] <= D]
    cols = []
    for (i, k) in f_monos:
        cols.append((-(a * z2 ** i * Q ** k)).truncate(D, _force=True))
    for (i, k) in g_monos:
        cols.append((z2 ** i * Q ** k).truncate(D, _force=True))
    rhs = (a * a).truncate(D, _force=True)
    keys = sorted({k for c in cols + [rhs] for k in c.terms})
    rows = [[c.terms.get(key, gr(0)) for c in cols] + [rhs.terms.get(key, gr(0))] for key in keys]
    red, piv = la.row_reduce(rows)
    m = len(cols)
    if m in piv or len(piv) != m:
        return None
    sol = [red[piv.index(j)][m] for j in range(m)]
    F2 = Series.from_dict(PAIR_SPACE, {mo: c for mo, c in zip(f_monos, sol[:len(f_monos)])}, D - 1)
    G = Series.from_dict(PAIR_SPACE, {mo: c for mo, c in zip(g_monos, sol[len(f_monos):])}, D)
    return F2, G


def criterion_6():
    rng = random.Random(SEED + 6)
    D = AUT_DEGREE
    bad = []
    auts = []
    for k in range(AUT_CASES):
        h = random_series(rng, F1_SPACE, list(range(2, D + 1)), rng.randint(1, 4))
        F1 = (Series.var(F1_SPACE, "z1") * coeffs(rng, 1)[0] + h).truncate(D)
        A = complete_automorphism(F1, 2 + k % 2, D)
        if not verify_automorphism(A, D).verified:
            bad.append(f"verify#{k}")
        if k < 10:
            indep = solve_completion(F1, D)
            if indep is None or not (indep[0] - A.F2.truncate(D - 1)).truncate(D - 1).is_zero() \
                    or not (indep[1] - A.G).truncate(D, _force=True).is_zero():
                bad.append(f"unique#{k}")
        auts.append(A)
    Dg = AUT_GROUP_DEGREE
    for k in range(0, 20, 2):
        a = complete_automorphism(auts[k].F1.truncate(Dg, _force=True), 2, Dg)
        b = complete_automorphism(auts[k + 2].F1.truncate(Dg, _force=True), 2, Dg)
        try:
            compose(a, b, Dg)
            if not automorphisms_equal(compose(a, invert(a, Dg), Dg), identity_automorphism(2, Dg), Dg):
                bad.append(f"inverse#{k}")
        except ArithmeticError:
            bad.append(f"group#{k}")
    flipped = complete_automorphism(Series.var(F1_SPACE, "z1", D), 2, D, sign=+1)
    sign_regression = not verify_automorphism(flipped, D).verified
    ok = not bad and sign_regression
    return ok, (f"{AUT_CASES} completions mod {D}, 10 uniqueness solves, 10 closure/inverse checks mod {Dg}; "
                f"problems: {bad or 'none'}; opposite F2 sign rejected: {sign_regression}")


def criterion_7():
    rng = random.Random(SEED + 7)
    ctx = sigma_context()
    sp = ctx.space
    bad = 0
    for _ in range(SIGMA_ROUNDTRIPS):
        u = random_series(rng, sp, list(range(0, 7)), rng.randint(1, 6))
        if ctx.recompose(ctx.decompose(u)) != u:
            bad += 1
    plain = VarSpace(("z", "zb"))
    xi = Series.var(sp, "xi")
    tbad = 0
    for _ in range(SIGMA_TMINUS):
        u = random_series(rng, plain, list(range(0, 7)), rng.randint(1, 6)).to_space(sp)
        m0 = substitute(ctx.decompose(u).minus, {"w": Series.zero(ctx.inv_space)}, ctx.inv_space).to_space(sp)
        diff = substitute(u, {"zb": -xi}, sp) - substitute(u, {"zb": Series.zero(sp)}, sp)
        if diff != -xi * m0:
            tbad += 1
    lam_ok = all(lambda_coefficients(N)[0] == gr((-1) ** N) and lambda_prime_coefficients(N + 1)[0] == gr((-1) ** N)
                 for N in range(1, LAMBDA_MAX + 1))
    return not bad and not tbad and lam_ok, \
        f"{SIGMA_ROUNDTRIPS} round trips ({bad} bad), {SIGMA_TMINUS} w = 0 checks ({tbad} bad), lambda ok: {lam_ok}"


SEED_A = {"zb^2": "zb^2", "w*eta": "(zb*xi + zb^2)*(zb + xi/2)",
          "w*eta + xi*w*eta": "(1 + xi)*(zb*xi + zb^2)*(zb + xi/2)", "z*w*eta": "z*(zb*xi + zb^2)*(zb + xi/2)"}
SEED_R = {"0": "0", "zb^3": "zb^3"}


def pipeline_case(a, r, D=PIPELINE_WEIGHT):
    p = CRParametrization(parse_series(a, X), Series.zero(X), parse_series(r, X))
    res = normal_form(p, D)
    phat = CRParametrization.from_normal_form(res.a_minus, D)
    ctx = sigma_context()
    dec = ctx.decompose(phat.a.with_trunc(None))
    iw = INV.index("w")
    checks = {
        "a_plus_zero": dec.plus.is_zero(),
        "w_divides": all(e[iw] >= 1 for e, _ in res.a_minus.items()),
        "r_zero": phat.r.is_zero() and phat.b.is_zero(),
        "slots_zero": res.invariants is None or is_normalized(res.a_minus, res.invariants, D),
        "identity": res.verdict.verified,
    }
    return checks, res


def criterion_8():
    t0 = time.perf_counter()
    bad = []
    for an, a in SEED_A.items():
        for rn, r in SEED_R.items():
            checks, _ = pipeline_case(a, r)
            if not all(checks.values()):
                bad.append(f"a={an}, r={rn}: {[k for k, v in checks.items() if not v]}")
    dt = time.perf_counter() - t0
    return not bad and dt < PIPELINE_SECONDS, \
        f"{len(SEED_A) * len(SEED_R)} seeds at weight {PIPELINE_WEIGHT}, {dt:.2f}s; problems: {bad or 'none'}"


def criterion_9():
    names = [f["name"] for f in fxm.fixtures() if f["kind"] == "pointwise"]
    res = fxm.run_all(1, names)
    bad = [r["name"] for r in res if not r["passed"]]
    return not bad and len(res) == 4, f"{len(res)} pointwise fixtures, failing: {bad or 'none'}"


def criterion_10():
    payloads = [("classify-quadric", {"n": 2, "rho": "z1*zb1 + 1/3*zb1^2"}),
                ("normalize-c1", {"n": 3, "rho": "zb1*z2 + zb1^2 + z1*zb1*z3 + zb1^3"}),
                ("complete-automorphism", {"n": 2, "F1": "z1 + I*z1^2"}),
                ("normal-form", {"a": "z*(zb*xi + zb^2)*(zb + xi/2)", "b": "z^2", "r": "zb^3"})]
    same_runs = all(dumps(run(c, p, 7)[0]) == dumps(run(c, p, 7)[0]) for c, p in payloads)
    serial = dumps({"fixtures": fxm.run_all(1)})
    threaded = [dumps({"fixtures": fxm.run_all(j)}) for j in (2, 4, 8)]
    same_jobs = all(t == serial for t in threaded)
    return same_runs and same_jobs, f"repeat runs identical: {same_runs}; jobs 1/2/4/8 identical: {same_jobs}"


CRITERIA = {
    1: ("quadric catalog exactness", criterion_1),
    2: ("rank-2 exclusion", criterion_2),
    3: ("CR-singular and Segre tables", criterion_3),
    4: ("C.1 normalization end to end", criterion_4),
    5: ("polynomial solver exactness", criterion_5),
    6: ("automorphism suite", criterion_6),
    7: ("involution calculus", criterion_7),
    8: ("normal-form pipeline", criterion_8),
    9: ("pointwise instability fixtures", criterion_9),
    10: ("determinism", criterion_10),
}


@pytest.mark.parametrize("k", sorted(CRITERIA))
def test_criterion(k):
    title, fn = CRITERIA[k]
    ok, detail = fn()
    record(k, title, ok, detail)
    assert ok, detail


def main() -> int:
    status = 0
    for k in sorted(CRITERIA):
        title, fn = CRITERIA[k]
        ok, detail = fn()
        print(f"criterion {k:2d} {'PASS' if ok else 'FAIL'}  {title}: {detail}", flush=True)
        status |= not ok
    return status


if __name__ == "__main__":
    sys.exit(main())
