import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from leviflat import linalg as la
from leviflat.quadric import (Degenerate, NotLeviFlat, QuadraticPair, QuadricType, catalog_pairs,
                              check_witness, classify_quadric, gaussian_sqrt, levi_flat_quadric_test,
                              random_conjugate, random_invertible, representative, transform_pair)
from leviflat.series import Series, gr, mpq, substitute
from strategies import gaussians, nonzero_gaussians

EXPECTED = {"A.1": "A.1", "A.2": "A.2", "B.0": "B.0", "B.gamma": "B.gamma", "C.0": "C.0", "C.1": "C.1"}


@given(gaussians)
def test_gaussian_sqrt_of_square(a):
    r = gaussian_sqrt(a * a)
    assert r is not None and r * r == a * a


def test_gaussian_sqrt_missing():
    assert gaussian_sqrt(gr(2)) is None
    assert gaussian_sqrt(gr(0, 2)) == gr(1, 1)


@given(st.integers(0, 10 ** 6))
@settings(max_examples=25, deadline=None)
def test_transform_law_matches_substitution(seed):
    rng = random.Random(seed)
    p = catalog_pairs(2)[rng.choice(sorted(catalog_pairs(2)))]
    q, T, lam = random_conjugate(p, rng)
    sp = p.space()
    sub = {}
    for j in range(2):
        zj = Series.zero(sp)
        for k in range(2):
            zj = zj + Series.var(sp, f"z{k + 1}") * T[j][k]
        sub[f"z{j + 1}"] = zj
        sub[f"zb{j + 1}"] = zj.conjugate()
    assert substitute(p.rho(), sub, sp) * lam == q.rho()


@pytest.mark.parametrize("name,pair", sorted(catalog_pairs(2).items()))
def test_catalog_classifies_to_itself(name, pair):
    t, wit = classify_quadric(pair)
    assert t.tag == EXPECTED[name]
    assert check_witness(pair, t, wit)


@given(st.integers(0, 10 ** 6), st.sampled_from(sorted(EXPECTED)))
@settings(max_examples=60, deadline=None)
def test_conjugates_keep_their_type(seed, name):
    rng = random.Random(seed)
    p = catalog_pairs(2)[name]
    q, _, _ = random_conjugate(p, rng)
    t, wit = classify_quadric(q)
    assert t.tag == EXPECTED[name]
    assert check_witness(q, t, wit)
    if t.kind == "B":
        assert t.gamma2 == classify_quadric(p)[0].gamma2


@given(nonzero_gaussians)
def test_gamma_squared_is_the_modulus(g):
    p = QuadraticPair(2, [[1, 0], [0, 0]], [[g, 0], [0, 0]])
    t, wit = classify_quadric(p)
    assert t.kind == "B" and t.gamma2 == g.norm2()
    assert check_witness(p, t, wit)


def test_irrational_gamma_uses_squared_witness():
    p = QuadraticPair(2, [[1, 0], [0, 0]], [[gr(1, 1), 0], [0, 0]])
    t, wit = classify_quadric(p)
    assert t.gamma2 == mpq(2)
    assert wit.field_note != "Q(i)"
    assert check_witness(p, t, wit)


def test_rank_two_hermitian_part_fails_with_witness():
    p = QuadraticPair(2, la.identity(2), la.zeros(2))
    v = levi_flat_quadric_test(p)
    assert not v.levi_flat
    assert v.witness["coefficient"] != {"re": "0/1", "im": "0/1"}
    with pytest.raises(NotLeviFlat):
        classify_quadric(p)


def test_zero_pair_is_degenerate():
    with pytest.raises(Degenerate):
        classify_quadric(QuadraticPair(2, la.zeros(2), la.zeros(2)))


def test_singular_transform_rejected():
    with pytest.raises(ValueError):
        transform_pair(catalog_pairs(2)["C.1"], [[1, 1], [1, 1]], 1)


def test_representatives_in_dimension_three():
    for k in (1, 2, 3):
        t, _ = classify_quadric(representative(QuadricType("A", k), 3))
        assert t.tag == f"A.{k}"


def test_json_roundtrip():
    p = catalog_pairs(3)["C.1"]
    assert QuadraticPair.from_json(p.to_json()) == p


def test_random_invertible_is_invertible():
    rng = random.Random(1)
    for _ in range(10):
        assert la.rank(random_invertible(3, rng)) == 3
