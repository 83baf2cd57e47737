import pytest

from leviflat.fixtures import fixtures, run_all, run_fixture

NAMES = [f["name"] for f in fixtures()]


@pytest.mark.parametrize("name", NAMES)
def test_fixture_passes(name):
    fx = next(f for f in fixtures() if f["name"] == name)
    assert run_fixture(fx)["passed"]


def test_gamma_one_half_row_records_the_computed_w():
    out = run_all(1, ["B.half"])[0]
    assert out["cr_w_matches_derived"] and not out["cr_w_matches_table"]


def test_order_is_preserved_with_threads():
    assert [r["name"] for r in run_all(3)] == NAMES
