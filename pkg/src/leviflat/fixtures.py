"""Bundled regression corpus: catalog quadrics, CR-singular and Segre rows,
pointwise reclassification examples and a conjugation round trip."""
from __future__ import annotations

import json
import random
from concurrent.futures import ThreadPoolExecutor
from importlib import resources
from typing import List, Optional

from .levi import (GraphSubmanifold, check_cr_row, classify_at_point, cr_singular_table, ranks_semicontinuous,
                   segre_at_origin)
from .parse import parse_complex, parse_series
from .quadric import catalog_pairs, classify_quadric, random_conjugate


def load() -> List[dict]:
    text = resources.files("leviflat").joinpath("data/fixtures.json").read_text()
    return json.loads(text)["fixtures"]


def fixtures() -> List[dict]:
    """The bundled corpus (inputs with expected outputs)."""
    return load()


def _type_json(t) -> dict:
    return t.to_json()


def _matches(expected: dict, got: dict) -> bool:
    return all(got.get(k) == v for k, v in expected.items() if k in ("type", "gamma_squared"))


def _run_quadric(fx: dict) -> dict:
    inp, exp = fx["input"], fx["expected"]
    M = GraphSubmanifold.from_expr(inp["rho"], inp["n"])
    t, _ = classify_quadric(M.quadratic_pair())
    got = _type_json(t)
    row = cr_singular_table(inp["n"])[exp["cr_row"]]
    cr = check_cr_row(M, row)
    seg = segre_at_origin(M)
    out = {"classification": got, "cr_locus_matches": cr["locus_matches"],
           "cr_dimension_matches": cr["dimension_matches"], "cr_w_matches_table": cr["w_matches"],
           "cr_w_computed": repr(cr["computed_w"]), "segre_matches_table": seg["matches_table"]}
    ok = _matches(exp, got) and cr["locus_matches"] and cr["dimension_matches"] and seg["matches_table"]
    if "derived_w" in exp:
        derived = parse_series(exp["derived_w"], M.space)
        out["cr_w_matches_derived"] = (cr["computed_w"] - derived).is_zero()
        ok = ok and out["cr_w_matches_derived"] and not cr["w_matches"]
    else:
        ok = ok and cr["w_matches"]
    out["passed"] = bool(ok)
    return out


def _run_pointwise(fx: dict) -> dict:
    inp = fx["input"]
    M = GraphSubmanifold.from_expr(inp["rho"], inp["n"])
    rows = []
    ok = True
    for e in fx["expected"]:
        point = [parse_complex(c) for c in e["point"]]
        got = _type_json(classify_at_point(M, point)["type"])
        good = _matches(e, got)
        ok = ok and good
        rows.append({"point": e["point"], "classification": got, "passed": good})
    points = [[parse_complex(c) for c in e["point"]] for e in fx["expected"]]
    semi = ranks_semicontinuous(M, points[0], points[1:])
    return {"points": rows, "ranks_semicontinuous": semi, "passed": ok and semi}


def _run_roundtrip(fx: dict) -> dict:
    inp = fx["input"]
    rng = random.Random(inp["seed"])
    report = {}
    ok = True
    for tag, p in catalog_pairs(inp["n"]).items():
        t0, _ = classify_quadric(p)
        stable = all(classify_quadric(random_conjugate(p, rng)[0])[0] == t0 for _ in range(inp["count"]))
        report[tag] = stable
        ok = ok and stable
    return {"types": report, "passed": ok == fx["expected"]["stable"]}


RUNNERS = {"quadric": _run_quadric, "pointwise": _run_pointwise, "roundtrip": _run_roundtrip}


def run_fixture(fx: dict) -> dict:
    out = RUNNERS[fx["kind"]](fx)
    return {"name": fx["name"], "kind": fx["kind"], **out}


def run_all(jobs: int = 1, names: Optional[List[str]] = None) -> List[dict]:
    """Run the corpus; results keep corpus order whatever the thread count."""
    fxs = [f for f in load() if names is None or f["name"] in names]
    if jobs <= 1:
        return [run_fixture(f) for f in fxs]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(run_fixture, fxs))
