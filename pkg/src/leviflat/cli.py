"""Command line front end: JSON in, verified JSON report out.

Exit status: 0 verified, 1 verification failed, 2 malformed input,
3 hypothesis or truncation-budget violation.
"""
from __future__ import annotations

import json
import sys
from importlib import resources
from typing import Callable, Dict, Optional

import click
import jsonschema

from . import automorphism as aut
from . import fixtures as fx
from . import levi
from . import normal_form as nfm
from .c1 import HypothesisViolation, map_space, normalize_mixed_c1, polynomial_solver, verify_transformation
from .involution import tau_context
from .parse import parse_complex, parse_series
from .quadric import Degenerate, NotLeviFlat, QuadraticPair, check_witness, classify_quadric, levi_flat_quadric_test
from .series import Series, TruncationError, VarSpace, mpq

SCHEMA_VERSION = 1
EXIT_OK, EXIT_UNVERIFIED, EXIT_INPUT, EXIT_HYPOTHESIS = 0, 1, 2, 3


class InputError(ValueError):
    pass


def _schemas() -> dict:
    text = resources.files("leviflat").joinpath(f"schemas/v{SCHEMA_VERSION}/requests.json").read_text()
    return json.loads(text)


def report_schema() -> dict:
    text = resources.files("leviflat").joinpath(f"schemas/v{SCHEMA_VERSION}/report.json").read_text()
    return json.loads(text)


def validate(command: str, payload) -> None:
    s = _schemas()
    schema = {"$schema": s["$schema"], "$defs": s["$defs"], **s["commands"][command]}
    try:
        jsonschema.validate(payload, schema)
    except jsonschema.ValidationError as e:
        where = "/".join(str(p) for p in e.absolute_path) or "<root>"
        raise InputError(f"schema violation at {where}: {e.message}") from None


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=True) + "\n"


# ---------------------------------------------------------------------------
# payload decoding


def _series(obj, space: VarSpace, trunc: Optional[int] = None) -> Series:
    try:
        if isinstance(obj, str):
            return parse_series(obj, space, trunc)
        s = Series.from_json(obj)
        out = s.to_space(space)
        if trunc is not None:
            out = out.truncate(trunc) if out.trunc is None else out
        return out
    except (ValueError, KeyError, ZeroDivisionError, TypeError) as e:
        raise InputError(f"cannot read series: {e}") from None


def _complex(x):
    try:
        return parse_complex(x) if not isinstance(x, int) else parse_complex(str(x))
    except (ValueError, ZeroDivisionError, TypeError) as e:
        raise InputError(f"cannot read number {x!r}: {e}") from None


def _submanifold(payload) -> levi.GraphSubmanifold:
    n = payload["n"]
    return levi.GraphSubmanifold(n, _series(payload["rho"], VarSpace.complexified(n)))


def _pair(payload) -> QuadraticPair:
    if "A" in payload:
        n = payload["n"]
        A = [[_complex(x) for x in row] for row in payload["A"]]
        B = [[_complex(x) for x in row] for row in payload["B"]]
        if len(A) != n or len(B) != n or any(len(r) != n for r in A + B):
            raise InputError("A and B must be n x n")
        return QuadraticPair(n, A, B)
    M = _submanifold(payload)
    if not M.is_quadric():
        raise InputError("rho must be an exact homogeneous quadratic polynomial")
    return M.quadratic_pair()


# ---------------------------------------------------------------------------
# commands; each returns (verified, identity, result, violation)


def cmd_classify_quadric(payload, degree):
    p = _pair(payload)
    lf = levi_flat_quadric_test(p)
    if not lf.levi_flat:
        return False, "v* A v = 0 on the kernel of dbar rho", {"levi_flat": lf.to_json()}, lf.witness
    t, wit = classify_quadric(p)
    ok = check_witness(p, t, wit)
    res = {**t.to_json(), "witness": wit.to_json(), "pair": p.to_json()}
    return ok, "(T, lambda) maps the pair to the catalog representative", res, None


def cmd_check_leviflat(payload, degree):
    M = _submanifold(payload)
    if M.is_quadric():
        v = levi_flat_quadric_test(M.quadratic_pair())
        return v.levi_flat, "v* A v = 0 on the kernel of dbar rho", v.to_json(), v.witness
    d = degree if M.trunc is None else min(degree, M.trunc)
    v = levi.levi_flat_to_order(M, d)
    return v.levi_flat, f"Levi form vanishes on the complex tangent mod degree {d}", v.to_json(), v.obstruction


def _row_key(t) -> str:
    if t.kind == "B" and t.gamma2 == mpq(1, 4):
        return "B.1/2"
    return t.tag


def cmd_cr_singular(payload, degree):
    M = _submanifold(payload)
    loc = levi.cr_singular_locus(M)
    res = loc.to_json()
    if not M.is_quadric():
        return True, "CR-singular set is cut out by dbar rho = 0", res, None
    t, _ = classify_quadric(M.quadratic_pair())
    rows = levi.cr_singular_table(M.n)
    key = _row_key(t)
    res["type"] = t.to_json()
    if key not in rows:
        return True, "CR-singular set is cut out by dbar rho = 0", res, None
    chk = levi.check_cr_row(M, rows[key])
    res["table"] = {"row": key, "locus_matches": chk["locus_matches"],
                    "dimension_matches": chk["dimension_matches"],
                    "w_matches_table": chk["w_matches"], "w_computed": chk["computed_w"].to_json()}
    ok = chk["locus_matches"] and chk["dimension_matches"]
    return ok, "locus and real dimension agree with the catalog row", res, None


def cmd_segre(payload, degree):
    M = _submanifold(payload)
    out = levi.segre_at_origin(M)
    return out["matches_table"], "Segre variety at 0 agrees with the catalog row", out, None


def cmd_classify_at_point(payload, degree):
    M = _submanifold(payload)
    if len(payload["point"]) != M.n:
        raise InputError("point must have n coordinates")
    z0 = [_complex(x) for x in payload["point"]]
    out = levi.classify_at_point(M, z0)
    ok = check_witness(out["pair"], out["type"], out["witness"])
    res = {**out["type"].to_json(), "pair": out["pair"].to_json(), "witness": out["witness"].to_json(),
           "absorbed_holomorphic": out["absorbed_holomorphic"].to_json()}
    return ok, "(T, lambda) maps the recentered pair to the catalog representative", res, None


def cmd_normalize_c1(payload, degree):
    M = _submanifold(payload)
    if M.trunc is None:
        M = levi.GraphSubmanifold(M.n, M.rho.truncate(degree))
    t = normalize_mixed_c1(M, degree)
    v = verify_transformation(t, M, degree)
    return v.verified, v.identity, t.to_json(), v.violation


def cmd_polynomial_solve(payload, degree):
    ctx = tau_context()
    r = _series(payload["r"], ctx.space)
    f, g = polynomial_solver(r)
    chk = ctx.expand(g) - Series.var(ctx.space, "zb1") * ctx.expand(f) - r
    return chk.is_zero(), "g - zb1*f = r after w = zb1*z2 + zb1^2", {"f": f.to_json(), "g": g.to_json()}, None


def cmd_complete_automorphism(payload, degree):
    n = payload["n"]
    F1 = _series(payload["F1"], aut.F1_SPACE)
    rest = None
    if "F_rest" in payload:
        rest = [_series(s, map_space(n)) for s in payload["F_rest"]]
        if len(rest) != n - 2:
            raise InputError("F_rest must list F3, ..., Fn")
    if F1.trunc is None:
        F1 = F1.truncate(degree)
    a = aut.complete_automorphism(F1, n, degree, rest)
    v = aut.verify_automorphism(a, degree)
    return v.verified, v.identity, a.to_json(), v.violation


def cmd_normal_form(payload, degree):
    p = nfm.CRParametrization(*(_series(payload[k], nfm.X, degree) for k in ("a", "b", "r")))
    res = nfm.normal_form(p, degree)
    ok = res.verdict.verified and res.normalized
    return ok, res.verdict.identity, res.to_json(), res.verdict.violation


def cmd_foliation_basis(payload, degree):
    M = _submanifold(payload)
    basis = levi.foliation_basis(M, degree)
    ok = levi.verify_foliation_basis(M, basis, degree)
    res = {"basis": [[c.to_json() for c in v] for v in basis]}
    return ok, f"v* L v = 0 mod degree {degree} for each frame vector", res, None


COMMANDS: Dict[str, Callable] = {
    "classify-quadric": cmd_classify_quadric,
    "check-leviflat": cmd_check_leviflat,
    "cr-singular": cmd_cr_singular,
    "segre": cmd_segre,
    "classify-at-point": cmd_classify_at_point,
    "normalize-c1": cmd_normalize_c1,
    "polynomial-solve": cmd_polynomial_solve,
    "complete-automorphism": cmd_complete_automorphism,
    "normal-form": cmd_normal_form,
    "foliation-basis": cmd_foliation_basis,
}


def run(command: str, payload, degree: int = 8):
    """Validate, dispatch and build the report; returns (report, exit status)."""
    rep = {"command": command, "schema_version": SCHEMA_VERSION, "parameters": {"degree": degree}}
    try:
        validate(command, payload)
        ok, identity, result, violation = COMMANDS[command](payload, degree)
    except InputError as e:
        msg = str(e)
        kind = "schema" if msg.startswith("schema violation") else "input"
        return {**rep, "verified": False, "error": {"kind": kind, "message": msg}}, EXIT_INPUT
    except TruncationError as e:
        return {**rep, "verified": False, "error": {"kind": "budget", "message": str(e)}}, EXIT_HYPOTHESIS
    except (HypothesisViolation, NotLeviFlat, Degenerate, levi.NotCRSingular, nfm.QuadricCase) as e:
        return {**rep, "verified": False, "error": {"kind": "hypothesis", "message": f"{type(e).__name__}: {e}"}}, \
            EXIT_HYPOTHESIS
    except ValueError as e:
        return {**rep, "verified": False, "error": {"kind": "hypothesis", "message": str(e)}}, EXIT_HYPOTHESIS
    rep.update({"verified": bool(ok), "identity": identity, "result": result})
    if violation is not None:
        rep["violation"] = violation
    return rep, EXIT_OK if ok else EXIT_UNVERIFIED


# ---------------------------------------------------------------------------
# click wiring


def _read(path: str):
    text = sys.stdin.read() if path == "-" else open(path).read()
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise InputError(f"invalid JSON: {e}") from None


def _emit(rep: dict, output: Optional[str]) -> None:
    text = dumps(rep)
    if output and output != "-":
        with open(output, "w") as fh:
            fh.write(text)
    else:
        click.echo(text, nl=False)


@click.group()
def main():
    """Levi-flat CR-singular submanifolds: classification, normalization, verification."""


def _make(name: str, flag: str):
    @click.argument("input_path", default="-", metavar="INPUT")
    @click.option("--output", "-o", default=None, help="Write the report here instead of stdout.")
    @click.option(f"--{flag}", "degree", default=8, show_default=True, type=click.IntRange(2, 40),
                  help="Truncation bound for the computation and its verification.")
    def command(input_path, output, degree):
        try:
            payload = _read(input_path)
        except InputError as e:
            rep = {"command": name, "schema_version": SCHEMA_VERSION, "verified": False,
                   "error": {"kind": "input", "message": str(e)}}
            _emit(rep, output)
            sys.exit(EXIT_INPUT)
        rep, status = run(name, payload, degree)
        _emit(rep, output)
        sys.exit(status)

    command.__doc__ = f"Run {name} on a JSON payload (file or '-' for stdin)."
    return main.command(name)(command)


for _name in COMMANDS:
    _make(_name, "weight" if _name == "normal-form" else "degree")


@main.command("fixtures")
@click.option("--jobs", "-j", default=1, show_default=True, type=click.IntRange(1, 64))
@click.option("--name", "names", multiple=True, help="Run only these fixtures.")
@click.option("--list", "list_only", is_flag=True, help="Print the corpus instead of running it.")
@click.option("--output", "-o", default=None)
def fixtures_cmd(jobs, names, list_only, output):
    """Run the bundled regression corpus."""
    if list_only:
        _emit({"command": "fixtures", "schema_version": SCHEMA_VERSION, "verified": True,
               "result": {"fixtures": fx.fixtures()}}, output)
        return
    results = fx.run_all(jobs, list(names) or None)
    ok = all(r["passed"] for r in results)
    _emit({"command": "fixtures", "schema_version": SCHEMA_VERSION, "verified": ok,
           "identity": "every fixture reproduces its expected output",
           "result": {"fixtures": results}}, output)
    sys.exit(EXIT_OK if ok else EXIT_UNVERIFIED)


if __name__ == "__main__":  # pragma: no cover
    main()
