import json

import jsonschema
import pytest
from click.testing import CliRunner

from leviflat.cli import EXIT_HYPOTHESIS, EXIT_INPUT, EXIT_OK, EXIT_UNVERIFIED, dumps, main, report_schema, run

CASES = [
    ("classify-quadric", {"n": 2, "rho": "z1*zb1 + 1/3*zb1^2"}, EXIT_OK),
    ("classify-quadric", {"n": 2, "A": [["1", "0"], ["0", "0"]], "B": [["0", "0"], ["0", "0"]]}, EXIT_OK),
    ("check-leviflat", {"n": 2, "rho": "zb1*z2 + zb1^2 + z1^2*zb1"}, EXIT_OK),
    ("check-leviflat", {"n": 2, "rho": "z1*zb1 + z2*zb2"}, EXIT_UNVERIFIED),
    ("cr-singular", {"n": 2, "rho": "zb1*z2 + zb1^2"}, EXIT_OK),
    ("segre", {"n": 3, "rho": "zb1^2 + zb2^2"}, EXIT_OK),
    ("classify-at-point", {"n": 3, "rho": "z1*zb1 + 1/3*zb1^2 + zb1*z2*z3", "point": [0, 0, "2-I"]}, EXIT_OK),
    ("classify-at-point", {"n": 2, "rho": "zb1*z2 + zb1^2", "point": [1, 0]}, EXIT_HYPOTHESIS),
    ("normalize-c1", {"n": 2, "rho": "zb1*z2 + zb1^2 + zb1^3 + z1*zb1^2"}, EXIT_OK),
    ("normalize-c1", {"n": 2, "rho": "zb1*z2 + zb1^2 + zb2^3"}, EXIT_HYPOTHESIS),
    ("polynomial-solve", {"r": "zb1^4"}, EXIT_OK),
    ("complete-automorphism", {"n": 2, "F1": "z1 + z1^2"}, EXIT_OK),
    ("normal-form", {"a": "(zb*xi + zb^2)*(zb + xi/2)", "b": "0", "r": "zb^3"}, EXIT_OK),
    ("foliation-basis", {"n": 3, "rho": "zb1*z2 + zb1^2 + z1*z3*zb3"}, EXIT_OK),
]


@pytest.mark.parametrize("command,payload,status", CASES)
def test_reports_match_schema_and_status(command, payload, status):
    rep, got = run(command, payload, 6)
    assert got == status, rep
    jsonschema.validate(rep, report_schema())
    assert rep["verified"] == (status == EXIT_OK)


@pytest.mark.parametrize("command,payload,status", CASES[:6])
def test_reports_are_byte_stable(command, payload, status):
    assert dumps(run(command, payload, 6)[0]) == dumps(run(command, payload, 6)[0])


@pytest.mark.parametrize("payload", [{"n": 2}, {"n": 2, "rho": "zb1^2", "extra": 1},
                                     {"n": 2, "rho": {"vars": ["x"], "terms": [{"exp": [1], "re": "1/0", "im": "0/1"}]}}])
def test_schema_violations_exit_two(payload):
    rep, status = run("check-leviflat", payload, 6)
    assert status == EXIT_INPUT
    assert rep["error"]["kind"] == "schema"
    jsonschema.validate(rep, report_schema())


def test_budget_error():
    rep, status = run("normalize-c1", {"n": 2, "rho": {"vars": ["z1", "z2", "zb1", "zb2"], "trunc": 4,
                                                      "terms": [{"exp": [0, 1, 1, 0], "re": "1/1", "im": "0/1"},
                                                                {"exp": [0, 0, 2, 0], "re": "1/1", "im": "0/1"}]}}, 8)
    assert status == EXIT_HYPOTHESIS and rep["error"]["kind"] == "budget"


def test_cli_roundtrip_through_click(tmp_path):
    inp = tmp_path / "in.json"
    out = tmp_path / "out.json"
    inp.write_text(json.dumps({"n": 2, "rho": "zb1*z2 + zb1^2"}))
    res = CliRunner().invoke(main, ["classify-quadric", str(inp), "--degree", "5", "-o", str(out)])
    assert res.exit_code == EXIT_OK
    rep = json.loads(out.read_text())
    assert rep["result"]["type"] == "C.1"
    assert out.read_text() == dumps(rep)


def test_cli_stdin_and_bad_json():
    r = CliRunner()
    res = r.invoke(main, ["polynomial-solve"], input=json.dumps({"r": "zb1^5"}))
    assert res.exit_code == EXIT_OK
    res = r.invoke(main, ["polynomial-solve"], input="{not json")
    assert res.exit_code == EXIT_INPUT
    assert json.loads(res.output)["error"]["kind"] == "input"


def test_normal_form_uses_weight_flag():
    res = CliRunner().invoke(main, ["normal-form", "--weight", "6"],
                             input=json.dumps({"a": "zb^2", "b": "0", "r": "0"}))
    assert res.exit_code == EXIT_OK
    assert json.loads(res.output)["parameters"]["degree"] == 6


def test_fixtures_command_is_deterministic_across_jobs():
    r = CliRunner()
    one = r.invoke(main, ["fixtures", "--jobs", "1"])
    four = r.invoke(main, ["fixtures", "--jobs", "4"])
    assert one.exit_code == four.exit_code == EXIT_OK
    assert one.output == four.output
