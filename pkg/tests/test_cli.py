"""
Copyright (c) Meta Platforms, Inc. and affiliates.

This source code is licensed under the MIT license found in the
LICENSE file in the root directory of this source tree.
"""

from __future__ import absolute_import, division, print_function, unicode_literals

import io
import json

import pytest
from click.testing import CliRunner
from sitecrawler.cli import main
from sitecrawler.lib.constants import CHECKS_PASSED, INPUT_ERROR, VIOLATIONS_FOUND

from topos_lib import (
    ClosureContext,
    build_omega,
    double_negation_coverage,
    double_plus_oracle,
    presheaf_from_tables,
    sheafify,
)

from .sites import fixture_path, sierpinski


@pytest.fixture
def runner():
    return CliRunner()


def _run(runner, tmp_path, name, *args):
    out = str(tmp_path / "report.json")
    result = runner.invoke(main, [fixture_path(name), "--json", out] + list(args))
    report = None
    if result.exit_code != INPUT_ERROR:
        with io.open(out, encoding="utf-8") as f:
            report = json.load(f)
    return result, report


def _by_command(report):
    return {r["command"]: r for r in report["reports"]}


def test_sierpinski_site(runner, tmp_path):
    result, report = _run(runner, tmp_path, "sierpinski.site")
    assert result.exit_code == CHECKS_PASSED, result.output
    assert report["passed"] is True
    reports = _by_command(report)
    assert list(reports) == ["check-coverage", "is-sheaf", "sheafify", "closure"]
    assert reports["check-coverage"]["valid"] is True
    assert reports["is-sheaf"]["is_sheaf"] is True
    assert reports["sheafify"]["sizes"] == {"0": 1, "1": 1}
    assert reports["sheafify"]["oracle_agree"] is True
    assert reports["closure"]["dense"] is True
    assert reports["closure"]["closed"] is False


def test_command_overrides_run_statements(runner, tmp_path):
    result, report = _run(runner, tmp_path, "sierpinski.site", "is-sheaf", "X")
    assert result.exit_code == VIOLATIONS_FOUND
    (only,) = report["reports"]
    assert only["args"] == ["X"]
    assert only["failures"][0]["object"] == "1"


def test_constant_presheaf_under_all(runner, tmp_path):
    result, report = _run(runner, tmp_path, "constant2.site")
    assert result.exit_code == CHECKS_PASSED
    assert report["reports"][0]["sizes"] == {"0": 1, "1": 1}


def test_cap_overflow_is_reported(runner, tmp_path):
    result, report = _run(runner, tmp_path, "constant2.site", "--cap", "3")
    assert result.exit_code == CHECKS_PASSED
    assert "over_cap" in report["reports"][0]


def test_axiom_counterexample(runner, tmp_path):
    result, report = _run(runner, tmp_path, "axioms.site")
    assert result.exit_code == VIOLATIONS_FOUND
    axioms = {a["axiom"]: a for a in report["reports"][0]["axioms"]}
    assert axioms["A1"]["status"] == "counterexample"
    assert "elapsed" not in axioms["A1"]


def test_timings(runner, tmp_path):
    _, report = _run(runner, tmp_path, "constant2.site", "--timings")
    assert "elapsed" in report["reports"][0]


def test_syntax_error(runner):
    result = runner.invoke(main, [fixture_path("broken.site")])
    assert result.exit_code == INPUT_ERROR
    assert "broken.site:7:" in result.output


def test_unknown_command(runner):
    result = runner.invoke(main, [fixture_path("constant2.site"), "frobnicate"])
    assert result.exit_code == INPUT_ERROR
    assert "unknown command frobnicate" in result.output


def test_nothing_to_run(runner, tmp_path):
    path = tmp_path / "empty.site"
    path.write_text("poset {\n  0 <= 1;\n}\n")
    result = runner.invoke(main, [str(path)])
    assert result.exit_code == INPUT_ERROR


def test_stdout_json(runner):
    result = runner.invoke(main, [fixture_path("constant2.site")])
    assert result.exit_code == CHECKS_PASSED
    assert '"oracle_agree": true' in result.output


def test_human_output(runner):
    result = runner.invoke(main, [fixture_path("sierpinski.site"), "--human"])
    assert result.exit_code == CHECKS_PASSED
    assert "overall: passed" in result.output
    assert "sheafify X" in result.output


def _golden(name):
    with io.open(fixture_path(name), encoding="utf-8") as f:
        return json.load(f)


@pytest.mark.parametrize(
    "site_file, args, golden, exit_code",
    [
        ("sierpinski.site", [], "sierpinski.json", CHECKS_PASSED),
        ("constant2.site", [], "constant2.json", CHECKS_PASSED),
        ("sierpinski.site", ["enumerate-coverages"], "coverages.json", CHECKS_PASSED),
        ("formulas.site", [], "formulas.json", VIOLATIONS_FOUND),
    ],
)
def test_golden_reports(runner, tmp_path, site_file, args, golden, exit_code):
    result, report = _run(runner, tmp_path, site_file, *args)
    assert result.exit_code == exit_code, result.output
    assert report == _golden(golden)


def test_sheafify_reports_the_unit(runner, tmp_path):
    _, report = _run(runner, tmp_path, "sierpinski.site", "sheafify", "X")
    (only,) = report["reports"]
    assert only["unit"] == {"0": {"c": 0}, "1": {"a": 0, "b": 0}}


def test_golden_omega_matches_brute_force():
    c = sierpinski()
    counted = []
    for a in range(len(c.objects)):
        arrows = sorted(c.arrows_into[a])
        sieves = 0
        for mask in range(1 << len(arrows)):
            members = {phi for k, phi in enumerate(arrows) if mask >> k & 1}
            if all(c.table[phi][psi] in members for phi in members for psi in c.arrows_into[c.dom[phi]]):
                sieves += 1
        counted.append(sieves)
    assert list(build_omega(c).sizes) == counted == [2, 3]


def test_golden_dense_coverage_matches_library():
    c = sierpinski()
    listed = _golden("coverages.json")["reports"][0]["coverages"]
    assert double_negation_coverage(c).describe() in listed
    assert listed[1] == double_negation_coverage(c).describe()


@pytest.mark.parametrize("name", ["X", "Two"])
def test_golden_sheafify_sizes_match_plus_construction(name):
    c = sierpinski()
    ctx = ClosureContext(c, double_negation_coverage(c))
    x = presheaf_from_tables(
        c,
        {"1": ["a", "b"], "0": ["c"] if name == "X" else ["c", "d"]},
        {"0_1": {"a": "c", "b": "c" if name == "X" else "d"}},
    )
    assert sheafify(ctx, x).sheaf.sizes == double_plus_oracle(ctx, x).presheaf.sizes


DETERMINISM_RUNS = [
    ("sierpinski.site", []),
    ("constant2.site", []),
    ("formulas.site", []),
    ("axioms.site", []),
    ("sierpinski.site", ["enumerate-coverages"]),
    ("sierpinski.site", ["is-sheaf", "X"]),
    pytest.param("sierpinski.site", ["verify-sheaf-axioms"], marks=pytest.mark.slow),
]


@pytest.mark.parametrize("site_file, args", DETERMINISM_RUNS)
def test_reports_are_byte_stable(runner, site_file, args):
    first = runner.invoke(main, [fixture_path(site_file)] + args)
    second = runner.invoke(main, [fixture_path(site_file)] + args)
    assert first.exit_code == second.exit_code != INPUT_ERROR
    assert first.output == second.output


@pytest.mark.slow
def test_sheaf_axioms_statuses(runner, tmp_path):
    result, report = _run(runner, tmp_path, "sierpinski.site", "verify-sheaf-axioms")
    (only,) = report["reports"]
    statuses = {a["axiom"]: a["status"] for a in only["axioms"]}
    assert "counterexample" not in statuses.values()
    assert result.exit_code == CHECKS_PASSED


INVALID_COVERAGE = """\
poset {
  0 <= 1;
}
coverage {
  1: {0_1};
}
presheaf X {
  1: a;
  0: c;
  0_1: a -> c;
}
run check-coverage;
run is-sheaf X;
run sheafify X;
run enumerate-coverages;
"""


def test_invalid_coverage_is_reported_not_raised(runner, tmp_path):
    path = tmp_path / "invalid.site"
    path.write_text(INVALID_COVERAGE)
    out = str(tmp_path / "report.json")
    result = runner.invoke(main, [str(path), "--json", out])
    assert result.exception is None or isinstance(result.exception, SystemExit)
    assert result.exit_code == VIOLATIONS_FOUND
    with io.open(out, encoding="utf-8") as f:
        reports = json.load(f)["reports"]
    check, is_sheaf, sheafified, enumerated = reports
    assert check["valid"] is False
    assert check["violations"][0]["law"] == "L"
    for r in (is_sheaf, sheafified):
        assert r["passed"] is False
        assert r["error"].startswith("L fails at 1")
        assert "is_sheaf" not in r and "sizes" not in r
    assert enumerated["count"] == 4
