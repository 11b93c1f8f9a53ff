#!/usr/bin/env python3

"""
Copyright (c) Meta Platforms, Inc. and affiliates.

This source code is licensed under the MIT license found in the
LICENSE file in the root directory of this source tree.
"""

from __future__ import absolute_import, division, print_function, unicode_literals

import io
import logging
import sys
import time

import click
from site_dsl_lib import SiteSpecException, parse_site, render_sexpr, resolve_formula
from topos_lib import (
    ClosureContext,
    DEFAULT_STAGE_CAP,
    DEFAULT_UNIVERSE_SIZE,
    FOUND_WITNESS,
    InvalidCoverage,
    NotASheaf,
    PowerObjectTooLarge,
    TooManySubobjects,
    UniverseNotClosed,
    all_maps,
    ambient_regime,
    auto_universe,
    build_universe,
    check_axioms,
    check_lt_coverage,
    check_p1,
    check_s2_bounded,
    check_s2_sheaf,
    check_sheaf_small_maps,
    close,
    compare_with_oracle,
    enumerate_coverages,
    evaluate,
    is_dense_mono,
    is_sheaf,
    listed_maps,
    locally_small_maps,
    passed,
    require_lt_coverage,
    sheaf_failures,
    sheaf_universe,
    sheafify,
)

from sitecrawler.lib.constants import CHECKS_PASSED, INPUT_ERROR, VIOLATIONS_FOUND
from sitecrawler.lib.report import (
    jsonify_axiom,
    jsonify_map,
    jsonify_violation,
    print_human,
    render_json,
)

log = logging.getLogger(__name__)


def spec_universe(spec):
    """
    Universe named in the site file; presheaves alone mean all maps among them,
    and the endpoints of listed maps join the objects.
    """
    names = spec.universe
    objects = [spec.presheaves[n] for n in names if n in spec.presheaves]
    map_names = [n for n in names if n in spec.maps]
    maps = [spec.maps[n].map for n in map_names]
    for f in maps:
        for end in (f.source, f.target):
            if end not in objects:
                objects.append(end)
    if not maps:
        return build_universe(objects)
    return build_universe(objects, maps, map_names)


def spec_family(spec):
    if spec.family is None or spec.family == "all":
        return all_maps()
    return listed_maps("user", [spec.maps[n].map for n in spec.family])


def _axioms(results, timings):
    return {"axioms": [jsonify_axiom(r, timings) for r in results], "passed": passed(results)}


def run_check_coverage(spec, ctx, args, timings):
    report = check_lt_coverage(spec.coverage)
    return {
        "valid": report.valid,
        "violations": [jsonify_violation(v) for v in report.violations],
        "passed": report.valid,
    }


def run_enumerate_coverages(spec, ctx, args, timings):
    found = enumerate_coverages(spec.category)
    return {
        "count": len(found),
        "coverages": [cov.describe() for cov in found],
        "passed": True,
    }


def run_sheafify(spec, ctx, args, timings):
    result = sheafify(ctx, spec.presheaves[args[0]])
    agree = compare_with_oracle(ctx, result.source) is not None
    described = result.sheaf.describe()
    return {
        "sizes": described["sizes"],
        "carriers": described["carriers"],
        "unit": jsonify_map(result.unit),
        "oracle_agree": agree,
        "passed": agree,
    }


def run_is_sheaf(spec, ctx, args, timings):
    x = spec.presheaves[args[0]]
    c = spec.category
    failures = [
        {"object": c.objects[a], "sieve": p.names(c), "amalgamations": n}
        for a, p, _, n in sheaf_failures(ctx, x)
    ]
    return {"is_sheaf": is_sheaf(ctx, x), "failures": failures, "passed": not failures}


def run_closure(spec, ctx, args, timings):
    s = spec.subobjects[args[1]].subobject
    closed = close(ctx, s)
    return {
        "closure": closed.describe(),
        "closed": closed == s,
        "dense": is_dense_mono(ctx, s),
        "passed": True,
    }


def run_verify_axioms(spec, ctx, args, timings):
    c = spec.category
    if isinstance(spec.universe, tuple):
        u = spec_universe(spec)
    else:
        u = auto_universe(c, spec.universe or DEFAULT_UNIVERSE_SIZE)
    s = spec_family(spec)
    regime = ambient_regime(c, ctx.cap)
    results = check_axioms(u, s, regime)
    results.append(check_p1(u, s, regime))
    results.append(check_s2_bounded(u, s, regime))
    return _axioms(results, timings)


def run_verify_sheaf_axioms(spec, ctx, args, timings):
    c = spec.category
    if isinstance(spec.universe, tuple):
        sheaves = spec_universe(spec)
        ambient = None
    else:
        size = spec.universe or DEFAULT_UNIVERSE_SIZE
        sheaves = sheaf_universe(ctx, size)
        ambient = auto_universe(c, size)
    if spec.family is None or spec.family == "all":
        family = locally_small_maps(ctx)
    else:
        family = spec_family(spec)
    results = check_sheaf_small_maps(ctx, sheaves, ambient=ambient, family=family)
    s2 = check_s2_bounded(ambient or sheaves, all_maps(), ambient_regime(c, ctx.cap))
    results.append(s2)
    if s2.status == FOUND_WITNESS and ambient is not None:
        rep = ambient.maps[ambient.names.index(s2.witness["map"])]
        results.append(check_s2_sheaf(ctx, sheaves, rep, family))
    return _axioms(results, timings)


def run_eval(spec, ctx, args, timings):
    c = spec.category
    s = evaluate(resolve_formula(spec, args[0], ctx), (), c)
    holds_at = [c.objects[a] for a, sel in enumerate(s.selection) if sel]
    valid = len(holds_at) == len(c.objects)
    return {"holds_at": holds_at, "valid": valid, "passed": valid}


COMMAND_RUNNERS = {
    "check-coverage": run_check_coverage,
    "enumerate-coverages": run_enumerate_coverages,
    "sheafify": run_sheafify,
    "is-sheaf": run_is_sheaf,
    "closure": run_closure,
    "verify-axioms": run_verify_axioms,
    "verify-sheaf-axioms": run_verify_sheaf_axioms,
    "eval": run_eval,
}

# Commands that stay meaningful when the declared coverage is not a
# Lawvere-Tierney coverage.
COVERAGE_FREE = ("check-coverage", "enumerate-coverages", "verify-axioms")


def run_command(spec, ctx, command, timings=False):
    """
    @return report dict; cap overflows and failed preconditions are report
    entries, not exceptions
    """
    started = time.monotonic()
    report = {"command": command.name, "args": [render_sexpr(a) for a in command.args]}
    try:
        if command.name not in COVERAGE_FREE:
            require_lt_coverage(spec.coverage)
        report.update(COMMAND_RUNNERS[command.name](spec, ctx, command.args, timings))
    except (PowerObjectTooLarge, TooManySubobjects) as e:
        log.warning("%s exceeded a size cap: %s", command.name, e)
        report.update({"over_cap": str(e), "passed": True})
    except (InvalidCoverage, NotASheaf, UniverseNotClosed) as e:
        report.update({"error": str(e), "passed": False})
    if timings:
        report["elapsed"] = round(time.monotonic() - started, 6)
    return report


def run_site(spec, cap=DEFAULT_STAGE_CAP, commands=None, timings=False):
    ctx = ClosureContext(spec.category, spec.coverage, cap)
    reports = [run_command(spec, ctx, cmd, timings) for cmd in (commands or spec.commands)]
    return {"passed": all(r["passed"] for r in reports), "reports": reports}


@click.command()
@click.argument("site_file", type=click.Path(exists=True, dir_okay=False))
@click.argument("command", nargs=-1)
@click.option(
    "--cap",
    type=int,
    default=DEFAULT_STAGE_CAP,
    help="Largest power object stage to build, in relation points",
)
@click.option(
    "--json",
    "json_path",
    type=click.Path(dir_okay=False),
    default=None,
    help="Write the JSON report to this file",
)
@click.option("--human/--no-human", "-H", default=False, help="Coloured output for people")
@click.option(
    "--timings/--no-timings",
    default=False,
    help="Include elapsed seconds (makes the report unstable between runs)",
)
@click.option("--verbose/--no-verbose", "-v", default=False, help="Show debugging output on stderr")
def main(site_file, command, cap, json_path, human, timings, verbose):
    """
    Checks coverages, closure, sheafification and the small-map axioms on a
    finite site described in SITE_FILE.

    With COMMAND given, runs it instead of the run statements in the file,
    e.g. `sitecrawler sierpinski.site sheafify X`.
    """
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
    )
    with io.open(site_file, encoding="utf-8") as f:
        text = f.read()
    if command:
        text += "\nrun {};\n".format(" ".join(command))
    try:
        spec = parse_site(text)
    except SiteSpecException as e:
        click.echo("{}:{}:{}: {}".format(site_file, e.line, e.col, e.message), err=True)
        if e.expected:
            click.echo("  expected one of: " + ", ".join(e.expected), err=True)
        sys.exit(INPUT_ERROR)
    commands = spec.commands[-1:] if command else spec.commands
    if not commands:
        raise click.UsageError("no run statements in {} and no COMMAND given".format(site_file))

    run = run_site(spec, cap, commands, timings)
    if json_path:
        with io.open(json_path, "w", encoding="utf-8") as f:
            f.write(render_json(run) + "\n")
    if human:
        print_human(run)
    elif not json_path:
        click.echo(render_json(run))
    sys.exit(CHECKS_PASSED if run["passed"] else VIOLATIONS_FOUND)


if __name__ == "__main__":
    main()
