"""
Copyright (c) Meta Platforms, Inc. and affiliates.

This source code is licensed under the MIT license found in the
LICENSE file in the root directory of this source tree.
"""

from __future__ import absolute_import, division, print_function, unicode_literals

from json import dumps

import click


STATUS_COLORS = {
    "verified": "green",
    "found-witness": "green",
    "none-in-universe": "blue",
    "unknown-within-bounds": "yellow",
    "counterexample": "red",
}


def jsonify_violation(v):
    return {"law": v.law, "where": v.where, "detail": v.detail}


def jsonify_map(f):
    """
    @return {object: {source label: target element index}}
    """
    c = f.source.category
    return {
        c.objects[a]: {str(x): f.components[a][i] for i, x in enumerate(labels)}
        for a, labels in enumerate(f.source.elements)
    }


def jsonify_axiom(result, timings=False):
    jr = {
        "axiom": result.axiom,
        "status": result.status,
        "instances": result.instances,
    }
    if result.witness is not None:
        jr["witness"] = result.witness
    if result.counterexample is not None:
        jr["counterexample"] = result.counterexample
    if result.skipped:
        jr["skipped"] = list(result.skipped)
    if timings:
        jr["elapsed"] = result.elapsed
    return jr


def render_json(run):
    return dumps(run, sort_keys=True, indent=2)


def _status(passed):
    if passed:
        return click.style("passed", fg="green")
    return click.style("violations found", fg="red", bold=True)


def _echo_axioms(axioms):
    for jr in axioms:
        line = "  {} {}".format(
            click.style(jr["axiom"], bold=True),
            click.style(jr["status"], fg=STATUS_COLORS.get(jr["status"])),
        )
        line += ", {} instances".format(jr["instances"])
        if "elapsed" in jr:
            line += ", {:.3f}s".format(jr["elapsed"])
        click.echo(line)
        for key in ("witness", "counterexample"):
            if key in jr:
                click.echo("    {}: {}".format(key, dumps(jr[key], sort_keys=True)))
        if jr.get("skipped"):
            click.echo("    skipped: " + ", ".join(jr["skipped"]))


def print_human(run):
    for report in run["reports"]:
        header = click.style(report["command"], fg="yellow")
        if report.get("args"):
            header += " " + " ".join(report["args"])
        click.echo("{}: {}".format(header, _status(report["passed"])))
        if "over_cap" in report:
            click.echo("  " + click.style("over cap: ", fg="yellow") + report["over_cap"])
        if "error" in report:
            click.echo("  " + click.style("error: ", fg="red") + report["error"])
        for v in report.get("violations", ()):
            click.echo("  {} at {}: {}".format(click.style(v["law"], fg="red"), v["where"], v["detail"]))
        if "axioms" in report:
            _echo_axioms(report["axioms"])
        for key in ("count", "sizes", "holds_at", "oracle_agree", "is_sheaf", "closed", "dense"):
            if key in report:
                click.echo("  {}: {}".format(key, dumps(report[key], sort_keys=True)))
    click.echo("overall: " + _status(run["passed"]))
