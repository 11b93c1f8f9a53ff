"""
Copyright (c) Meta Platforms, Inc. and affiliates.

This source code is licensed under the MIT license found in the
LICENSE file in the root directory of this source tree.
"""

from __future__ import absolute_import, division, print_function, unicode_literals

from site_dsl_lib.formulas import render_sexpr

INDENT = "  "


def _names(items):
    return ", ".join(items)


def _pairs(pairs):
    return ", ".join("{} -> {}".format(a, b) for a, b in pairs)


def format_category(c):
    lines = ["category {", INDENT + "objects {};".format(_names(c.objects))]
    identities = set(c.identity)
    arrows = [phi for phi in range(len(c.morphisms)) if phi not in identities]
    for phi in arrows:
        lines.append(
            INDENT
            + "arrow {} : {} -> {};".format(
                c.morphisms[phi], c.objects[c.dom[phi]], c.objects[c.cod[phi]]
            )
        )
    for g in arrows:
        for f in arrows:
            h = c.table[g][f]
            if h is not None:
                lines.append(
                    INDENT + "compose {} . {} = {};".format(c.morphisms[g], c.morphisms[f], c.morphisms[h])
                )
    lines.append("}")
    return lines


def format_coverage(mode, cov):
    if mode is not None:
        return ["coverage {};".format(mode)]
    c = cov.category
    lines = ["coverage {"]
    for a, obj in enumerate(c.objects):
        sieves = cov.sieves(a)
        if sieves:
            rendered = ", ".join("{" + _names(p.names(c)) + "}" for p in sieves)
            lines.append(INDENT + "{}: {};".format(obj, rendered))
    lines.append("}")
    return lines


def format_presheaf(name, x):
    c = x.category
    lines = ["presheaf {} {{".format(name)]
    for a, obj in enumerate(c.objects):
        lines.append(INDENT + "{}: {};".format(obj, _names(x.elements[a])))
    for phi, mor in enumerate(c.morphisms):
        if phi in c.identity:
            continue
        src, tgt = c.cod[phi], c.dom[phi]
        if not x.elements[src]:
            continue
        table = [(label, x.elements[tgt][j]) for label, j in zip(x.elements[src], x.action[phi])]
        lines.append(INDENT + "{}: {};".format(mor, _pairs(table)))
    lines.append("}")
    return lines


def format_map(name, named):
    f = named.map
    c = f.source.category
    lines = ["map {} : {} -> {} {{".format(name, named.source, named.target)]
    for a, obj in enumerate(c.objects):
        if not f.source.elements[a]:
            continue
        table = [(label, f.target.elements[a][j]) for label, j in zip(f.source.elements[a], f.components[a])]
        lines.append(INDENT + "{}: {};".format(obj, _pairs(table)))
    lines.append("}")
    return lines


def format_subobject(name, named):
    s = named.subobject
    x = s.parent
    lines = ["subobject {} of {} {{".format(name, named.parent)]
    for a, obj in enumerate(x.category.objects):
        labels = [x.elements[a][i] for i in sorted(s.selection[a])]
        lines.append(INDENT + "{}: {};".format(obj, _names(labels)))
    lines.append("}")
    return lines


def format_site(spec):
    """
    Renders a SiteSpec back to .site text that parses to an equal SiteSpec.
    """
    lines = format_category(spec.category)
    lines.extend(format_coverage(spec.coverage_mode, spec.coverage))
    for name, x in spec.presheaves.items():
        lines.extend(format_presheaf(name, x))
    for name, named in spec.maps.items():
        lines.extend(format_map(name, named))
    for name, named in spec.subobjects.items():
        lines.extend(format_subobject(name, named))
    if spec.family == "all":
        lines.append("family all;")
    elif spec.family is not None:
        lines.append("family {{ {} }}".format(_names(spec.family)))
    if isinstance(spec.universe, int):
        lines.append("universe auto({});".format(spec.universe))
    elif spec.universe is not None:
        lines.append("universe {{ {} }}".format(_names(spec.universe)))
    for cmd in spec.commands:
        lines.append(" ".join(["run", cmd.name] + [render_sexpr(a) for a in cmd.args]) + ";")
    return "\n".join(lines) + "\n"
