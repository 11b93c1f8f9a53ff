"""
Copyright (c) Meta Platforms, Inc. and affiliates.

This source code is licensed under the MIT license found in the
LICENSE file in the root directory of this source tree.
"""

from __future__ import absolute_import, division, print_function, unicode_literals

import io
import logging
from collections import namedtuple

from site_dsl_lib.formulas import resolve_formula
from site_dsl_lib.grammar import (
    Pairs,
    SiteSpecSemanticError,
    parse_statements,
    position,
)
from topos_lib.fincat import (
    MalformedCategory,
    MalformedPresheaf,
    NotNatural,
    NotRestrictionStable,
    build_category,
    monoid_category,
    nat_trans_from_tables,
    poset_category,
    presheaf_from_tables,
    subpresheaf_from_labels,
    validate_category,
)
from topos_lib.logic import IllSortedFormula
from topos_lib.powerobj import PowerObjectTooLarge
from topos_lib.site import (
    Coverage,
    SieveMismatch,
    all_sieves_coverage,
    double_negation_coverage,
    make_sieve,
    trivial_coverage,
)

log = logging.getLogger(__name__)

# command name -> number of arguments
COMMANDS = {
    "check-coverage": 0,
    "enumerate-coverages": 0,
    "sheafify": 1,
    "is-sheaf": 1,
    "closure": 2,
    "verify-axioms": 0,
    "verify-sheaf-axioms": 0,
    "eval": 1,
}

NAMED_COVERAGES = {
    "trivial": trivial_coverage,
    "dense": double_negation_coverage,
    "all": all_sieves_coverage,
}

SiteSpec = namedtuple(
    "SiteSpec",
    [
        "category",
        "coverage_mode",
        "coverage",
        "presheaves",
        "maps",
        "subobjects",
        "family",
        "universe",
        "commands",
    ],
)
NamedMap = namedtuple("NamedMap", ["source", "target", "map"])
NamedSubobject = namedtuple("NamedSubobject", ["parent", "subobject"])
Command = namedtuple("Command", ["name", "args"])


class SiteBuilder(object):
    """
    Walks parsed statements in source order and builds validated values.
    Every failure is raised as a SiteSpecSemanticError at the statement or
    entry that caused it.
    """

    def __init__(self, text):
        self.text = text
        self.category = None
        self.coverage_mode = None
        self.coverage = None
        self.presheaves = {}
        self.maps = {}
        self.subobjects = {}
        self.family = None
        self.universe = None
        self.commands = []
        self._pending = []

    def fail(self, loc, message, expected=()):
        line, column = position(self.text, loc)
        raise SiteSpecSemanticError(message, line, column, expected)

    def _need_category(self, stmt):
        if self.category is None:
            self.fail(stmt.loc, "declare a category, poset or monoid first")
        return self.category

    def _set_category(self, stmt, build):
        if self.category is not None:
            self.fail(stmt.loc, "the category is already declared")
        try:
            c = build()
        except MalformedCategory as e:
            self.fail(stmt.loc, str(e))
        try:
            violations = validate_category(c)
        except MalformedCategory as e:
            self.fail(stmt.loc, str(e))
        if violations:
            v = violations[0]
            self.fail(stmt.loc, "{} law fails at {}: {}".format(v.law, v.where, v.detail))
        self.category = c

    def _declare(self, stmt, name):
        if name in self.presheaves or name in self.maps or name in self.subobjects:
            self.fail(stmt.loc, "{} is already declared".format(name))

    def on_category(self, stmt):
        (items,) = stmt.body
        objects = []
        arrows = []
        composites = {}
        for item in items:
            if item.kind == "objects":
                objects.extend(item.body[0])
        known = set(objects)
        for item in items:
            if item.kind == "arrow":
                name, src, tgt = item.body
                for end in (src, tgt):
                    if end not in known:
                        self.fail(item.loc, "unknown object {}".format(end))
                arrows.append((name, src, tgt))
        ends = {name: (src, tgt) for name, src, tgt in arrows}
        for obj in objects:
            ends["id_{}".format(obj)] = (obj, obj)
        for item in items:
            if item.kind == "compose":
                g, f, h = item.body
                for name in (g, f, h):
                    if name not in ends:
                        self.fail(item.loc, "unknown arrow {}".format(name))
                if ends[f][1] != ends[g][0]:
                    self.fail(item.loc, "{} . {} is not a composable pair".format(g, f))
                if (g, f) in composites:
                    self.fail(item.loc, "{} . {} is given twice".format(g, f))
                composites[(g, f)] = h
        self._set_category(stmt, lambda: build_category(objects, arrows, composites))

    def on_poset(self, stmt):
        (chains,) = stmt.body
        elements = []
        relations = []
        for chain in chains:
            (names,) = chain.body
            for name in names:
                if name not in elements:
                    elements.append(name)
            relations.extend(zip(names, names[1:]))
        self._set_category(stmt, lambda: poset_category(elements, relations))

    def on_monoid(self, stmt):
        elements, products = stmt.body
        known = set(elements) | {"id_pt", "1"}
        table = {}
        for item in products:
            x, y, z = item.body
            for name in (x, y, z):
                if name not in known:
                    self.fail(item.loc, "unknown element {}".format(name))
            if x in ("id_pt", "1") or y in ("id_pt", "1"):
                continue
            table[(x, y)] = z
        self._set_category(stmt, lambda: monoid_category(elements, table))

    def on_coverage_named(self, stmt):
        c = self._need_category(stmt)
        (mode,) = stmt.body
        self.coverage_mode = mode
        self.coverage = NAMED_COVERAGES[mode](c)

    def on_coverage(self, stmt):
        c = self._need_category(stmt)
        (items,) = stmt.body
        covering = [[] for _ in c.objects]
        for item in items:
            obj, sieves = item.body
            if obj not in c.object_index:
                self.fail(item.loc, "unknown object {}".format(obj))
            for members in sieves:
                for name in members:
                    if name not in c.morphism_index:
                        self.fail(item.loc, "unknown arrow {}".format(name))
                try:
                    p = make_sieve(c, c.obj(obj), [c.mor(name) for name in members])
                except SieveMismatch as e:
                    self.fail(item.loc, "sieve is not closed under precomposition: {}".format(e))
                covering[c.obj(obj)].append(p)
        self.coverage = Coverage(c, tuple(frozenset(sieves) for sieves in covering))
        self.coverage_mode = None

    def on_presheaf(self, stmt):
        c = self._need_category(stmt)
        name, entries = stmt.body
        self._declare(stmt, name)
        carriers = {}
        actions = {}
        for entry in entries:
            key, value = entry.body
            if isinstance(value, Pairs):
                if key not in c.morphism_index:
                    self.fail(entry.loc, "{} is not an arrow".format(key))
                actions[key] = dict(value)
            elif key in c.object_index:
                carriers[key] = value
            elif key in c.morphism_index and not value:
                actions[key] = {}
            else:
                self.fail(entry.loc, "unknown object or arrow {}".format(key))
        try:
            self.presheaves[name] = presheaf_from_tables(c, carriers, actions)
        except (MalformedPresheaf, MalformedCategory) as e:
            self.fail(stmt.loc, "presheaf {}: {}".format(name, e))

    def _presheaf(self, stmt, name):
        if name not in self.presheaves:
            self.fail(stmt.loc, "unknown presheaf {}".format(name))
        return self.presheaves[name]

    def on_map(self, stmt):
        c = self._need_category(stmt)
        name, src, tgt, entries = stmt.body
        self._declare(stmt, name)
        source, target = self._presheaf(stmt, src), self._presheaf(stmt, tgt)
        tables = {}
        for entry in entries:
            key, value = entry.body
            if key not in c.object_index:
                self.fail(entry.loc, "unknown object {}".format(key))
            if value and not isinstance(value, Pairs):
                self.fail(entry.loc, "expected a -> b pairs", ("->",))
            tables[key] = dict(value)
        try:
            f = nat_trans_from_tables(source, target, tables)
        except NotNatural as e:
            self.fail(stmt.loc, "map {}: {}".format(name, e))
        self.maps[name] = NamedMap(src, tgt, f)

    def on_subobject(self, stmt):
        c = self._need_category(stmt)
        name, parent, entries = stmt.body
        self._declare(stmt, name)
        x = self._presheaf(stmt, parent)
        labels = {}
        for entry in entries:
            key, value = entry.body
            if key not in c.object_index or isinstance(value, Pairs):
                self.fail(entry.loc, "expected an object and its elements")
            labels[key] = value
        try:
            s = subpresheaf_from_labels(x, labels)
        except (MalformedPresheaf, NotRestrictionStable) as e:
            self.fail(stmt.loc, "subobject {}: {}".format(name, e))
        self.subobjects[name] = NamedSubobject(parent, s)

    def on_family_all(self, stmt):
        self.family = "all"

    def on_family(self, stmt):
        (names,) = stmt.body
        for name in names:
            if name not in self.maps:
                self.fail(stmt.loc, "unknown map {}".format(name))
        self.family = tuple(names)

    def on_universe_auto(self, stmt):
        (size,) = stmt.body
        self.universe = size

    def on_universe(self, stmt):
        (names,) = stmt.body
        for name in names:
            if name not in self.presheaves and name not in self.maps:
                self.fail(stmt.loc, "unknown presheaf or map {}".format(name))
        self.universe = tuple(names)

    def on_run(self, stmt):
        name, args = stmt.body
        if name not in COMMANDS:
            self.fail(stmt.loc, "unknown command {}".format(name), tuple(sorted(COMMANDS)))
        if len(args) != COMMANDS[name]:
            self.fail(stmt.loc, "{} takes {} arguments".format(name, COMMANDS[name]))
        self.commands.append(Command(name, tuple(args)))
        self._pending.append(stmt)

    def _check_command(self, spec, stmt):
        name, args = stmt.body
        if name in ("sheafify", "is-sheaf"):
            self._presheaf(stmt, args[0])
        elif name == "closure":
            self._presheaf(stmt, args[0])
            sub = self.subobjects.get(args[1])
            if sub is None or sub.parent != args[0]:
                self.fail(stmt.loc, "{} is not a subobject of {}".format(args[1], args[0]))
        elif name == "eval":
            try:
                resolve_formula(spec, args[0])
            except (IllSortedFormula, PowerObjectTooLarge) as e:
                self.fail(stmt.loc, "formula: {}".format(e))

    def build(self, statements):
        for stmt in statements:
            getattr(self, "on_" + stmt.kind.replace("-", "_"))(stmt)
        if self.category is None:
            raise SiteSpecSemanticError("no category declared", 1, 1)
        if self.coverage is None:
            self.coverage_mode = "trivial"
            self.coverage = trivial_coverage(self.category)
        spec = SiteSpec(
            self.category,
            self.coverage_mode,
            self.coverage,
            self.presheaves,
            self.maps,
            self.subobjects,
            self.family,
            self.universe,
            tuple(self.commands),
        )
        for stmt in self._pending:
            self._check_command(spec, stmt)
        log.debug(
            "site with %d objects, %d presheaves, %d commands",
            len(spec.category.objects),
            len(spec.presheaves),
            len(spec.commands),
        )
        return spec


def parse_site(text):
    """
    @return SiteSpec
    @raise SiteSpecSyntaxError or SiteSpecSemanticError
    """
    return SiteBuilder(text).build(parse_statements(text))


def load_site(path):
    with io.open(path, encoding="utf-8") as f:
        return parse_site(f.read())
