"""
Copyright (c) Meta Platforms, Inc. and affiliates.

This source code is licensed under the MIT license found in the
LICENSE file in the root directory of this source tree.
"""

from __future__ import absolute_import, division, print_function, unicode_literals

from topos_lib.closure import ClosureContext
from topos_lib.logic import (
    Atom,
    Bottom,
    Equal,
    Exists,
    Forall,
    IllSortedFormula,
    Not,
    Top,
    Var,
    conjunction,
    disjunction,
    exists_in,
    forall_in,
    graph,
    iff,
    member,
    Implies,
)
from topos_lib.powerobj import pj_object, power_object
from topos_lib.site import build_omega


def render_sexpr(tree):
    if isinstance(tree, tuple):
        return "(" + " ".join(render_sexpr(t) for t in tree) + ")"
    return tree


class FormulaResolver(object):
    """
    Turns s-expression trees into formulas over the presheaves, maps and
    subobjects of a site spec. Power object sorts remember their membership
    relation so that "in" atoms can find it.
    """

    def __init__(self, spec, ctx=None):
        self.spec = spec
        self.ctx = ctx or ClosureContext(spec.category, spec.coverage)
        self._powers = {}

    def sort(self, tree):
        spec = self.spec
        if isinstance(tree, str):
            if tree == "Omega":
                return build_omega(spec.category)
            if tree in spec.presheaves:
                return spec.presheaves[tree]
            raise IllSortedFormula("unknown sort {}".format(tree))
        if len(tree) == 2 and tree[0] in ("P", "PJ"):
            base = self.sort(tree[1])
            if tree[0] == "P":
                power = power_object(base, self.ctx.cap)
            else:
                power = pj_object(self.ctx, base)
            self._powers[power.presheaf] = (base, power.membership)
            return power.presheaf
        raise IllSortedFormula("not a sort: {}".format(render_sexpr(tree)))

    def _var(self, name, env):
        if not isinstance(name, str) or name not in env:
            raise IllSortedFormula("unbound variable {}".format(render_sexpr(name)))
        return env[name]

    def _membership(self, v):
        if v.sort not in self._powers:
            raise IllSortedFormula("{} is not a power object variable".format(v.name))
        return self._powers[v.sort]

    def _arity(self, head, args, n):
        if len(args) != n:
            raise IllSortedFormula("{} takes {} arguments, got {}".format(head, n, len(args)))

    def _bind(self, name, sort, env):
        if not isinstance(name, str):
            raise IllSortedFormula("expected a variable name, got {}".format(render_sexpr(name)))
        v = Var(name, sort)
        inner = dict(env)
        inner[name] = v
        return v, inner

    def formula(self, tree, env=None):
        env = env or {}
        if isinstance(tree, str):
            if tree == "true":
                return Top()
            if tree == "false":
                return Bottom()
            raise IllSortedFormula("expected a formula, got {}".format(tree))
        if not tree:
            raise IllSortedFormula("empty formula")
        head, args = tree[0], tree[1:]
        if head == "=":
            self._arity(head, args, 2)
            left, right = (self._var(a, env) for a in args)
            if left.sort != right.sort:
                raise IllSortedFormula("{} and {} have different sorts".format(left.name, right.name))
            return Equal(left, right)
        if head == "in":
            self._arity(head, args, 2)
            vx, vs = (self._var(a, env) for a in args)
            base, membership = self._membership(vs)
            if vx.sort != base:
                raise IllSortedFormula("{} is not of the base sort of {}".format(vx.name, vs.name))
            return member(vx, vs, membership)
        if head == "and":
            return conjunction(self.formula(a, env) for a in args)
        if head == "or":
            return disjunction(self.formula(a, env) for a in args)
        if head == "implies":
            self._arity(head, args, 2)
            return Implies(self.formula(args[0], env), self.formula(args[1], env))
        if head == "iff":
            self._arity(head, args, 2)
            return iff(self.formula(args[0], env), self.formula(args[1], env))
        if head == "not":
            self._arity(head, args, 1)
            return Not(self.formula(args[0], env))
        if head in ("forall", "exists"):
            self._arity(head, args, 3)
            v, inner = self._bind(args[0], self.sort(args[1]), env)
            quantifier = Forall if head == "forall" else Exists
            return quantifier(v, self.formula(args[2], inner))
        if head in ("forall-in", "exists-in"):
            self._arity(head, args, 3)
            vs = self._var(args[1], env)
            base, membership = self._membership(vs)
            v, inner = self._bind(args[0], base, env)
            sugar = forall_in if head == "forall-in" else exists_in
            return sugar(v, vs, membership, self.formula(args[2], inner))
        return self._named_atom(head, args, env)

    def _named_atom(self, head, args, env):
        spec = self.spec
        if head in spec.subobjects:
            self._arity(head, args, 1)
            v = self._var(args[0], env)
            sub = spec.subobjects[head].subobject
            if v.sort != sub.parent:
                raise IllSortedFormula("{} is not a subobject of the sort of {}".format(head, v.name))
            return Atom(sub, (v,))
        if head in spec.maps:
            self._arity(head, args, 2)
            vx, vy = (self._var(a, env) for a in args)
            f = spec.maps[head].map
            if vx.sort != f.source or vy.sort != f.target:
                raise IllSortedFormula("{} is applied at the wrong sorts".format(head))
            return Atom(graph(f), (vy, vx))
        raise IllSortedFormula("unknown relation {}".format(head))


def resolve_formula(spec, tree, ctx=None):
    """
    @raise IllSortedFormula on unknown names, free variables or sort errors
    """
    return FormulaResolver(spec, ctx).formula(tree)
