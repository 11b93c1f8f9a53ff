"""
Copyright (c) Meta Platforms, Inc. and affiliates.

This source code is licensed under the MIT license found in the
LICENSE file in the root directory of this source tree.
"""

from __future__ import absolute_import, division, print_function, unicode_literals

import logging
from collections import namedtuple

from topos_lib.fincat import (
    NatTrans,
    Subpresheaf,
    product,
)

log = logging.getLogger(__name__)


class ParentMismatch(Exception):
    """
    Subobjects of different presheaves were combined
    """

    pass


class IllSortedFormula(Exception):
    """
    A variable or atom does not match the sort it is used at
    """

    pass


class TooManySubobjects(Exception):
    """
    Subobject enumeration exceeded its cap
    """

    pass


def _same_parent(s, t):
    if s.parent != t.parent:
        raise ParentMismatch("subobjects have different parents")
    return s.parent


def top(x):
    return Subpresheaf(x, tuple(frozenset(range(n)) for n in x.sizes))


def bottom(x):
    return Subpresheaf(x, tuple(frozenset() for _ in x.elements))


def meet(s, t):
    x = _same_parent(s, t)
    return Subpresheaf(x, tuple(p & q for p, q in zip(s.selection, t.selection)))


def join(s, t):
    x = _same_parent(s, t)
    return Subpresheaf(x, tuple(p | q for p, q in zip(s.selection, t.selection)))


def le(s, t):
    _same_parent(s, t)
    return all(p <= q for p, q in zip(s.selection, t.selection))


def implication(s, t):
    """
    x in (s => t)(a) iff every restriction of x lying in s also lies in t.
    """
    x = _same_parent(s, t)
    c = x.category
    selection = []
    for a in range(len(c.objects)):
        keep = set()
        for i in range(x.size(a)):
            for phi in c.arrows_into[a]:
                b = c.dom[phi]
                j = x.action[phi][i]
                if j in s.selection[b] and j not in t.selection[b]:
                    break
            else:
                keep.add(i)
        selection.append(frozenset(keep))
    return Subpresheaf(x, tuple(selection))


def negation(s):
    return implication(s, bottom(s.parent))


def pullback_sub(f, t):
    """
    f*(t) for f: X -> Y and t a subobject of Y
    """
    if t.parent != f.target:
        raise ParentMismatch("subobject is not over the codomain")
    return Subpresheaf(
        f.source,
        tuple(
            frozenset(i for i, y in enumerate(comp) if y in t.selection[a])
            for a, comp in enumerate(f.components)
        ),
    )


def exists_along(f, s):
    if s.parent != f.source:
        raise ParentMismatch("subobject is not over the domain")
    return Subpresheaf(
        f.target,
        tuple(
            frozenset(comp[i] for i in s.selection[a]) for a, comp in enumerate(f.components)
        ),
    )


def forall_along(f, s):
    """
    y in forall_f(s)(a) iff for every phi: b -> a the whole fibre of f over
    Y(phi)(y) lies in s(b).
    """
    if s.parent != f.source:
        raise ParentMismatch("subobject is not over the domain")
    x, y = f.source, f.target
    c = x.category
    # ok[b][y'] holds iff the fibre over y' at stage b is inside s(b)
    ok = []
    for b, comp in enumerate(f.components):
        row = [True] * y.size(b)
        for i, image in enumerate(comp):
            if i not in s.selection[b]:
                row[image] = False
        ok.append(row)
    selection = []
    for a in range(len(c.objects)):
        selection.append(
            frozenset(
                j
                for j in range(y.size(a))
                if all(ok[c.dom[phi]][y.action[phi][j]] for phi in c.arrows_into[a])
            )
        )
    return Subpresheaf(y, tuple(selection))


def diagonal(x):
    xx = product(x, x)
    return Subpresheaf(
        xx,
        tuple(frozenset(xx.index(a, (i, i)) for i in range(x.size(a))) for a in range(len(x.elements))),
    )


def kernel_pair(f):
    x = f.source
    xx = product(x, x)
    return Subpresheaf(
        xx,
        tuple(
            frozenset(k for k, (i, j) in enumerate(xx.elements[a]) if comp[i] == comp[j])
            for a, comp in enumerate(f.components)
        ),
    )


def graph(f):
    """
    Graph of f: X -> A as the subobject {(f(x), x)} of A x X.
    """
    ax = product(f.target, f.source)
    return Subpresheaf(
        ax,
        tuple(
            frozenset(ax.index(a, (y, i)) for i, y in enumerate(comp))
            for a, comp in enumerate(f.components)
        ),
    )


def iter_subpresheaves(x, cap=None):
    """
    Enumerates every subobject of x, starting from the bottom. Each element
    is either excluded or included together with all of its restrictions,
    so every branch that survives is a restriction-stable selection.

    @raise TooManySubobjects once more than cap subobjects were produced
    """
    c = x.category
    elements = [(a, i) for a in range(len(c.objects)) for i in range(x.size(a))]
    down = {
        (a, i): frozenset((c.dom[phi], x.action[phi][i]) for phi in c.arrows_into[a])
        for a, i in elements
    }
    included = set()
    excluded = set()
    produced = [0]

    def search(k):
        if k == len(elements):
            produced[0] += 1
            if cap is not None and produced[0] > cap:
                raise TooManySubobjects("more than {} subobjects".format(cap))
            yield Subpresheaf(
                x,
                tuple(
                    frozenset(i for b, i in included if b == a) for a in range(len(c.objects))
                ),
            )
            return
        e = elements[k]
        if e in included:
            for s in search(k + 1):
                yield s
            return
        excluded.add(e)
        for s in search(k + 1):
            yield s
        excluded.discard(e)
        new = down[e] - included
        if not new & excluded:
            included.update(new)
            for s in search(k + 1):
                yield s
            included.difference_update(new)

    for s in search(0):
        yield s


# Formulas of the internal language. Sorts are presheaves; an atom is a
# subobject of the product of the sorts of its arguments (or of the sort
# itself for a unary atom).

Var = namedtuple("Var", ["name", "sort"])
Top = namedtuple("Top", [])
Bottom = namedtuple("Bottom", [])
Atom = namedtuple("Atom", ["relation", "args"])
Equal = namedtuple("Equal", ["left", "right"])
And = namedtuple("And", ["left", "right"])
Or = namedtuple("Or", ["left", "right"])
Implies = namedtuple("Implies", ["left", "right"])
Not = namedtuple("Not", ["body"])
Forall = namedtuple("Forall", ["var", "body"])
Exists = namedtuple("Exists", ["var", "body"])


def member(x, s, relation):
    """
    x in s, against a membership relation on P x X
    """
    return Atom(relation, (s, x))


def iff(left, right):
    return And(Implies(left, right), Implies(right, left))


def forall_in(x, s, relation, body):
    return Forall(x, Implies(member(x, s, relation), body))


def exists_in(x, s, relation, body):
    return Exists(x, And(member(x, s, relation), body))


def conjunction(formulas):
    formulas = list(formulas)
    if not formulas:
        return Top()
    result = formulas[-1]
    for phi in reversed(formulas[:-1]):
        result = And(phi, result)
    return result


def disjunction(formulas):
    formulas = list(formulas)
    if not formulas:
        return Bottom()
    result = formulas[-1]
    for phi in reversed(formulas[:-1]):
        result = Or(phi, result)
    return result


def _formula_category(phi):
    stack = [phi]
    while stack:
        node = stack.pop()
        if isinstance(node, Atom):
            return node.relation.parent.category
        if isinstance(node, (Forall, Exists)):
            return node.var.sort.category
        if isinstance(node, Equal):
            return node.left.sort.category
        if isinstance(node, (And, Or, Implies)):
            stack.extend((node.left, node.right))
        elif isinstance(node, Not):
            stack.append(node.body)
    return None


def context_presheaf(context, category):
    return product(*(v.sort for v in context), category=category)


def _lookup(context, var):
    for pos in range(len(context) - 1, -1, -1):
        if context[pos].name == var.name:
            if context[pos].sort != var.sort:
                raise IllSortedFormula("{} is used at the wrong sort".format(var.name))
            return pos
    raise IllSortedFormula("unbound variable {}".format(var.name))


def _atom_map(ctx_presheaf, positions, relation, sorts):
    target = relation.parent
    c = ctx_presheaf.category
    unary = len(sorts) == 1 and target == sorts[0]
    if not unary and target != product(*sorts, category=c):
        raise IllSortedFormula("atom arity does not match its relation")
    comps = []
    for a, labels in enumerate(ctx_presheaf.elements):
        if unary:
            comps.append(tuple(t[positions[0]] for t in labels))
        else:
            comps.append(tuple(target.index(a, tuple(t[p] for p in positions)) for t in labels))
    return NatTrans(ctx_presheaf, target, tuple(comps))


def _drop_last(context, category):
    big = context_presheaf(context, category)
    small = context_presheaf(context[:-1], category)
    return NatTrans(
        big,
        small,
        tuple(tuple(small.index(a, t[:-1]) for t in labels) for a, labels in enumerate(big.elements)),
    )


def _fresh(context, name):
    taken = {v.name for v in context}
    n = len(context)
    while "{}{}".format(name, n) in taken:
        n += 1
    return "{}{}".format(name, n)


def _evaluate(phi, context, category):
    ctx = context_presheaf(context, category)
    if isinstance(phi, Top):
        return top(ctx)
    if isinstance(phi, Bottom):
        return bottom(ctx)
    if isinstance(phi, Atom):
        positions = tuple(_lookup(context, v) for v in phi.args)
        sorts = tuple(v.sort for v in phi.args)
        return pullback_sub(_atom_map(ctx, positions, phi.relation, sorts), phi.relation)
    if isinstance(phi, Equal):
        if phi.left.sort != phi.right.sort:
            raise IllSortedFormula("equality between different sorts")
        p, q = _lookup(context, phi.left), _lookup(context, phi.right)
        return Subpresheaf(
            ctx,
            tuple(
                frozenset(k for k, t in enumerate(labels) if t[p] == t[q])
                for labels in ctx.elements
            ),
        )
    if isinstance(phi, And):
        return meet(_evaluate(phi.left, context, category), _evaluate(phi.right, context, category))
    if isinstance(phi, Or):
        return join(_evaluate(phi.left, context, category), _evaluate(phi.right, context, category))
    if isinstance(phi, Implies):
        return implication(
            _evaluate(phi.left, context, category), _evaluate(phi.right, context, category)
        )
    if isinstance(phi, Not):
        return negation(_evaluate(phi.body, context, category))
    if isinstance(phi, (Forall, Exists)):
        var = phi.var
        if var.sort.category != category:
            raise IllSortedFormula("{} ranges over another category".format(var.name))
        if var.name == "_":
            var = Var(_fresh(context, "_"), var.sort)
        inner = context + (var,)
        body = _evaluate(phi.body, inner, category)
        along = _drop_last(inner, category)
        if isinstance(phi, Forall):
            return forall_along(along, body)
        return exists_along(along, body)
    raise IllSortedFormula("not a formula: {!r}".format(phi))


def evaluate(phi, context=(), category=None):
    """
    Interprets a formula as a subobject of the product of its context sorts.
    Quantifiers are the adjoints to pulling back along product projections.

    @param context: sequence of Var, innermost last
    @return Subpresheaf of product(*sorts)
    @raise IllSortedFormula on unbound or mis-sorted variables
    """
    context = tuple(context)
    if category is None:
        if context:
            category = context[0].sort.category
        else:
            category = _formula_category(phi)
    if category is None:
        raise IllSortedFormula("cannot infer the category of a closed constant formula")
    return _evaluate(phi, context, category)


def is_valid(phi, context=(), category=None):
    result = evaluate(phi, context, category)
    return result == top(result.parent)


def as_subobject_of(sort, s):
    """
    Transfers a subobject of product(sort) onto sort itself.
    """
    if s.parent != product(sort):
        raise ParentMismatch("not a one-variable context")
    return Subpresheaf(sort, s.selection)
