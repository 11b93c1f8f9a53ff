"""
Copyright (c) Meta Platforms, Inc. and affiliates.

This source code is licensed under the MIT license found in the
LICENSE file in the root directory of this source tree.
"""

from __future__ import absolute_import, division, print_function, unicode_literals

import logging
from collections import namedtuple
from functools import lru_cache

from topos_lib.closure import close, is_dense_mono
from topos_lib.constants import DEFAULT_STAGE_CAP
from topos_lib.fincat import (
    NatTrans,
    Presheaf,
    Subpresheaf,
    compose,
    identity_map,
    iter_nat_trans,
    product,
    product_map,
    quotient_by_equivalence,
    yoneda,
)
from topos_lib.logic import (
    Atom,
    Exists,
    Forall,
    Implies,
    And,
    ParentMismatch,
    Var,
    evaluate,
    graph,
    iff,
    is_valid,
    iter_subpresheaves,
    pullback_sub,
)

log = logging.getLogger(__name__)


class PowerObjectTooLarge(Exception):
    """
    A stage of the power object exceeds the size cap
    """

    pass


class NotClosed(Exception):
    """
    Subobject differs from its closure
    """

    pass


class NotAdmitted(Exception):
    """
    A relation needed by a classifying map is missing from the power object
    """

    pass


# A relation at stage a is a subobject R of y(a) x X, stored as the frozenset
# of its (psi, x) pairs: psi a morphism into a, x an element index of
# X(dom psi).


@lru_cache(maxsize=None)
def relation_space(x, a):
    return product(yoneda(x.category, a), x)


def stage_size(x, a):
    return sum(relation_space(x, a).sizes)


def relation_of(x, a, s):
    ya = yoneda(x.category, a)
    space = s.parent
    return frozenset(
        (ya.elements[b][space.elements[b][k][0]], space.elements[b][k][1])
        for b, sel in enumerate(s.selection)
        for k in sel
    )


def relation_subobject(x, a, relation):
    c = x.category
    ya = yoneda(c, a)
    space = relation_space(x, a)
    selection = [set() for _ in c.objects]
    for psi, ix in relation:
        b = c.dom[psi]
        selection[b].add(space.index(b, (ya.index(b, psi), ix)))
    return Subpresheaf(space, tuple(frozenset(sel) for sel in selection))


def restrict_relation(c, relation, phi):
    """
    R . phi = {(psi, x) | (phi . psi, x) in R}
    """
    by_arrow = {}
    for chi, ix in relation:
        by_arrow.setdefault(chi, []).append(ix)
    b = c.dom[phi]
    return frozenset(
        (psi, ix) for psi in c.arrows_into[b] for ix in by_arrow.get(c.table[phi][psi], ())
    )


def _membership(power, x):
    c = x.category
    px = product(power, x)
    selection = []
    for a, relations in enumerate(power.elements):
        ida = c.identity[a]
        selection.append(
            frozenset(
                px.index(a, (k, ix)) for k, r in enumerate(relations) for psi, ix in r if psi == ida
            )
        )
    return Subpresheaf(px, tuple(selection))


PowerObject = namedtuple("PowerObject", ["base", "presheaf", "membership"])


def _carrier_presheaf(c, stages, what):
    index = [{r: k for k, r in enumerate(relations)} for relations in stages]
    action = []
    for phi in range(len(c.morphisms)):
        src, tgt = c.cod[phi], c.dom[phi]
        row = []
        for r in stages[src]:
            restricted = restrict_relation(c, r, phi)
            if restricted not in index[tgt]:
                raise NotAdmitted(
                    "restricting a {} relation along {} leaves the carrier".format(
                        what, c.morphisms[phi]
                    )
                )
            row.append(index[tgt][restricted])
        action.append(tuple(row))
    return Presheaf(c, tuple(stages), tuple(action))


@lru_cache(maxsize=None)
def power_object(x, cap=DEFAULT_STAGE_CAP, admit=None):
    """
    P(X)(a) = subobjects of y(a) x X, optionally filtered by
    admit(a, relation).

    @raise PowerObjectTooLarge naming the first stage over the cap
    @raise NotAdmitted if the filtered carrier is not restriction-stable
    """
    c = x.category
    stages = []
    for a in range(len(c.objects)):
        size = stage_size(x, a)
        if size > cap:
            raise PowerObjectTooLarge(
                "stage {} has {} relation points, cap is {}".format(c.objects[a], size, cap)
            )
        relations = [relation_of(x, a, s) for s in iter_subpresheaves(relation_space(x, a))]
        if admit is not None:
            relations = [r for r in relations if admit(a, r)]
        stages.append(tuple(relations))
    power = _carrier_presheaf(c, stages, "admitted")
    log.debug("power object sizes %s", power.sizes)
    return PowerObject(x, power, _membership(power, x))


def relation_for(a_presheaf, x, s, stage, ia):
    """
    The relation chi_S(a) = {(psi, x) | (A(psi)(a), x) in S}.
    """
    c = x.category
    ax = s.parent
    return frozenset(
        (psi, ix)
        for psi in c.arrows_into[stage]
        for ix in range(x.size(c.dom[psi]))
        if ax.index(c.dom[psi], (a_presheaf.action[psi][ia], ix)) in s.selection[c.dom[psi]]
    )


def classify(a_presheaf, x, s, power=None):
    """
    Classifying map chi_S: A -> P(X) of a family S of subobjects of X
    indexed by A.

    @raise NotAdmitted if some chi_S(a) is not in the carrier
    """
    if s.parent != product(a_presheaf, x):
        raise ParentMismatch("family must be a subobject of A x X")
    if power is None:
        power = power_object(x)
    p = power.presheaf
    comps = []
    for stage in range(len(x.category.objects)):
        row = []
        for ia in range(a_presheaf.size(stage)):
            r = relation_for(a_presheaf, x, s, stage, ia)
            try:
                row.append(p.index(stage, r))
            except KeyError:
                raise NotAdmitted(
                    "family at {} is not classified".format(a_presheaf.elements[stage][ia])
                )
        comps.append(tuple(row))
    return NatTrans(a_presheaf, p, tuple(comps))


def family_of(chi, x, membership):
    """
    Pulls a membership relation back along chi x 1.
    """
    return pullback_sub(product_map(chi, identity_map(x)), membership)


PJObject = namedtuple("PJObject", ["base", "presheaf", "membership", "power", "quotient"])


def _pj_object(ctx, x):
    power = power_object(x, ctx.cap)
    c = ctx.category
    closures = []
    for a, relations in enumerate(power.presheaf.elements):
        closures.append(
            [relation_of(x, a, close(ctx, relation_subobject(x, a, r))) for r in relations]
        )
    stages = tuple(
        tuple(r for r, cr in zip(relations, row) if r == cr)
        for relations, row in zip(power.presheaf.elements, closures)
    )
    pj = _carrier_presheaf(c, stages, "closed")
    quotient = NatTrans(
        power.presheaf,
        pj,
        tuple(tuple(pj.index(a, cr) for cr in row) for a, row in enumerate(closures)),
    )
    log.debug("P_J sizes %s from P sizes %s", pj.sizes, power.presheaf.sizes)
    return PJObject(x, pj, _membership(pj, x), power, quotient)


def pj_object(ctx, x):
    """
    P_J(X): closed relations, with the quotient R -> C(R) out of P(X).
    """
    return ctx.memoized(("pj", x), lambda: _pj_object(ctx, x))


def pj_by_quotient(ctx, x):
    """
    P(X) divided by s ~ t iff forall x (x in- s <=> x in- t), where in- is
    the closed membership relation. Agrees with pj_object up to iso.
    """
    power = power_object(x, ctx.cap)
    closed_member = close(ctx, power.membership)
    vs, vt, vx = Var("s", power.presheaf), Var("t", power.presheaf), Var("x", x)
    relation = evaluate(
        Forall(vx, iff(Atom(closed_member, (vs, vx)), Atom(closed_member, (vt, vx)))),
        (vs, vt),
    )
    return quotient_by_equivalence(power.presheaf, relation)


def _smallness_formula(ctx, f, exact):
    x, a_presheaf = f.source, f.target
    power = power_object(x, ctx.cap)
    member = power.membership
    closed_member = close(ctx, member)
    gr = graph(f)
    va, vs, vx = Var("a", a_presheaf), Var("s", power.presheaf), Var("x", x)
    if exact:
        body = iff(Atom(gr, (va, vx)), Atom(closed_member, (vs, vx)))
    else:
        body = And(
            Implies(Atom(member, (vs, vx)), Atom(gr, (va, vx))),
            Implies(Atom(gr, (va, vx)), Atom(closed_member, (vs, vx))),
        )
    return Forall(va, Exists(vs, Forall(vx, body)))


def is_locally_small(ctx, f):
    """
    forall a exists s: s is inside the fibre of a and the fibre is inside
    the closure of s.

    @raise PowerObjectTooLarge
    """
    return ctx.memoized(
        ("locally-small", f), lambda: is_valid(_smallness_formula(ctx, f, False), category=ctx.category)
    )


def is_closed_small(ctx, f):
    """
    forall a exists s: the fibre of a equals the closure of s.
    """
    return is_valid(_smallness_formula(ctx, f, True), category=ctx.category)


def classify_closed(ctx, a_presheaf, x, s):
    """
    Classifying map A -> P_J(X) of a closed family.

    @raise NotClosed with an element of C(S) missing from S
    """
    closed = close(ctx, s)
    if closed != s:
        ax = s.parent
        c = ctx.category
        for b, sel in enumerate(closed.selection):
            missing = sorted(sel - s.selection[b])
            if missing:
                raise NotClosed(
                    "{} at {} lies in the closure only".format(
                        ax.elements[b][missing[0]], c.objects[b]
                    )
                )
    pj = pj_object(ctx, x)
    return compose(pj.quotient, classify(a_presheaf, x, s, pj.power))


def direct_image(f, cap=DEFAULT_STAGE_CAP):
    """
    f_!: P(X) -> P(A), R -> (1 x f)(R)
    """
    px = power_object(f.source, cap).presheaf
    pa = power_object(f.target, cap).presheaf
    c = px.category
    comps = []
    for a, relations in enumerate(px.elements):
        comps.append(
            tuple(
                pa.index(a, frozenset((psi, f.components[c.dom[psi]][ix]) for psi, ix in r))
                for r in relations
            )
        )
    return NatTrans(px, pa, tuple(comps))


def inverse_image(f, cap=DEFAULT_STAGE_CAP):
    """
    f*: P(A) -> P(X), T -> (1 x f)^-1(T)
    """
    px = power_object(f.source, cap).presheaf
    pa = power_object(f.target, cap).presheaf
    c = px.category
    comps = []
    for a, relations in enumerate(pa.elements):
        row = []
        for r in relations:
            row.append(
                px.index(
                    a,
                    frozenset(
                        (psi, ix)
                        for psi in c.arrows_into[a]
                        for ix in range(f.source.size(c.dom[psi]))
                        if (psi, f.components[c.dom[psi]][ix]) in r
                    ),
                )
            )
        comps.append(tuple(row))
    return NatTrans(pa, px, tuple(comps))


def image_adjunction_holds(f, cap=DEFAULT_STAGE_CAP):
    """
    Evaluates forall s t (f_!(s) <= t <=> s <= f*(t)).
    """
    x, a_presheaf = f.source, f.target
    px, pa = power_object(x, cap), power_object(a_presheaf, cap)
    in_direct = family_of(direct_image(f, cap), a_presheaf, pa.membership)
    in_inverse = family_of(inverse_image(f, cap), x, px.membership)
    vs, vt = Var("s", px.presheaf), Var("t", pa.presheaf)
    va, vx = Var("a", a_presheaf), Var("x", x)
    left = Forall(va, Implies(Atom(in_direct, (vs, va)), Atom(pa.membership, (vt, va))))
    right = Forall(vx, Implies(Atom(px.membership, (vs, vx)), Atom(in_inverse, (vt, vx))))
    return is_valid(Forall(vs, Forall(vt, iff(left, right))))


LocalSmallnessWitness = namedtuple("LocalSmallnessWitness", ["base", "cover", "family"])


def find_local_smallness_witness(ctx, f, candidates, family=None):
    """
    Bounded search for the diagram defining local smallness: an epi
    h: B ->> A and a family T of subobjects of X indexed by B that is dense
    in B x_A X. Bases come from candidates; family filters T -> B.

    @return LocalSmallnessWitness or None
    """
    x, a_presheaf = f.source, f.target
    for b_presheaf in candidates:
        bx = product(b_presheaf, x)
        for h in iter_nat_trans(b_presheaf, a_presheaf):
            if not h.is_epi():
                continue
            fibred = Subpresheaf(
                bx,
                tuple(
                    frozenset(
                        k
                        for k, (ib, ix) in enumerate(labels)
                        if h.components[stage][ib] == f.components[stage][ix]
                    )
                    for stage, labels in enumerate(bx.elements)
                ),
            )
            inside = fibred.as_presheaf
            for t in iter_subpresheaves(inside):
                if not is_dense_mono(ctx, t):
                    continue
                family_t = Subpresheaf(
                    bx,
                    tuple(
                        frozenset(fibred.inclusion.components[stage][k] for k in sel)
                        for stage, sel in enumerate(t.selection)
                    ),
                )
                leg = NatTrans(
                    family_t.as_presheaf,
                    b_presheaf,
                    tuple(tuple(label[0] for label in labels) for labels in family_t.as_presheaf.elements),
                )
                if family is None or family(leg):
                    return LocalSmallnessWitness(b_presheaf, h, family_t)
    return None
