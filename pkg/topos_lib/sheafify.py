"""
Copyright (c) Meta Platforms, Inc. and affiliates.

This source code is licensed under the MIT license found in the
LICENSE file in the root directory of this source tree.
"""

from __future__ import absolute_import, division, print_function, unicode_literals

import logging
from collections import namedtuple

from topos_lib.closure import NotDense, close, covering_sieve_of, is_dense_mono
from topos_lib.fincat import (
    NatTrans,
    Presheaf,
    PresheafDiagram,
    Subpresheaf,
    colimit,
    compose,
    coproduct,
    exponential,
    find_isomorphism,
    image_factorization,
    iter_nat_trans,
    limit,
    limit_mediator,
    product,
    quotient_by_equivalence,
    terminal_presheaf,
    yoneda,
)
from topos_lib.logic import ParentMismatch, diagonal, exists_along, top
from topos_lib.powerobj import classify, pj_object
from topos_lib.site import Sieve, maximal_sieve, restrict_sieve, sieve_to_subobject

log = logging.getLogger(__name__)


class NotASheaf(Exception):
    """
    Presheaf lacks unique amalgamations for some covering sieve
    """

    pass


class InvalidWitness(Exception):
    """
    Local smallness witness for an exponential is unusable
    """

    pass


def _family_points(family):
    """
    (phi, element index) pairs of a matching family given as a map out of
    a sieve presheaf.
    """
    return tuple(
        sorted(
            (phi, family.components[b][k])
            for b, labels in enumerate(family.source.elements)
            for k, phi in enumerate(labels)
        )
    )


def amalgamations(x, points, base):
    return [
        y
        for y in range(x.size(base))
        if all(x.action[phi][y] == value for phi, value in points)
    ]


def matching_families(ctx, x, p):
    sieve = sieve_to_subobject(ctx.category, p).as_presheaf
    for family in iter_nat_trans(sieve, x):
        yield _family_points(family)


def sheaf_failures(ctx, x):
    """
    @return (object, sieve, family points, number of amalgamations) for
    every matching family without exactly one amalgamation
    """
    c = ctx.category
    failures = []
    for a in range(len(c.objects)):
        for p in ctx.coverage.sieves(a):
            for points in matching_families(ctx, x, p):
                n = len(amalgamations(x, points, a))
                if n != 1:
                    failures.append((a, p, points, n))
    return failures


def is_separated(ctx, x):
    return ctx.memoized(
        ("separated", x), lambda: all(n <= 1 for _, _, _, n in sheaf_failures(ctx, x))
    )


def is_sheaf(ctx, x):
    return ctx.memoized(("sheaf", x), lambda: not sheaf_failures(ctx, x))


def extend_along_dense(ctx, m, v):
    """
    The unique u: A -> X with u . m = v, for m: B >-> A dense and X a sheaf.
    Each element of A is sent to the amalgamation of the values of v along
    its covering sieve.

    @raise NotASheaf, NotDense
    """
    x = v.target
    if v.source != m.as_presheaf:
        raise ParentMismatch("map must start at the dense subobject")
    if not is_sheaf(ctx, x):
        raise NotASheaf("codomain is not a sheaf")
    if not is_dense_mono(ctx, m):
        raise NotDense("subobject is not dense")
    a_presheaf = m.parent
    c = ctx.category
    comps = []
    for stage in range(len(c.objects)):
        row = []
        for ia in range(a_presheaf.size(stage)):
            p = covering_sieve_of(c, a_presheaf, m, stage, ia)
            points = []
            for phi in p.members:
                b = c.dom[phi]
                points.append((phi, v.components[b][m.position(b, a_presheaf.action[phi][ia])]))
            found = amalgamations(x, points, stage)
            if len(found) != 1:
                raise NotASheaf(
                    "{} amalgamations at {}".format(len(found), c.objects[stage])
                )
            row.append(found[0])
        comps.append(tuple(row))
    return NatTrans(a_presheaf, x, tuple(comps))


SheafificationResult = namedtuple(
    "SheafificationResult", ["source", "pj", "sigma", "image", "subobject", "sheaf", "unit"]
)


def _sheafify(ctx, x):
    pj = pj_object(ctx, x)
    singleton = classify(x, x, diagonal(x), pj.power)
    sigma = compose(pj.quotient, singleton)
    _, image = image_factorization(sigma)
    closed = close(ctx, image)
    sheaf = closed.as_presheaf
    unit = NatTrans(
        x,
        sheaf,
        tuple(tuple(closed.position(a, y) for y in comp) for a, comp in enumerate(sigma.components)),
    )
    log.debug("a(X) sizes %s for X sizes %s", sheaf.sizes, x.sizes)
    return SheafificationResult(x, pj, sigma, image, closed, sheaf, unit)


def sheafify(ctx, x):
    """
    a(X) = closure of the image of sigma: X -> P(X) -> P_J(X), with unit
    eta: X -> a(X).
    """
    return ctx.memoized(("sheafify", x), lambda: _sheafify(ctx, x))


def factor_through_unit(ctx, result, f):
    """
    The unique map a(X) -> Y through which f: X -> Y factors, Y a sheaf.
    """
    if f.source != result.source:
        raise ParentMismatch("map must start at the sheafified presheaf")
    closed, image, sigma = result.subobject, result.image, result.sigma
    within = Subpresheaf(
        result.sheaf,
        tuple(
            frozenset(closed.position(a, i) for i in sel) for a, sel in enumerate(image.selection)
        ),
    )
    comps = []
    for a, sel in enumerate(image.selection):
        first = {}
        for ix, i in enumerate(sigma.components[a]):
            first.setdefault(i, ix)
        comps.append(tuple(f.components[a][first[i]] for i in sorted(sel)))
    v = NatTrans(within.as_presheaf, f.target, tuple(comps))
    return extend_along_dense(ctx, within, v)


def sheafify_map(ctx, f):
    """
    a(f): a(X) -> a(Y)
    """
    source = sheafify(ctx, f.source)
    target = sheafify(ctx, f.target)
    return factor_through_unit(ctx, source, compose(target.unit, f))


PlusResult = namedtuple("PlusResult", ["presheaf", "unit"])


def _agreement(left, right):
    values = dict(left)
    return frozenset(phi for phi, y in right if values.get(phi, -1) == y)


def plus_construction(ctx, x):
    """
    X+(a): matching families on covering sieves of a, two families
    identified when they agree on a covering sieve. Each class is labelled
    by its first (sieve, family) pair.
    """
    c = ctx.category
    covering = ctx.coverage.covering
    stages = []
    class_of = []
    for a in range(len(c.objects)):
        pairs = [(p, points) for p in ctx.coverage.sieves(a) for points in matching_families(ctx, x, p)]
        rep = list(range(len(pairs)))
        for i in range(len(pairs)):
            for j in range(i):
                agree = Sieve(a, _agreement(pairs[i][1], pairs[j][1]))
                if agree in covering[a]:
                    rep[i] = rep[j]
                    break
        reps = sorted(set(rep))
        position = {r: n for n, r in enumerate(reps)}
        stages.append(tuple(pairs[r] for r in reps))
        class_of.append({pair: position[rep[i]] for i, pair in enumerate(pairs)})
    action = []
    for phi in range(len(c.morphisms)):
        src, tgt = c.cod[phi], c.dom[phi]
        row = []
        for p, points in stages[src]:
            values = dict(points)
            q = restrict_sieve(c, p, phi)
            restricted = tuple(sorted((psi, values[c.table[phi][psi]]) for psi in q.members))
            row.append(class_of[tgt][(q, restricted)])
        action.append(tuple(row))
    plus = Presheaf(c, tuple(stages), tuple(action))
    unit = []
    for a in range(len(c.objects)):
        top_sieve = maximal_sieve(c, a)
        unit.append(
            tuple(
                class_of[a][(top_sieve, tuple(sorted((phi, x.action[phi][i]) for phi in top_sieve.members)))]
                for i in range(x.size(a))
            )
        )
    return PlusResult(plus, NatTrans(x, plus, tuple(unit)))


def double_plus_oracle(ctx, x):
    """
    X++ with the composite unit X -> X+ -> X++.
    """
    first = plus_construction(ctx, x)
    second = plus_construction(ctx, first.presheaf)
    return PlusResult(second.presheaf, compose(second.unit, first.unit))


def compare_with_oracle(ctx, x):
    """
    Searches for an iso a(X) -> X++ commuting with the units.

    @return the iso or None
    """
    result = sheafify(ctx, x)
    oracle = double_plus_oracle(ctx, x)
    fixed = {}
    for a, comp in enumerate(result.unit.components):
        for i, y in enumerate(comp):
            target = oracle.unit.components[a][i]
            if fixed.setdefault((a, y), target) != target:
                return None
    return find_isomorphism(result.sheaf, oracle.presheaf, fixed)


def sheafify_diagram(ctx, d):
    return PresheafDiagram(
        tuple(sheafify(ctx, x).sheaf for x in d.presheaves),
        tuple((i, j, sheafify_map(ctx, f)) for i, j, f in d.arrows),
        d.equations,
    )


LimitCheck = namedtuple("LimitCheck", ["name", "preserved"])


def limit_preserved(ctx, d):
    """
    Whether the comparison a(lim D) -> lim a(D) is an isomorphism.
    """
    lim = limit(d, category=ctx.category)
    image = sheafify(ctx, lim.apex)
    lim_of_images = limit(sheafify_diagram(ctx, d), category=ctx.category)
    legs = [sheafify_map(ctx, p) for p in lim.projections]
    return limit_mediator(lim_of_images, image.sheaf, legs).is_iso()


def default_battery(presheaves, maps):
    """
    Terminal object, binary products, equalizers and pullbacks over the
    given presheaves and maps.
    """
    battery = [("terminal", PresheafDiagram((), (), ()))]
    presheaves = list(presheaves)
    for i, x in enumerate(presheaves):
        for j in range(i, len(presheaves)):
            battery.append(("product {} {}".format(i, j), PresheafDiagram((x, presheaves[j]), (), ())))
    maps = list(maps)
    for i, f in enumerate(maps):
        for j in range(i + 1, len(maps)):
            g = maps[j]
            if f.source == g.source and f.target == g.target:
                battery.append(
                    ("equalizer {} {}".format(i, j), PresheafDiagram((f.source, f.target), ((0, 1, f), (0, 1, g)), ()))
                )
            if f.target == g.target:
                battery.append(
                    (
                        "pullback {} {}".format(i, j),
                        PresheafDiagram((f.source, g.source, f.target), ((0, 2, f), (1, 2, g)), ()),
                    )
                )
    return battery


def check_left_exactness(ctx, battery):
    """
    @return list of LimitCheck, one per (name, diagram) in the battery
    """
    checks = []
    for name, d in battery:
        preserved = limit_preserved(ctx, d)
        if not preserved:
            log.warning("sheafification does not preserve %s", name)
        checks.append(LimitCheck(name, preserved))
    return checks


def sheaf_exists_along(ctx, f, s):
    """
    Image in sheaves: the closure of the pointwise image.
    """
    return close(ctx, exists_along(f, s))


def sheaf_coproduct(ctx, x, y):
    """
    a(X + Y) with injections eta . inj.
    """
    col = coproduct(x, y)
    result = sheafify(ctx, col.apex)
    return result.sheaf, tuple(compose(result.unit, inj) for inj in col.injections)


def sheaf_initial(ctx):
    return sheafify(ctx, colimit(PresheafDiagram((), (), ()), category=ctx.category).apex).sheaf


ExponentialWitness = namedtuple("ExponentialWitness", ["base", "family"])


def default_witness(x):
    one = terminal_presheaf(x.category)
    return ExponentialWitness(one, top(product(one, x)))


def _fibre(c, b_presheaf, sp, stage, ib):
    """
    S_b over y(stage): pairs (psi, s) with s in S lying over B(psi)(b).
    """
    ya = yoneda(c, stage)
    space = product(ya, sp)
    selection = []
    for d, labels in enumerate(space.elements):
        selection.append(
            frozenset(
                k
                for k, (kpsi, ks) in enumerate(labels)
                if sp.elements[d][ks][0] == b_presheaf.action[ya.elements[d][kpsi]][ib]
            )
        )
    return Subpresheaf(space, tuple(selection))


def _fibre_value(c, stage, fibre, comps, d, psi, ks):
    ya = yoneda(c, stage)
    k = fibre.parent.index(d, (ya.index(d, psi), ks))
    return comps[d][fibre.position(d, k)]


def sheaf_exponential(ctx, x, y, witness=None):
    """
    Y^X as the quotient of sum_b Y^(S_b) by
    (b, f) ~ (b', f') iff f(s) = f'(s') whenever s, s' have the same image in X.

    @raise NotASheaf, InvalidWitness
    """
    c = ctx.category
    if not is_sheaf(ctx, x) or not is_sheaf(ctx, y):
        raise NotASheaf("exponential needs sheaves")
    witness = witness or default_witness(x)
    b_presheaf, s = witness
    if s.parent != product(b_presheaf, x):
        raise InvalidWitness("family must be a subobject of B x X")
    if not all(b_presheaf.sizes):
        raise InvalidWitness("B -> 1 is not an epimorphism")
    if not is_dense_mono(ctx, s):
        raise InvalidWitness("family is not dense in B x X")
    sp = s.as_presheaf
    fibres = {}
    elements = []
    for stage in range(len(c.objects)):
        row = []
        for ib in range(b_presheaf.size(stage)):
            fibre = _fibre(c, b_presheaf, sp, stage, ib)
            fibres[(stage, ib)] = fibre
            row.extend((ib, f.components) for f in iter_nat_trans(fibre.as_presheaf, y))
        elements.append(tuple(row))
    index = [{e: k for k, e in enumerate(row)} for row in elements]
    action = []
    for phi in range(len(c.morphisms)):
        src, tgt = c.cod[phi], c.dom[phi]
        ya_tgt = yoneda(c, tgt)
        row = []
        for ib, comps in elements[src]:
            ib2 = b_presheaf.action[phi][ib]
            fibre, target = fibres[(src, ib)], fibres[(tgt, ib2)]
            restricted = []
            for d, labels in enumerate(target.as_presheaf.elements):
                restricted.append(
                    tuple(
                        _fibre_value(c, src, fibre, comps, d, c.table[phi][ya_tgt.elements[d][kpsi]], ks)
                        for kpsi, ks in labels
                    )
                )
            row.append(index[tgt][(ib2, tuple(restricted))])
        action.append(tuple(row))
    total = Presheaf(c, tuple(elements), tuple(action))
    pairs = product(total, total)
    selection = []
    for stage, labels in enumerate(pairs.elements):
        keep = set()
        for k, (e1, e2) in enumerate(labels):
            (ib1, c1), (ib2, c2) = elements[stage][e1], elements[stage][e2]
            if _agree(c, sp, b_presheaf, fibres, stage, ib1, c1, ib2, c2):
                keep.add(k)
        selection.append(frozenset(keep))
    quotient = quotient_by_equivalence(total, Subpresheaf(pairs, tuple(selection)))
    log.debug("exponential: %s summands, quotient sizes %s", total.sizes, quotient.presheaf.sizes)
    return quotient.presheaf


def _agree(c, sp, b_presheaf, fibres, stage, ib1, c1, ib2, c2):
    ya = yoneda(c, stage)
    f1, f2 = fibres[(stage, ib1)], fibres[(stage, ib2)]
    for d in range(len(c.objects)):
        for psi in ya.elements[d]:
            over1 = b_presheaf.action[psi][ib1]
            over2 = b_presheaf.action[psi][ib2]
            for ks1, (lb1, lx1) in enumerate(sp.elements[d]):
                if lb1 != over1:
                    continue
                v1 = _fibre_value(c, stage, f1, c1, d, psi, ks1)
                for ks2, (lb2, lx2) in enumerate(sp.elements[d]):
                    if lb2 != over2 or lx2 != lx1:
                        continue
                    if v1 != _fibre_value(c, stage, f2, c2, d, psi, ks2):
                        return False
    return True


def exponential_agrees(ctx, x, y, witness=None):
    return find_isomorphism(sheaf_exponential(ctx, x, y, witness), exponential(x, y)) is not None
