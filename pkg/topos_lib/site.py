"""
Copyright (c) Meta Platforms, Inc. and affiliates.

This source code is licensed under the MIT license found in the
LICENSE file in the root directory of this source tree.
"""

from __future__ import absolute_import, division, print_function, unicode_literals

import logging
from collections import namedtuple
from functools import lru_cache

from topos_lib.constants import DEFAULT_SUBOBJECT_CAP
from topos_lib.fincat import Presheaf, Subpresheaf, Violation, yoneda
from topos_lib.logic import (
    Atom,
    Forall,
    Implies,
    Var,
    evaluate,
    iter_subpresheaves,
    negation,
    top,
)

log = logging.getLogger(__name__)


class SieveMismatch(Exception):
    """
    Sieve is not closed under precomposition or is restricted along a
    morphism with the wrong codomain
    """

    pass


class InvalidCoverage(Exception):
    """
    Declared covering sieves fail (L), (C1) or (C2)
    """

    pass


class Sieve(namedtuple("Sieve", ["base", "members"])):
    """
    A set of morphisms into base, closed under precomposition.
    """

    def sort_key(self):
        return (len(self.members), sorted(self.members))

    def names(self, category):
        return sorted(category.morphisms[phi] for phi in self.members)


def _sieve_failure(c, base, members):
    for phi in members:
        if c.cod[phi] != base:
            return "{} does not end at {}".format(c.morphisms[phi], c.objects[base])
        for psi in c.arrows_into[c.dom[phi]]:
            if c.table[phi][psi] not in members:
                return "{} . {} is missing".format(c.morphisms[phi], c.morphisms[psi])
    return None


def make_sieve(c, base, members):
    """
    @raise SieveMismatch naming the first pair that breaks closure
    """
    members = frozenset(members)
    failure = _sieve_failure(c, base, members)
    if failure:
        raise SieveMismatch(failure)
    return Sieve(base, members)


def maximal_sieve(c, a):
    return Sieve(a, frozenset(c.arrows_into[a]))


def empty_sieve(c, a):
    return Sieve(a, frozenset())


def restrict_sieve(c, p, phi):
    """
    P . phi = {psi | phi . psi in P}
    """
    if c.cod[phi] != p.base:
        raise SieveMismatch(
            "{} does not end at {}".format(c.morphisms[phi], c.objects[p.base])
        )
    b = c.dom[phi]
    return Sieve(b, frozenset(psi for psi in c.arrows_into[b] if c.table[phi][psi] in p.members))


def sieve_to_subobject(c, p):
    ya = yoneda(c, p.base)
    return Subpresheaf(
        ya,
        tuple(
            frozenset(k for k, phi in enumerate(hom) if phi in p.members) for hom in ya.elements
        ),
    )


def sieve_from_subobject(c, base, s):
    ya = s.parent
    return Sieve(base, frozenset(ya.elements[b][k] for b, sel in enumerate(s.selection) for k in sel))


@lru_cache(maxsize=None)
def build_omega(c):
    """
    Presheaf of sieves. Omega(a) lists every sieve on a ordered by size and
    then by member indices; the action is restriction of sieves.
    """
    elements = []
    for a in range(len(c.objects)):
        sieves = [sieve_from_subobject(c, a, s) for s in iter_subpresheaves(yoneda(c, a))]
        elements.append(tuple(sorted(sieves, key=Sieve.sort_key)))
    index = [{p: i for i, p in enumerate(sieves)} for sieves in elements]
    action = []
    for phi in range(len(c.morphisms)):
        src, tgt = c.cod[phi], c.dom[phi]
        action.append(tuple(index[tgt][restrict_sieve(c, p, phi)] for p in elements[src]))
    log.debug("omega sizes %s", [len(sieves) for sieves in elements])
    return Presheaf(c, tuple(elements), tuple(action))


def truth_subobject(c):
    """
    The subobject {p | p} of Omega: the maximal sieve at every stage.
    """
    omega = build_omega(c)
    return Subpresheaf(
        omega,
        tuple(frozenset([omega.index(a, maximal_sieve(c, a))]) for a in range(len(c.objects))),
    )


class Coverage(namedtuple("Coverage", ["category", "covering"])):
    """
    covering[a] is the frozenset of sieves on a declared covering.
    """

    def covers(self, p):
        return p in self.covering[p.base]

    def sieves(self, a):
        return sorted(self.covering[a], key=Sieve.sort_key)

    def as_subpresheaf(self):
        omega = build_omega(self.category)
        return Subpresheaf(
            omega,
            tuple(
                frozenset(omega.index(a, p) for p in sieves)
                for a, sieves in enumerate(self.covering)
            ),
        )

    def describe(self):
        c = self.category
        return {
            c.objects[a]: [p.names(c) for p in self.sieves(a)] for a in range(len(c.objects))
        }


def make_coverage(c, covering):
    """
    @param covering: per object, an iterable of morphism index collections
    """
    sieves = []
    for a, families in enumerate(covering):
        sieves.append(frozenset(make_sieve(c, a, members) for members in families))
    return Coverage(c, tuple(sieves))


def coverage_from_subpresheaf(j):
    omega = j.parent
    return Coverage(
        omega.category,
        tuple(frozenset(omega.elements[a][k] for k in sel) for a, sel in enumerate(j.selection)),
    )


def trivial_coverage(c):
    return Coverage(c, tuple(frozenset([maximal_sieve(c, a)]) for a in range(len(c.objects))))


def all_sieves_coverage(c):
    omega = build_omega(c)
    return Coverage(c, tuple(frozenset(sieves) for sieves in omega.elements))


def double_negation_coverage(c):
    covering = []
    for a in range(len(c.objects)):
        dense = set()
        for p in build_omega(c).elements[a]:
            s = sieve_to_subobject(c, p)
            if negation(negation(s)) == top(s.parent):
                dense.add(p)
        covering.append(frozenset(dense))
    return Coverage(c, tuple(covering))


def meet_coverages(j, k):
    if j.category != k.category:
        raise SieveMismatch("coverages live over different categories")
    return Coverage(j.category, tuple(p & q for p, q in zip(j.covering, k.covering)))


ValidationReport = namedtuple("ValidationReport", ["valid", "violations"])


def _render_sieve(c, p):
    return "{" + ", ".join(p.names(c)) + "}"


def check_locality(cov):
    """
    (L): covering sieves restrict to covering sieves.
    """
    c = cov.category
    violations = []
    for a in range(len(c.objects)):
        for p in cov.sieves(a):
            for phi in c.arrows_into[a]:
                q = restrict_sieve(c, p, phi)
                if not cov.covers(q):
                    violations.append(
                        Violation(
                            "L",
                            c.objects[a],
                            "{} . {} = {} does not cover".format(
                                _render_sieve(c, p), c.morphisms[phi], _render_sieve(c, q)
                            ),
                        )
                    )
    return violations


def check_lt_coverage(cov):
    """
    Checks that J is a subobject of Omega, then evaluates
    (C1) forall p (T(p) => J(p)) and
    (C2) forall p, q ((T(p) => J(q)) => (J(p) => J(q)))
    in the internal language.
    """
    c = cov.category
    locality = check_locality(cov)
    if locality:
        return ValidationReport(False, locality)
    omega = build_omega(c)
    j = cov.as_subpresheaf()
    t = truth_subobject(c)
    p, q = Var("p", omega), Var("q", omega)
    violations = []

    held = evaluate(Implies(Atom(t, (p,)), Atom(j, (p,))), (p,))
    for a in range(len(c.objects)):
        if omega.index(a, maximal_sieve(c, a)) not in held.selection[a]:
            violations.append(Violation("C1", c.objects[a], "maximal sieve does not cover"))

    body = Implies(
        Implies(Atom(t, (p,)), Atom(j, (q,))),
        Implies(Atom(j, (p,)), Atom(j, (q,))),
    )
    held = evaluate(body, (p, q))
    for a, labels in enumerate(held.parent.elements):
        for k, (ip, iq) in enumerate(labels):
            if k not in held.selection[a]:
                violations.append(
                    Violation(
                        "C2",
                        c.objects[a],
                        "p = {}, q = {}".format(
                            _render_sieve(c, omega.elements[a][ip]),
                            _render_sieve(c, omega.elements[a][iq]),
                        ),
                    )
                )
    return ValidationReport(not violations, violations)


def require_lt_coverage(cov):
    """
    @raise InvalidCoverage naming the first violated law
    """
    report = check_lt_coverage(cov)
    if not report.valid:
        v = report.violations[0]
        raise InvalidCoverage("{} fails at {}: {}".format(v.law, v.where, v.detail))
    return report


def grothendieck_check(cov):
    c = cov.category
    violations = []
    for a in range(len(c.objects)):
        if not cov.covers(maximal_sieve(c, a)):
            violations.append(Violation("M", c.objects[a], "maximal sieve does not cover"))
    violations.extend(check_locality(cov))
    omega = build_omega(c)
    for a in range(len(c.objects)):
        for p in cov.sieves(a):
            for q in omega.elements[a]:
                if cov.covers(q):
                    continue
                if all(cov.covers(restrict_sieve(c, q, phi)) for phi in p.members):
                    violations.append(
                        Violation(
                            "T",
                            c.objects[a],
                            "{} is covered on {} but does not cover".format(
                                _render_sieve(c, q), _render_sieve(c, p)
                            ),
                        )
                    )
    return ValidationReport(not violations, violations)


def enumerate_coverages(c, cap=DEFAULT_SUBOBJECT_CAP):
    """
    Every subobject of Omega satisfying (C1) and (C2).
    """
    found = []
    for j in iter_subpresheaves(build_omega(c), cap):
        cov = coverage_from_subpresheaf(j)
        if check_lt_coverage(cov).valid:
            found.append(cov)
    log.info("%d coverages on a category with %d objects", len(found), len(c.objects))
    return found
