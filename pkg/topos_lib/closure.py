"""
Copyright (c) Meta Platforms, Inc. and affiliates.

This source code is licensed under the MIT license found in the
LICENSE file in the root directory of this source tree.
"""

from __future__ import absolute_import, division, print_function, unicode_literals

import logging
import threading
from collections import namedtuple

from topos_lib.constants import DEFAULT_STAGE_CAP
from topos_lib.fincat import (
    NatTrans,
    Subpresheaf,
    image_factorization,
    product,
    square_comparison,
)
from topos_lib.logic import (
    Atom,
    Exists,
    Implies,
    And,
    ParentMismatch,
    Var,
    as_subobject_of,
    diagonal,
    evaluate,
    kernel_pair,
    le,
    top,
)
from topos_lib.site import Sieve, build_omega, truth_subobject

log = logging.getLogger(__name__)


class NotDense(Exception):
    """
    Subobject or map is not dense for the active coverage
    """

    pass


class ClosureContext(object):
    """
    A category with a coverage, plus a memo table shared by the closure,
    power object and sheafification operations. The memo table is the only
    mutable state and every access goes through the lock.
    """

    def __init__(self, category, coverage, cap=DEFAULT_STAGE_CAP):
        if coverage.category != category:
            raise ParentMismatch("coverage lives over another category")
        self.category = category
        self.coverage = coverage
        self.cap = cap
        self._memo = {}
        self._lock = threading.Lock()

    def memoized(self, key, compute):
        with self._lock:
            if key in self._memo:
                return self._memo[key]
        value = compute()
        with self._lock:
            return self._memo.setdefault(key, value)

    def clear(self):
        with self._lock:
            self._memo.clear()

    def close(self, s):
        return close(self, s)


def covering_sieve_of(c, x, s, a, i):
    """
    The sieve of morphisms along which element i of X(a) restricts into s.
    """
    return Sieve(
        a, frozenset(phi for phi in c.arrows_into[a] if x.action[phi][i] in s.selection[c.dom[phi]])
    )


def _close(ctx, s):
    x = s.parent
    c = x.category
    if c != ctx.category:
        raise ParentMismatch("subobject lives over another category")
    covering = ctx.coverage.covering
    selection = []
    for a in range(len(c.objects)):
        selection.append(
            frozenset(
                i for i in range(x.size(a)) if covering_sieve_of(c, x, s, a, i) in covering[a]
            )
        )
    return Subpresheaf(x, tuple(selection))


def close(ctx, s):
    """
    C(s)(a) = {x in X(a) | the sieve {phi | X(phi)(x) in s} covers a}
    """
    return ctx.memoized(("close", s), lambda: _close(ctx, s))


def close_by_formula(ctx, s):
    """
    Closure from its internal definition
    x in C(s) iff exists p (J(p) and (T(p) => x in s)).
    Slower than close; kept as an independent check.
    """
    x = s.parent
    c = ctx.category
    omega = build_omega(c)
    j = ctx.coverage.as_subpresheaf()
    t = truth_subobject(c)
    vx, vp = Var("x", x), Var("p", omega)
    phi = Exists(vp, And(Atom(j, (vp,)), Implies(Atom(t, (vp,)), Atom(s, (vx,)))))
    return as_subobject_of(x, evaluate(phi, (vx,)))


def is_closed(ctx, s):
    return close(ctx, s) == s


def is_dense_mono(ctx, s):
    return close(ctx, s) == top(s.parent)


def is_dense_map(ctx, f):
    _, image = image_factorization(f)
    return is_dense_mono(ctx, image)


def is_codense(ctx, f):
    """
    Kernel pair of f inside the closed diagonal.
    """
    return le(kernel_pair(f), close(ctx, diagonal(f.source)))


Factorization = namedtuple("Factorization", ["intermediate", "mono", "epi"])


def small_dense_factorization(ctx, m):
    """
    Factors a dense mono B >-> A as B >-> B' ->> A with
    B'(c) = {(p, a) | p covers c and A(phi)(a) in B for every phi in p}.

    @return Factorization with B' as a subobject of Omega x A
    @raise NotDense
    """
    if not is_dense_mono(ctx, m):
        raise NotDense("subobject is not dense")
    c = ctx.category
    a_presheaf = m.parent
    omega = build_omega(c)
    oa = product(omega, a_presheaf)
    covering = ctx.coverage.covering
    selection = []
    for stage, labels in enumerate(oa.elements):
        keep = set()
        for k, (ip, ia) in enumerate(labels):
            p = omega.elements[stage][ip]
            if p not in covering[stage]:
                continue
            if all(a_presheaf.action[phi][ia] in m.selection[c.dom[phi]] for phi in p.members):
                keep.add(k)
        selection.append(frozenset(keep))
    b_prime = Subpresheaf(oa, tuple(selection))
    bp = b_prime.as_presheaf
    b = m.as_presheaf
    top_index = [omega.index(stage, Sieve(stage, frozenset(c.arrows_into[stage]))) for stage in range(len(c.objects))]
    mono = NatTrans(
        b,
        bp,
        tuple(
            tuple(bp.index(stage, (top_index[stage], ia)) for ia in sorted(m.selection[stage]))
            for stage in range(len(c.objects))
        ),
    )
    epi = NatTrans(
        bp, a_presheaf, tuple(tuple(label[1] for label in labels) for labels in bp.elements)
    )
    return Factorization(b_prime, mono, epi)


def is_local_quasi_pullback(ctx, square):
    """
    A commuting square whose comparison map into the pullback is dense.

    @raise DiagramDoesNotCommute
    """
    return is_dense_map(ctx, square_comparison(square))
