"""
Copyright (c) Meta Platforms, Inc. and affiliates.

This source code is licensed under the MIT license found in the
LICENSE file in the root directory of this source tree.
"""

from __future__ import absolute_import, division, print_function, unicode_literals

import pytest
from topos_lib import (
    ClosureContext,
    NotDense,
    ParentMismatch,
    Square,
    close,
    close_by_formula,
    compose,
    identity_map,
    is_closed,
    is_codense,
    is_dense_map,
    is_dense_mono,
    is_local_quasi_pullback,
    is_quasi_pullback,
    iter_nat_trans,
    iter_subpresheaves,
    le,
    meet,
    pullback_sub,
    small_dense_factorization,
    to_terminal,
    trivial_coverage,
)

from .sites import CATEGORIES, COVERAGES, sierpinski, sierpinski_presheaf
from .strategies import small_presheaves


def _context(category_name, coverage_name):
    c = CATEGORIES[category_name]()
    return ClosureContext(c, COVERAGES[coverage_name](c))


SITES = [(cat, cov) for cat in sorted(CATEGORIES) for cov in sorted(COVERAGES)]


def _pairs(subs):
    return ((s, t) for s in subs for t in subs)


@pytest.mark.parametrize("category_name, coverage_name", SITES)
class TestClosureLaws:
    def test_inflationary_and_idempotent(self, category_name, coverage_name):
        ctx = _context(category_name, coverage_name)
        for x in small_presheaves(category_name, 3):
            for s in iter_subpresheaves(x):
                closed = close(ctx, s)
                assert le(s, closed)
                assert close(ctx, closed) == closed

    def test_monotone_and_meet_preserving(self, category_name, coverage_name):
        ctx = _context(category_name, coverage_name)
        for x in small_presheaves(category_name, 3):
            for s, t in _pairs(list(iter_subpresheaves(x))):
                if le(s, t):
                    assert le(close(ctx, s), close(ctx, t))
                assert close(ctx, meet(s, t)) == meet(close(ctx, s), close(ctx, t))

    def test_matches_internal_definition(self, category_name, coverage_name):
        ctx = _context(category_name, coverage_name)
        for x in small_presheaves(category_name, 2):
            for s in iter_subpresheaves(x):
                assert close(ctx, s) == close_by_formula(ctx, s)

    def test_natural_in_the_base(self, category_name, coverage_name):
        ctx = _context(category_name, coverage_name)
        found = small_presheaves(category_name, 2)
        for x in found:
            for y in found:
                subs = list(iter_subpresheaves(y))
                for f in iter_nat_trans(x, y):
                    for t in subs:
                        assert close(ctx, pullback_sub(f, t)) == pullback_sub(f, close(ctx, t))


def test_trivial_coverage_closes_nothing():
    c = sierpinski()
    ctx = ClosureContext(c, trivial_coverage(c))
    x = sierpinski_presheaf(["a", "b"], ["c"], {"a": "c", "b": "c"})
    for s in iter_subpresheaves(x):
        assert is_closed(ctx, s)


def test_dense_closure_on_sierpinski(dense_sierpinski):
    # {c} at 0 alone is dense in the representable y(1)
    x = sierpinski_presheaf(["a"], ["c"], {"a": "c"})
    subs = [s for s in iter_subpresheaves(x) if s.sizes() == (1, 0)]
    assert is_dense_mono(dense_sierpinski, subs[0])
    assert not is_closed(dense_sierpinski, subs[0])


def test_context_checks_category(dense_sierpinski):
    other = CATEGORIES["terminal"]()
    with pytest.raises(ParentMismatch):
        ClosureContext(other, dense_sierpinski.coverage)


def test_dense_maps(dense_sierpinski):
    x = sierpinski_presheaf([], ["c"], {})
    y = sierpinski_presheaf(["a"], ["c"], {"a": "c"})
    (f,) = list(iter_nat_trans(x, y))
    assert is_dense_map(dense_sierpinski, f)
    assert not f.is_epi()
    assert is_codense(dense_sierpinski, f)


def test_codense_fails_for_distinct_points(dense_sierpinski):
    x = sierpinski_presheaf(["a", "b"], ["c", "d"], {"a": "c", "b": "d"})
    assert not is_codense(dense_sierpinski, to_terminal(x))


def test_small_dense_factorization(dense_sierpinski):
    y = sierpinski_presheaf(["a"], ["c"], {"a": "c"})
    (m,) = [s for s in iter_subpresheaves(y) if s.sizes() == (1, 0)]
    fact = small_dense_factorization(dense_sierpinski, m)
    assert fact.epi.is_epi()
    assert fact.mono.is_mono()
    assert fact.epi.target == y


def test_factorization_needs_dense(dense_sierpinski):
    y = sierpinski_presheaf(["a"], ["c"], {"a": "c"})
    (m,) = [s for s in iter_subpresheaves(y) if s.sizes() == (0, 0)]
    with pytest.raises(NotDense):
        small_dense_factorization(dense_sierpinski, m)


def test_local_quasi_pullback(dense_sierpinski):
    # a mono over itself is a pullback; f against the identity of Y is only
    # a pullback up to a dense comparison
    x = sierpinski_presheaf([], ["c"], {})
    y = sierpinski_presheaf(["a"], ["c"], {"a": "c"})
    (f,) = list(iter_nat_trans(x, y))
    square = Square(identity_map(x), identity_map(x), f, f)
    assert is_local_quasi_pullback(dense_sierpinski, square)
    top_square = Square(f, f, identity_map(y), identity_map(y))
    assert is_local_quasi_pullback(dense_sierpinski, top_square)
    assert not is_quasi_pullback(top_square)


def test_exhaustive_families_are_complete():
    assert len(small_presheaves("sierpinski", 3)) == 18
    assert len(small_presheaves("terminal", 3)) == 4


@pytest.mark.parametrize("category_name, coverage_name", SITES)
class TestDenseMaps:
    def test_dense_monos_are_pullback_stable(self, category_name, coverage_name):
        ctx = _context(category_name, coverage_name)
        found = small_presheaves(category_name, 2)
        for y in found:
            dense = [m for m in iter_subpresheaves(y) if is_dense_mono(ctx, m)]
            for x in found:
                for f in iter_nat_trans(x, y):
                    for m in dense:
                        assert is_dense_mono(ctx, pullback_sub(f, m))

    def test_dense_maps_compose(self, category_name, coverage_name):
        ctx = _context(category_name, coverage_name)
        found = small_presheaves(category_name, 2)
        dense = {
            (x, y): [f for f in iter_nat_trans(x, y) if is_dense_map(ctx, f)] for x in found for y in found
        }
        for x in found:
            for y in found:
                for z in found:
                    for f in dense[(x, y)]:
                        for g in dense[(y, z)]:
                            assert is_dense_map(ctx, compose(g, f))

    def test_factorization_mono_is_dense(self, category_name, coverage_name):
        ctx = _context(category_name, coverage_name)
        for a in small_presheaves(category_name, 2):
            for m in iter_subpresheaves(a):
                if not is_dense_mono(ctx, m):
                    continue
                fact = small_dense_factorization(ctx, m)
                assert fact.mono.is_mono()
                assert is_dense_map(ctx, fact.mono)
                assert fact.epi.is_epi()
                assert compose(fact.epi, fact.mono) == m.inclusion


PASTING = (
    sierpinski_presheaf([], ["c"], {}),
    sierpinski_presheaf(["a"], ["c"], {"a": "c"}),
    sierpinski_presheaf(["a", "b"], ["c"], {"a": "c", "b": "c"}),
)


def _local_squares(ctx, right, bottom):
    """
    Every local quasi-pullback over the cospan right, bottom with apex in PASTING.
    """
    for y in PASTING:
        for top in iter_nat_trans(y, right.source):
            for left in iter_nat_trans(y, bottom.source):
                if compose(right, top) != compose(bottom, left):
                    continue
                square = Square(top, left, right, bottom)
                if is_local_quasi_pullback(ctx, square):
                    yield square


def test_local_quasi_pullbacks_paste(dense_sierpinski):
    ctx = dense_sierpinski
    pasted = 0
    for a in PASTING:
        for x in PASTING:
            for b in PASTING:
                for right in iter_nat_trans(x, a):
                    for bottom in iter_nat_trans(b, a):
                        for inner in _local_squares(ctx, right, bottom):
                            for c in PASTING:
                                for below in iter_nat_trans(c, b):
                                    for outer in _local_squares(ctx, inner.left, below):
                                        whole = Square(
                                            compose(inner.top, outer.top),
                                            outer.left,
                                            right,
                                            compose(bottom, below),
                                        )
                                        assert is_local_quasi_pullback(ctx, whole)
                                        pasted += 1
    assert pasted > 0

