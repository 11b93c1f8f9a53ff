"""
Copyright (c) Meta Platforms, Inc. and affiliates.

This source code is licensed under the MIT license found in the
LICENSE file in the root directory of this source tree.
"""

from __future__ import absolute_import, division, print_function, unicode_literals

import logging

import pytest
from topos_lib import (
    ClosureContext,
    ExponentialWitness,
    InvalidWitness,
    NotASheaf,
    PowerObjectTooLarge,
    bottom,
    compare_with_oracle,
    compose,
    check_left_exactness,
    close,
    default_battery,
    diagonal,
    double_plus_oracle,
    exponential_agrees,
    extend_along_dense,
    factor_through_unit,
    implication,
    is_closed,
    is_dense_map,
    is_separated,
    is_sheaf,
    iter_nat_trans,
    iter_subpresheaves,
    kernel_pair,
    make_subpresheaf,
    pj_object,
    plus_construction,
    product,
    sheaf_exists_along,
    sheaf_exponential,
    sheaf_failures,
    sheafify,
    sheafify_map,
    terminal_presheaf,
    to_terminal,
    top,
)

from .sites import CATEGORIES, COVERAGES, sierpinski_presheaf
from .strategies import small_presheaves

log = logging.getLogger(__name__)

CONSTANT_TWO = (["a", "b"], ["c", "d"], {"a": "c", "b": "d"})
COLLAPSING = (["a", "b"], ["c"], {"a": "c", "b": "c"})


def _context(category_name, coverage_name):
    c = CATEGORIES[category_name]()
    return ClosureContext(c, COVERAGES[coverage_name](c))


def _sheaves(ctx, category_name):
    return [x for x in small_presheaves(category_name) if is_sheaf(ctx, x)]


class TestSheafCondition:
    def test_dense_sheaves_on_sierpinski(self, dense_sierpinski):
        assert is_sheaf(dense_sierpinski, sierpinski_presheaf(*CONSTANT_TWO))
        assert not is_sheaf(dense_sierpinski, sierpinski_presheaf(*COLLAPSING))
        assert is_separated(dense_sierpinski, sierpinski_presheaf(["a"], ["c", "d"], {"a": "c"}))
        assert len(_sheaves(dense_sierpinski, "sierpinski")) == 3

    def test_failures_name_the_sieve(self, dense_sierpinski):
        failures = sheaf_failures(dense_sierpinski, sierpinski_presheaf(*COLLAPSING))
        assert failures
        c = dense_sierpinski.category
        for a, p, _, n in failures:
            assert c.objects[a] == "1"
            assert n == 2

    def test_only_terminal_under_all(self, all_sierpinski):
        assert _sheaves(all_sierpinski, "sierpinski") == [
            x for x in small_presheaves("sierpinski") if x.sizes == (1, 1)
        ]


class TestAssociatedSheaf:
    def test_agrees_with_plus_construction(self):
        checked = skipped = 0
        for category_name in sorted(CATEGORIES):
            for coverage_name in sorted(COVERAGES):
                ctx = _context(category_name, coverage_name)
                for x in small_presheaves(category_name):
                    try:
                        result = sheafify(ctx, x)
                    except PowerObjectTooLarge:
                        skipped += 1
                        continue
                    checked += 1
                    assert is_sheaf(ctx, result.sheaf)
                    assert compare_with_oracle(ctx, x) is not None
        log.info("%d checked, %d skipped", checked, skipped)
        assert checked >= 20

    def test_constant_two_collapses_under_all(self, all_sierpinski):
        result = sheafify(all_sierpinski, sierpinski_presheaf(*CONSTANT_TWO))
        assert result.sheaf.sizes == (1, 1)

    def test_constant_two_is_a_dense_sheaf(self, dense_sierpinski):
        x = sierpinski_presheaf(*CONSTANT_TWO)
        assert sheafify(dense_sierpinski, x).unit.is_iso()

    def test_separates_the_collapsing_map(self, dense_sierpinski):
        result = sheafify(dense_sierpinski, sierpinski_presheaf(*COLLAPSING))
        assert result.sheaf.sizes == (1, 1)
        assert result.unit.is_epi()

    def test_adds_missing_amalgamations(self, dense_sierpinski):
        result = sheafify(dense_sierpinski, sierpinski_presheaf([], ["c"], {}))
        assert result.sheaf.sizes == (1, 1)
        assert result.unit.is_mono()

    def test_plus_twice_on_a_sheaf(self, dense_sierpinski):
        x = sierpinski_presheaf(*CONSTANT_TWO)
        plus = plus_construction(dense_sierpinski, x)
        assert plus.unit.is_iso()

    def test_double_plus_collapses(self, dense_sierpinski):
        oracle = double_plus_oracle(dense_sierpinski, sierpinski_presheaf(*COLLAPSING))
        assert oracle.presheaf.sizes == (1, 1)
        assert is_sheaf(dense_sierpinski, oracle.presheaf)
        assert oracle.unit.is_epi()


class TestUniversalProperty:
    @pytest.mark.parametrize("coverage_name", ["dense", "all", "trivial"])
    def test_unique_factorisation(self, coverage_name):
        ctx = _context("sierpinski", coverage_name)
        sheaves = _sheaves(ctx, "sierpinski")
        for x in small_presheaves("sierpinski"):
            result = sheafify(ctx, x)
            for y in sheaves:
                for f in iter_nat_trans(x, y):
                    through = [
                        g for g in iter_nat_trans(result.sheaf, y)
                        if compose(g, result.unit).components == f.components
                    ]
                    assert len(through) == 1
                    assert factor_through_unit(ctx, result, f) == through[0]

    def test_kernel_of_the_unit(self, dense_sierpinski):
        for x in small_presheaves("sierpinski"):
            result = sheafify(dense_sierpinski, x)
            closed_diagonal = close(dense_sierpinski, diagonal(x))
            assert kernel_pair(result.unit) == closed_diagonal
            assert kernel_pair(result.sigma) == closed_diagonal

    def test_closed_subobjects_of_sheaves_are_sheaves(self, dense_sierpinski):
        for x in _sheaves(dense_sierpinski, "sierpinski"):
            for s in iter_subpresheaves(x):
                assert is_sheaf(dense_sierpinski, s.as_presheaf) == is_closed(dense_sierpinski, s)

    def test_maps_are_functorial(self, dense_sierpinski):
        x = sierpinski_presheaf(*COLLAPSING)
        one = terminal_presheaf(x.category)
        f = to_terminal(x)
        af = sheafify_map(dense_sierpinski, f)
        assert af.target == sheafify(dense_sierpinski, one).sheaf
        assert compose(af, sheafify(dense_sierpinski, x).unit) == compose(
            sheafify(dense_sierpinski, one).unit, f
        )

    def test_extension_needs_a_sheaf(self, dense_sierpinski):
        y = sierpinski_presheaf(["a"], ["c"], {"a": "c"})
        (m,) = [s for s in iter_subpresheaves(y) if s.sizes() == (1, 0)]
        target = sierpinski_presheaf(*COLLAPSING)
        (v,) = [g for g in iter_nat_trans(m.as_presheaf, target)]
        with pytest.raises(NotASheaf):
            extend_along_dense(dense_sierpinski, m, v)


@pytest.mark.slow
def test_left_exactness(dense_sierpinski):
    objects = list(small_presheaves("sierpinski", 1)) + [sierpinski_presheaf(*COLLAPSING)]
    maps = [f for x in objects for y in objects for f in iter_nat_trans(x, y)]
    battery = default_battery(objects, maps)
    assert len(battery) >= 10
    checks = check_left_exactness(dense_sierpinski, battery)
    assert [c.name for c in checks if not c.preserved] == []


class TestSheafExponentials:
    @pytest.mark.slow
    def test_agrees_with_presheaf_exponential(self, dense_sierpinski):
        sheaves = _sheaves(dense_sierpinski, "sierpinski")
        pairs = [(x, y) for x in sheaves for y in sheaves]
        assert len(pairs) >= 5
        for x, y in pairs:
            assert exponential_agrees(dense_sierpinski, x, y)

    def test_needs_sheaves(self, dense_sierpinski):
        x = sierpinski_presheaf(*COLLAPSING)
        with pytest.raises(NotASheaf):
            sheaf_exponential(dense_sierpinski, x, x)

    def test_rejects_non_dense_witness(self, dense_sierpinski):
        x = sierpinski_presheaf(*CONSTANT_TWO)
        one = terminal_presheaf(x.category)
        witness = ExponentialWitness(one, bottom(product(one, x)))
        with pytest.raises(InvalidWitness):
            sheaf_exponential(dense_sierpinski, x, x, witness)


def test_sheaf_image_is_closed(dense_sierpinski):
    x = sierpinski_presheaf([], ["c"], {})
    y = sierpinski_presheaf(*CONSTANT_TWO)
    for f in iter_nat_trans(x, y):
        image = sheaf_exists_along(dense_sierpinski, f, top(x))
        assert is_closed(dense_sierpinski, image)
        assert image.sizes() == (1, 1)


def _witness(stage_one):
    """
    B = X = constant two and S dense in B x X, full at 0 and holding the
    listed pairs of element indices at 1.
    """
    x = sierpinski_presheaf(*CONSTANT_TWO)
    bx = product(x, x)
    at_one = frozenset(bx.index(1, pair) for pair in stage_one)
    return x, ExponentialWitness(x, make_subpresheaf(bx, (frozenset(range(bx.size(0))), at_one)))


def test_exponential_from_a_proper_dense_family(dense_sierpinski):
    x, witness = _witness(())
    assert witness.family != top(witness.family.parent)
    assert exponential_agrees(dense_sierpinski, x, x, witness)
    assert sheaf_exponential(dense_sierpinski, x, x, witness).sizes == (4, 4)


@pytest.mark.slow
def test_exponential_from_every_dense_family(dense_sierpinski):
    pairs = [(i, j) for i in range(2) for j in range(2)]
    proper = [
        [p for k, p in enumerate(pairs) if mask >> k & 1] for mask in range(1 << len(pairs)) if mask != 15
    ]
    assert len(proper) == 15
    for stage_one in proper:
        x, witness = _witness(stage_one)
        assert exponential_agrees(dense_sierpinski, x, x, witness)


SITES = [(cat, cov) for cat in sorted(CATEGORIES) for cov in sorted(COVERAGES)]


@pytest.mark.parametrize("category_name, coverage_name", SITES)
class TestSheafSurvey:
    def test_sheaf_epis_are_dense_maps(self, category_name, coverage_name):
        ctx = _context(category_name, coverage_name)
        sheaves = _sheaves(ctx, category_name)
        omega_j = pj_object(ctx, terminal_presheaf(ctx.category)).presheaf
        testers = sheaves + [omega_j]
        for e in sheaves:
            for f_target in sheaves:
                for f in iter_nat_trans(e, f_target):
                    epi = True
                    for g_target in testers:
                        maps = list(iter_nat_trans(f_target, g_target))
                        for g in maps:
                            for h in maps:
                                if g != h and compose(g, f) == compose(h, f):
                                    epi = False
                    assert epi == is_dense_map(ctx, f)

    def test_implication_into_closed_is_closed(self, category_name, coverage_name):
        ctx = _context(category_name, coverage_name)
        for x in small_presheaves(category_name):
            subs = list(iter_subpresheaves(x))
            closed = [t for t in subs if is_closed(ctx, t)]
            for s in subs:
                for t in closed:
                    assert is_closed(ctx, implication(s, t))

    def test_kernel_of_unit_after_a_map(self, category_name, coverage_name):
        ctx = _context(category_name, coverage_name)
        found = small_presheaves(category_name)
        for x in found:
            for y in found:
                unit = sheafify(ctx, y).unit
                for q in iter_nat_trans(x, y):
                    assert kernel_pair(compose(unit, q)) == close(ctx, kernel_pair(q))

    def test_units_are_dense(self, category_name, coverage_name):
        ctx = _context(category_name, coverage_name)
        for x in small_presheaves(category_name):
            assert is_dense_map(ctx, sheafify(ctx, x).unit)

    def test_sheafification_preserves_dense_maps(self, category_name, coverage_name):
        ctx = _context(category_name, coverage_name)
        found = small_presheaves(category_name)
        for x in found:
            for y in found:
                for f in iter_nat_trans(x, y):
                    if is_dense_map(ctx, f):
                        assert is_dense_map(ctx, sheafify_map(ctx, f))
