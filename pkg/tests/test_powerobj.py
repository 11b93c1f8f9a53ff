"""
Copyright (c) Meta Platforms, Inc. and affiliates.

This source code is licensed under the MIT license found in the
LICENSE file in the root directory of this source tree.
"""

from __future__ import absolute_import, division, print_function, unicode_literals

import pytest
from hypothesis import given, strategies as st
from topos_lib import (
    ClosureContext,
    NotAdmitted,
    NotClosed,
    PowerObjectTooLarge,
    build_omega,
    classify,
    classify_closed,
    close,
    compose,
    double_negation_coverage,
    family_of,
    find_isomorphism,
    find_local_smallness_witness,
    image_adjunction_holds,
    is_closed,
    is_closed_small,
    is_locally_small,
    is_sheaf,
    iter_nat_trans,
    iter_subpresheaves,
    pj_by_quotient,
    pj_object,
    power_object,
    product,
    terminal_presheaf,
    to_terminal,
    trivial_coverage,
)

from .sites import sierpinski, sierpinski_presheaf
from .strategies import presheaves, small_presheaves


def test_power_of_terminal_is_omega():
    c = sierpinski()
    power = power_object(terminal_presheaf(c))
    assert find_isomorphism(power.presheaf, build_omega(c)) is not None


def test_stage_cap():
    x = sierpinski_presheaf(["a", "b"], ["c", "d"], {"a": "c", "b": "d"})
    with pytest.raises(PowerObjectTooLarge):
        power_object(x, cap=3)


def test_admit_must_be_restriction_stable():
    c = sierpinski()
    one = terminal_presheaf(c)
    whole_at_0 = frozenset([(c.mor("id_0"), 0)])

    def admit(stage, relation):
        return relation != whole_at_0

    with pytest.raises(NotAdmitted):
        power_object(one, admit=admit)


@given(presheaves("sierpinski", 1), presheaves("sierpinski", 1), st.data())
def test_classifying_maps_recover_families(a, x, data):
    power = power_object(x)
    s = data.draw(st.sampled_from(list(iter_subpresheaves(product(a, x)))))
    chi = classify(a, x, s, power)
    assert chi.is_natural()
    assert family_of(chi, x, power.membership) == s


@given(presheaves("sierpinski", 1), presheaves("sierpinski", 1))
def test_families_and_maps_are_in_bijection(a, x):
    power = power_object(x)
    families = {family_of(chi, x, power.membership) for chi in iter_nat_trans(a, power.presheaf)}
    assert families == set(iter_subpresheaves(product(a, x)))


class TestClosedPowerObject:
    @given(presheaves("sierpinski", 1))
    def test_quotient_agrees(self, x):
        c = x.category
        ctx = ClosureContext(c, double_negation_coverage(c))
        pj = pj_object(ctx, x)
        q = pj_by_quotient(ctx, x)
        assert find_isomorphism(pj.presheaf, q.presheaf) is not None
        assert pj.quotient.is_epi()

    def test_trivial_coverage_keeps_everything(self):
        c = sierpinski()
        ctx = ClosureContext(c, trivial_coverage(c))
        x = sierpinski_presheaf(["a"], ["c"], {"a": "c"})
        assert pj_object(ctx, x).presheaf == power_object(x).presheaf

    def test_closed_classification(self, dense_sierpinski):
        x = sierpinski_presheaf(["a"], ["c"], {"a": "c"})
        a = terminal_presheaf(x.category)
        for s in iter_subpresheaves(product(a, x)):
            if is_closed(dense_sierpinski, s):
                chi = classify_closed(dense_sierpinski, a, x, s)
                pj = pj_object(dense_sierpinski, x)
                assert chi.target == pj.presheaf
                assert family_of(chi, x, pj.membership) == s
            else:
                with pytest.raises(NotClosed):
                    classify_closed(dense_sierpinski, a, x, s)

    def test_closure_of_membership(self, dense_sierpinski):
        x = sierpinski_presheaf(["a"], ["c"], {"a": "c"})
        power = power_object(x)
        assert not is_closed(dense_sierpinski, power.membership)
        assert is_closed(dense_sierpinski, close(dense_sierpinski, power.membership))


class TestSmallness:
    @given(presheaves("sierpinski"), presheaves("sierpinski"), st.data())
    def test_everything_is_small_without_covers(self, x, y, data):
        c = x.category
        ctx = ClosureContext(c, trivial_coverage(c))
        found = list(iter_nat_trans(x, y))
        if not found:
            return
        f = data.draw(st.sampled_from(found))
        assert is_locally_small(ctx, f)
        assert is_closed_small(ctx, f)

    @given(presheaves("sierpinski", 1), presheaves("sierpinski", 1), st.data())
    def test_closed_small_maps_are_locally_small(self, x, y, data):
        c = x.category
        ctx = ClosureContext(c, double_negation_coverage(c))
        found = list(iter_nat_trans(x, y))
        if not found:
            return
        f = data.draw(st.sampled_from(found))
        if is_closed_small(ctx, f):
            assert is_locally_small(ctx, f)

    def test_local_smallness_witness(self, dense_sierpinski):
        x = sierpinski_presheaf(["a", "b"], ["c", "d"], {"a": "c", "b": "d"})
        f = to_terminal(x)
        assert is_locally_small(dense_sierpinski, f)
        witness = find_local_smallness_witness(dense_sierpinski, f, [f.target])
        assert witness is not None
        assert witness.cover.is_epi()

    def test_no_witness_when_the_family_refuses(self, dense_sierpinski):
        x = sierpinski_presheaf(["a"], ["c"], {"a": "c"})
        f = to_terminal(x)
        assert find_local_smallness_witness(dense_sierpinski, f, [f.target], family=lambda leg: False) is None


@pytest.mark.parametrize("k", range(len(small_presheaves("sierpinski", 1))))
def test_image_adjunction(k):
    x = small_presheaves("sierpinski", 1)[k]
    for y in small_presheaves("sierpinski", 1):
        for f in iter_nat_trans(x, y):
            assert image_adjunction_holds(f)
            assert compose(to_terminal(y), f) == to_terminal(x)


class TestClosedBijection:
    def test_pj_is_a_sheaf_with_closed_membership(self, dense_sierpinski):
        for x in small_presheaves("sierpinski", 2):
            pj = pj_object(dense_sierpinski, x)
            assert is_sheaf(dense_sierpinski, pj.presheaf)
            assert is_closed(dense_sierpinski, pj.membership)

    def test_closed_families_and_maps_are_in_bijection(self, dense_sierpinski):
        ctx = dense_sierpinski
        checked = 0
        for a in small_presheaves("sierpinski", 1):
            for x in small_presheaves("sierpinski", 1):
                pj = pj_object(ctx, x)
                families = [family_of(chi, x, pj.membership) for chi in iter_nat_trans(a, pj.presheaf)]
                closed = {s for s in iter_subpresheaves(product(a, x)) if is_closed(ctx, s)}
                assert len(families) == len(set(families))
                assert set(families) == closed
                for s in closed:
                    assert family_of(classify_closed(ctx, a, x, s), x, pj.membership) == s
                checked += 1
        assert checked == 9
