"""
Copyright (c) Meta Platforms, Inc. and affiliates.

This source code is licensed under the MIT license found in the
LICENSE file in the root directory of this source tree.
"""

from __future__ import absolute_import, division, print_function, unicode_literals

import pytest
from topos_lib import (
    Coverage,
    SieveMismatch,
    build_omega,
    check_lt_coverage,
    coverage_from_subpresheaf,
    double_negation_coverage,
    empty_sieve,
    enumerate_coverages,
    grothendieck_check,
    iter_subpresheaves,
    make_coverage,
    make_sieve,
    maximal_sieve,
    meet_coverages,
    restrict_sieve,
    terminal_category,
)

from .sites import CATEGORIES, COVERAGES, sierpinski


def test_omega_sizes():
    omega = build_omega(sierpinski())
    assert omega.sizes == (2, 3)


def test_omega_restricts_sieves():
    c = sierpinski()
    omega = build_omega(c)
    phi = c.mor("0_1")
    for k, p in enumerate(omega.elements[1]):
        assert omega.elements[0][omega.action[phi][k]] == restrict_sieve(c, p, phi)


def test_sieve_must_be_closed():
    c = sierpinski()
    with pytest.raises(SieveMismatch):
        make_sieve(c, c.obj("1"), [c.mor("id_1")])


def test_dense_coverage_on_sierpinski():
    c = sierpinski()
    cov = double_negation_coverage(c)
    assert cov.covers(make_sieve(c, c.obj("1"), [c.mor("0_1")]))
    assert cov.covers(maximal_sieve(c, c.obj("1")))
    assert not cov.covers(empty_sieve(c, c.obj("1")))
    assert cov.sieves(c.obj("0")) == [maximal_sieve(c, c.obj("0"))]


@pytest.mark.parametrize("name", sorted(COVERAGES))
@pytest.mark.parametrize("category_name", sorted(CATEGORIES))
def test_named_coverages_are_valid(name, category_name):
    c = CATEGORIES[category_name]()
    cov = COVERAGES[name](c)
    assert check_lt_coverage(cov).valid
    assert grothendieck_check(cov).valid


def test_missing_maximal_sieve():
    c = terminal_category()
    report = check_lt_coverage(Coverage(c, (frozenset(),)))
    assert not report.valid
    assert [v.law for v in report.violations] == ["C1"]


def test_locality_failure_is_reported_first():
    c = sierpinski()
    cov = make_coverage(c, [[[c.mor("id_0")]], [[]]])
    report = check_lt_coverage(cov)
    assert not report.valid
    assert report.violations[0].law == "L"


def test_transitivity_failure():
    c = sierpinski()
    # the empty sieve on 0 covers, so the empty sieve on 1 is covered along
    # {0_1} without covering
    cov = make_coverage(
        c,
        [[[c.mor("id_0")], []], [[c.mor("0_1")], [c.mor("id_1"), c.mor("0_1")]]],
    )
    assert not check_lt_coverage(cov).valid
    assert not grothendieck_check(cov).valid


@pytest.mark.parametrize("category_name", sorted(CATEGORIES))
def test_coverage_laws_agree(category_name):
    c = CATEGORIES[category_name]()
    for j in iter_subpresheaves(build_omega(c)):
        cov = coverage_from_subpresheaf(j)
        assert check_lt_coverage(cov).valid == grothendieck_check(cov).valid, cov.describe()


def test_coverage_counts():
    assert len(enumerate_coverages(terminal_category())) == 2
    # one per subset of the two points of the Sierpinski space
    assert len(enumerate_coverages(sierpinski())) == 4


def test_meet_of_coverages():
    c = sierpinski()
    found = enumerate_coverages(c)
    for j in found:
        for k in found:
            assert check_lt_coverage(meet_coverages(j, k)).valid
