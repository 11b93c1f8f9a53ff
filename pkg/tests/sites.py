"""
Copyright (c) Meta Platforms, Inc. and affiliates.

This source code is licensed under the MIT license found in the
LICENSE file in the root directory of this source tree.
"""

from __future__ import absolute_import, division, print_function, unicode_literals

import os

from topos_lib import (
    all_sieves_coverage,
    double_negation_coverage,
    monoid_category,
    poset_category,
    presheaf_from_tables,
    terminal_category,
    trivial_coverage,
)

FIXTURES = os.path.join(os.path.dirname(__file__), "fixtures")


def sierpinski():
    return poset_category(["0", "1"], [("0", "1")])


def idempotent_monoid():
    return monoid_category(["e"], {("e", "e"): "e"})


CATEGORIES = {
    "terminal": terminal_category,
    "sierpinski": sierpinski,
    "idempotent": idempotent_monoid,
}

COVERAGES = {
    "trivial": trivial_coverage,
    "dense": double_negation_coverage,
    "all": all_sieves_coverage,
}


def fixture_path(name):
    return os.path.join(FIXTURES, name)


def sierpinski_presheaf(top, bottom, restriction):
    """
    X(1) = top, X(0) = bottom, restriction along 0_1 given as a dict.
    """
    return presheaf_from_tables(sierpinski(), {"1": top, "0": bottom}, {"0_1": restriction})
