"""
Copyright (c) Meta Platforms, Inc. and affiliates.

This source code is licensed under the MIT license found in the
LICENSE file in the root directory of this source tree.
"""

from __future__ import absolute_import, division, print_function, unicode_literals

from functools import lru_cache

from hypothesis import strategies as st
from topos_lib import iter_nat_trans, iter_presheaves, iter_subpresheaves, up_to_isomorphism

from .sites import CATEGORIES, COVERAGES


@lru_cache(maxsize=None)
def small_presheaves(category_name, max_size=2):
    return tuple(up_to_isomorphism(iter_presheaves(CATEGORIES[category_name](), max_size)))


def category_names():
    return st.sampled_from(sorted(CATEGORIES))


def coverage_names():
    return st.sampled_from(sorted(COVERAGES))


@st.composite
def presheaves(draw, category_name=None, max_size=2):
    name = category_name or draw(category_names())
    return draw(st.sampled_from(small_presheaves(name, max_size)))


@st.composite
def subobjects(draw, x, n=1):
    found = tuple(iter_subpresheaves(x))
    return tuple(draw(st.sampled_from(found)) for _ in range(n))


@st.composite
def maps_between(draw, x, y):
    found = tuple(iter_nat_trans(x, y))
    if not found:
        return None
    return draw(st.sampled_from(found))
