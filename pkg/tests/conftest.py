"""
Copyright (c) Meta Platforms, Inc. and affiliates.

This source code is licensed under the MIT license found in the
LICENSE file in the root directory of this source tree.
"""

from __future__ import absolute_import, division, print_function, unicode_literals

import os

import pytest
from hypothesis import settings
from topos_lib import ClosureContext, all_sieves_coverage, double_negation_coverage

from .sites import CATEGORIES, COVERAGES, sierpinski

settings.register_profile("exhaustive", max_examples=500, deadline=None)
settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture(params=sorted(CATEGORIES))
def category(request):
    return CATEGORIES[request.param]()


@pytest.fixture(params=sorted(COVERAGES))
def site(request, category):
    return ClosureContext(category, COVERAGES[request.param](category))


@pytest.fixture
def dense_sierpinski():
    c = sierpinski()
    return ClosureContext(c, double_negation_coverage(c))


@pytest.fixture
def all_sierpinski():
    c = sierpinski()
    return ClosureContext(c, all_sieves_coverage(c))
