#!/usr/bin/env python3
"""
Copyright (c) Meta Platforms, Inc. and affiliates.

This source code is licensed under the MIT license found in the
LICENSE file in the root directory of this source tree.
"""

from __future__ import absolute_import, division, print_function, unicode_literals

from .constants import *  # noqa
from .fincat import *  # noqa
from .logic import *  # noqa
from .site import *  # noqa
from .closure import *  # noqa
from .powerobj import *  # noqa
from .sheafify import *  # noqa
from .smallmaps import *  # noqa
