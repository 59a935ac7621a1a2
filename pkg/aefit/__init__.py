# SPDX-FileCopyrightText: 2024 aefit developers
#
# SPDX-License-Identifier: MIT

from aefit.api import *
from importlib import metadata

try:
    __version__ = metadata.version('aefit')
except metadata.PackageNotFoundError:
    __version__ = ''
