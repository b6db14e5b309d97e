# Copyright 2022 Canonical Ltd.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
# http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.


"""Infrastructure for the 'version' command."""

import logging

import numpy
import pydantic
import scipy

from canontilt import __version__
from canontilt.cmdbase import BaseCommand

logger = logging.getLogger(__name__)

_overview = """
Show canontilt version.

The output has the format X.Y.Z[+N.gHASH[.dirty]], the part after the
plus sign being present only when running from a git checkout (commits
after the last release, the last commit's hash, and if the tree has
modifications).

With --verbose the versions of the numerical stack are shown too, as
results may change slightly between them.
"""


class VersionCommand(BaseCommand):
    """Show the canontilt version."""

    name = "version"
    help_msg = "Show canontilt version"
    overview = _overview

    def run(self, parsed_args):
        """Run the command."""
        logger.info("%s", __version__)
        for module in (numpy, scipy, pydantic):
            logger.debug("%s %s", module.__name__, getattr(module, "__version__", "unknown"))
