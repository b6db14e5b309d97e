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

"""Infrastructure for the 'divergence' command."""

import logging
import textwrap

from canontilt import distributions
from canontilt.cmdbase import BaseCommand, CommandError
from canontilt.commands import emit, log_table
from canontilt.divergence import scaled_divergence
from canontilt.utils import DistributionOption, SingleOptionEnsurer

logger = logging.getLogger(__name__)


class DivergenceCommand(BaseCommand):
    """Compare two laws."""

    name = "divergence"
    help_msg = "Compute the KL divergence and other distances between two laws"
    overview = textwrap.dedent(
        """
        Compute the Kullback-Leibler divergence KL(P || Q), the total variation
        distance, the Pinsker bound sqrt(KL / 2) and, for lattice laws, the
        largest difference of probability masses.

        With `--scale` the KL divergence is also reported multiplied by that
        factor (like n, to follow n KL as n grows).

        The laws must be of the same kind (both with a density or both on a
        lattice); the KL divergence is infinite when P puts mass where Q has
        none.
    """
    )
    param_names = ("p", "q", "scale")

    def fill_parser(self, parser):
        """Add own parameters to the general parser."""
        parser.add_argument(
            "--p", type=SingleOptionEnsurer(DistributionOption()), help="The first law, P"
        )
        parser.add_argument(
            "--q", type=SingleOptionEnsurer(DistributionOption()), help="The reference law, Q"
        )
        parser.add_argument(
            "--scale",
            type=SingleOptionEnsurer(float),
            help="Factor for the scaled KL divergence (default 1)",
        )

    def run(self, parsed_args):
        """Run the command."""
        params = self.resolve_params(parsed_args)
        if params.get("p") is None or params.get("q") is None:
            raise CommandError("The --p and --q options are required.")
        P = distributions.parse_distribution(params["p"])
        Q = distributions.parse_distribution(params["q"])
        scale = params.get("scale")
        divergence = scaled_divergence(P, Q, 1.0 if scale is None else scale)

        result = divergence.to_dict()
        result.update({"p": P.to_dict(), "q": Q.to_dict()})
        rows = [(name, value) for name, value in divergence.to_dict().items() if value is not None]
        logger.info("P: %s, Q: %s", P.label, Q.label)
        log_table(rows)
        emit(self, params, "divergence", result, ["metric", "value"], rows)
