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

"""Infrastructure for the 'ratefn' command."""

import logging
import math
import textwrap

import numpy as np

from canontilt import distributions
from canontilt.cmdbase import BaseCommand, CommandError
from canontilt.commands import as_window, emit, log_table
from canontilt.ldp import (
    ldp_tilt_param,
    maxent_ldp_equivalence,
    rate_function,
    reciprocity_check,
)
from canontilt.utils import DistributionOption, RangeOption, SingleOptionEnsurer, WindowOption

logger = logging.getLogger(__name__)

DEFAULT_COUNT = 50

# how many standard deviations around the mean the default range covers
DEFAULT_SPREAD = 3.0


def default_range(rf):
    """Return mean +- 3 sd, kept strictly inside the domain of the rate function."""
    sd = math.sqrt(rf.variance)
    margin = 1e-3 * sd
    lower = max(rf.mean - DEFAULT_SPREAD * sd, rf.domain[0] + margin)
    upper = min(rf.mean + DEFAULT_SPREAD * sd, rf.domain[1] - margin)
    return [lower, upper, DEFAULT_COUNT]


class RateFunctionCommand(BaseCommand):
    """Tabulate the rate function of a law."""

    name = "ratefn"
    help_msg = "Tabulate the large deviation rate function of a law"
    overview = textwrap.dedent(
        """
        Tabulate the Cramer rate function of a law (the Legendre transform of
        its log moment generating function) with its first two derivatives.

        The points are given with `--range LO,HI,COUNT`; by default 50 points
        over the mean plus or minus three standard deviations, kept inside the
        support hull. The report includes the worst residual of the reciprocal
        relations between the rate function and the log moment generating
        function over those points.

        With `--window H,DELTA` (a window not containing the mean) it also
        reports the point y* of the window where the rate is smallest, the tilt
        parameter -phi'(y*), and how well it agrees with the maximum entropy
        parameter for the mean y*.
    """
    )
    param_names = ("dist", "range", "window")

    def fill_parser(self, parser):
        """Add own parameters to the general parser."""
        parser.add_argument(
            "--dist", type=SingleOptionEnsurer(DistributionOption()), help="The law"
        )
        parser.add_argument(
            "--range",
            type=SingleOptionEnsurer(RangeOption()),
            help="Where to tabulate: LO,HI,COUNT",
        )
        parser.add_argument(
            "--window",
            type=SingleOptionEnsurer(WindowOption()),
            help="The large deviation window H,DELTA",
        )

    def run(self, parsed_args):
        """Run the command."""
        params = self.resolve_params(parsed_args)
        if params.get("dist") is None:
            raise CommandError("The --dist option is required.")
        dist = distributions.parse_distribution(params["dist"])
        rf = rate_function(dist)

        grid = params.get("range")
        if grid is None:
            grid = default_range(rf)
        lower, upper, count = grid
        rows = rf.table(np.linspace(lower, upper, int(count)))

        residuals = [max(reciprocity_check(rf, y)) for y, *_ in rows if rf.inside(y)]
        result = {
            "dist": dist.to_dict(),
            "domain": list(rf.domain),
            "mean": rf.mean,
            "variance": rf.variance,
            "range": [lower, upper, int(count)],
            "reciprocity_residual": max(residuals) if residuals else math.nan,
        }
        logger.info("Rate function of %s over [%.6g, %.6g]", dist.label, lower, upper)

        if params.get("window") is not None:
            window = as_window(params["window"])
            param = ldp_tilt_param(rf, window)
            y_star = rf.minimizer(window)
            result["window"] = {
                "window": window.to_dict(),
                "y_star": y_star,
                "rate": rf.phi(y_star),
                "lambda": param.lam,
                "temperature": param.temperature,
                "maxent_residual": maxent_ldp_equivalence(dist, window),
                "reciprocity_residual": max(reciprocity_check(rf, y_star)),
            }
            logger.info(
                "Window %s: y* = %.10g, lambda = %.10g", window, y_star, param.lam
            )

        columns = ["y", "phi", "dphi", "d2phi"]
        log_table(rows, headers=columns)
        emit(self, params, "ratefn", result, columns, rows)
