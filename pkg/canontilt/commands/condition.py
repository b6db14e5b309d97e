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

"""Infrastructure for the 'condition' command."""

import logging
import textwrap

from canontilt import distributions
from canontilt.cmdbase import BaseCommand, CommandError
from canontilt.commands import as_window, emit, log_table
from canontilt.conditioning import condition_exact, condition_mc, finite_n_conditional
from canontilt.distributions import ScalingScheme
from canontilt.utils import DistributionOption, SingleOptionEnsurer, WindowOption

logger = logging.getLogger(__name__)

METHODS = ("exact", "mc")
SCHEMES = ("gaussian", "ldp")

DEFAULT_SAMPLES = 1_000_000


def build_scheme(name, n, X):
    """Return the scaling scheme for n summands of X."""
    if name == "gaussian":
        return ScalingScheme.gaussian(n, X.mean())
    return ScalingScheme.large_deviation(n)


class ConditionCommand(BaseCommand):
    """Compute the conditional law of X given X + Y in a window."""

    name = "condition"
    help_msg = "Compute the law of X given that X + Y falls in a window"
    overview = textwrap.dedent(
        """
        Compute the conditional law of X given that X + Y falls in the window
        [H, H + DELTA], exactly (quadrature for densities, enumeration for
        lattice laws) or by Monte Carlo rejection sampling.

        X is given with `--x`; the bath is either given with `--y`, or built as
        the sum of n - 1 independent copies of X with `--n`. In that last case
        the window is scaled: at the Gaussian scale (the default) the total
        must fall in n E[X] + sqrt(n) [H, H + DELTA], at the large
        deviation scale (`--scheme ldp`) in n [H, H + DELTA].

        Monte Carlo uses `--samples` draws (at least 10000) and the seed of the
        run config (or `--seed`). Use the `--window=H,DELTA` form when H is
        negative.

        The report carries the conditional density (or mass) over its grid,
        with standard errors for Monte Carlo histograms.
    """
    )
    param_names = ("x", "y", "window", "method", "samples", "n", "scheme")

    def fill_parser(self, parser):
        """Add own parameters to the general parser."""
        parser.add_argument(
            "--x", type=SingleOptionEnsurer(DistributionOption()), help="The law of X"
        )
        parser.add_argument(
            "--y", type=SingleOptionEnsurer(DistributionOption()), help="The law of the bath Y"
        )
        parser.add_argument(
            "--window",
            type=SingleOptionEnsurer(WindowOption()),
            help="The conditioning window H,DELTA",
        )
        parser.add_argument(
            "--method", choices=METHODS, help="Exact computation (default) or Monte Carlo"
        )
        parser.add_argument(
            "--samples",
            type=SingleOptionEnsurer(int),
            help=f"Monte Carlo draws (default {DEFAULT_SAMPLES})",
        )
        parser.add_argument(
            "--n",
            type=SingleOptionEnsurer(int),
            help="Build the bath as the sum of n - 1 copies of X",
        )
        parser.add_argument(
            "--scheme", choices=SCHEMES, help="How the window scales with --n (default gaussian)"
        )

    def run(self, parsed_args):
        """Run the command."""
        params = self.resolve_params(parsed_args)
        if params.get("x") is None or params.get("window") is None:
            raise CommandError("The --x and --window options are required.")
        if (params.get("y") is None) == (params.get("n") is None):
            raise CommandError("Indicate the bath with exactly one of --y or --n.")
        if params.get("scheme") is not None and params.get("n") is None:
            raise CommandError("The --scheme option only applies with --n.")
        method = params.get("method") or "exact"
        if method not in METHODS:
            raise CommandError(f"Unknown method {method!r} (must be 'exact' or 'mc').")

        X = distributions.parse_distribution(params["x"])
        window = as_window(params["window"])
        result = {"x": X.to_dict(), "window": window.to_dict()}
        if params.get("n") is not None:
            n = params["n"]
            if n < 2:
                raise CommandError("The --n option must be at least 2.")
            scheme_name = params.get("scheme") or "gaussian"
            scheme = build_scheme(scheme_name, n, X)
            bath_family = distributions.bath_sum_family(X)
            Y = bath_family(n)
            raw_window = scheme.condition_window(window)
            result["scheme"] = scheme.to_dict()
        else:
            Y = distributions.parse_distribution(params["y"])
            raw_window = window
        result["y"] = Y.to_dict()
        result["raw_window"] = raw_window.to_dict()

        if method == "mc":
            samples = params.get("samples") or DEFAULT_SAMPLES
            law = condition_mc(X, Y, raw_window, samples, self.config.seed)
        elif params.get("n") is not None:
            law = finite_n_conditional(X, bath_family, scheme, window, n)
        else:
            law = condition_exact(X, Y, raw_window)
        result["law"] = law.to_dict()

        logger.info("X: %s, bath: %s, window %s", X.label, Y.label, raw_window)
        logger.info(
            "P(X + Y in window) = %.6g, conditional mean %.10g", law.mass_in_window, law.mean()
        )
        rows = law.to_rows()
        log_table(rows, headers=law.columns())
        emit(self, params, "condition", result, law.columns(), rows)
