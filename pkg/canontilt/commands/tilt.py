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

"""Infrastructure for the 'tilt' command."""

import logging
import textwrap

import numpy as np

from canontilt import distributions
from canontilt.cmdbase import BaseCommand, CommandError
from canontilt.commands import as_window, density, emit, log_table
from canontilt.ldp import ldp_tilt_param, maxent_lambda, rate_function
from canontilt.tilting import TiltParam, bath_slope_param, tilt
from canontilt.utils import DistributionOption, SingleOptionEnsurer, WindowOption

logger = logging.getLogger(__name__)

# family name -> (distribution prefix, the options giving its parameters in order)
FAMILIES = {
    "exponential": ("exp", ["rate"]),
    "normal": ("normal", ["mu", "sigma2"]),
    "gamma": ("gamma", ["shape", "rate"]),
    "uniform": ("uniform", ["a", "b"]),
    "halfnormal": ("halfnormal", ["sigma"]),
    "poisson": ("pois", ["mu"]),
    "binomial": ("binom", ["trials", "p"]),
    "bernoulli": ("bernoulli", ["p"]),
}
FAMILY_OPTIONS = ("rate", "mu", "sigma2", "shape", "a", "b", "sigma", "trials", "p")

# where the tilt parameter can come from; exactly one must be given
PARAMETER_SOURCES = ("lam", "bath", "rate_window", "mean")

DEFAULT_POINTS = 101


def family_to_dist(family, values):
    """Translate a family name and its parameter values to a distribution description."""
    try:
        prefix, names = FAMILIES[family]
    except KeyError:
        raise CommandError(
            f"Unknown family {family!r} (known ones: {', '.join(sorted(FAMILIES))})."
        )
    missing = [name for name in names if values.get(name) is None]
    if missing:
        options = ", ".join(f"--{name}" for name in missing)
        raise CommandError(f"The {family!r} family needs the option(s) {options}.")
    extra = sorted(name for name in FAMILY_OPTIONS if values.get(name) is not None)
    extra = [name for name in extra if name not in names]
    if extra:
        options = ", ".join(f"--{name}" for name in extra)
        raise CommandError(f"The {family!r} family does not use the option(s) {options}.")
    return "{}:{}".format(prefix, ",".join(f"{float(values[name])!r}" for name in names))


def resolve_base(params):
    """Return the base distribution description from --dist or --family and its options."""
    dist = params.get("dist")
    family = params.get("family")
    if (dist is None) == (family is None):
        raise CommandError("Indicate the base law with exactly one of --dist or --family.")
    if dist is not None:
        return dist
    return family_to_dist(family, params)


def resolve_param(base, params):
    """Build the tilt parameter from the one source given in the params."""
    given = [name for name in PARAMETER_SOURCES if params.get(name) is not None]
    if len(given) != 1:
        raise CommandError(
            "Indicate the tilt parameter with exactly one of --lambda, --bath (with "
            "--window), --rate-window or --mean."
        )
    (source,) = given
    if source != "bath" and (params.get("window") is not None or params.get("scale") is not None):
        raise CommandError("The --window and --scale options only apply with --bath.")

    if source == "lam":
        return TiltParam.user(params["lam"])
    if source == "bath":
        if params.get("window") is None:
            raise CommandError("The --bath option needs a --window.")
        bath = distributions.parse_distribution(params["bath"])
        scale = params.get("scale")
        return bath_slope_param(bath, as_window(params["window"]), 1.0 if scale is None else scale)
    if source == "rate_window":
        return ldp_tilt_param(rate_function(base), as_window(params["rate_window"]))

    # the maximum entropy weights are exp(lam x), the tilt ones exp(-lam x)
    solution = maxent_lambda(base, params["mean"])
    return TiltParam(-solution.lam, "max-entropy", note=f"mean={solution.constraint_mean!r}")


def evaluation_points(law, count):
    """Return where to tabulate the densities: support points or a regular grid."""
    law = law.as_law()
    if law.kind == "discrete":
        return law.positions()
    lower, upper, _ = law.truncation()
    return np.linspace(lower, upper, count)


class TiltCommand(BaseCommand):
    """Tilt a base law exponentially."""

    name = "tilt"
    help_msg = "Build the canonical law of a base distribution"
    overview = textwrap.dedent(
        """
        Build the canonical law of a base distribution: its density (or mass)
        multiplied by exp(-lambda x) and renormalized.

        The base law is given with `--dist` (like `exp:1` or `normal:0,1`) or
        with `--family` and the family options (like `--family gamma --shape 2
        --rate 1`).

        The parameter lambda can be given directly with `--lambda`, or found:

        - from the slope of the window probability of a bath law, with
          `--bath` and `--window` (optionally scaled with `--scale`)

        - from the rate function of the base law at the point of a window
          closest to the mean, with `--rate-window`

        - from a maximum entropy constraint on the mean, with `--mean`

        Windows are written H,DELTA for [H, H + DELTA]; use the `--window=H,DELTA`
        form when H is negative.

        The report carries the parameter (and its temperature, 1/lambda), the
        normalizer, the tilted law, its mean, and the base and tilted densities
        over the support.
    """
    )
    param_names = (
        "dist",
        "family",
        *FAMILY_OPTIONS,
        "lam",
        "bath",
        "window",
        "scale",
        "rate_window",
        "mean",
        "points",
    )

    def fill_parser(self, parser):
        """Add own parameters to the general parser."""
        parser.add_argument(
            "--dist", type=SingleOptionEnsurer(DistributionOption()), help="The base law"
        )
        parser.add_argument(
            "--family", choices=sorted(FAMILIES), help="The family of the base law"
        )
        for name in FAMILY_OPTIONS:
            converter = int if name == "trials" else float
            parser.add_argument(
                f"--{name}",
                type=SingleOptionEnsurer(converter),
                help=f"The {name!r} parameter of the family",
            )
        parser.add_argument(
            "--lambda",
            dest="lam",
            type=SingleOptionEnsurer(float),
            help="The tilt parameter",
        )
        parser.add_argument(
            "--bath",
            type=SingleOptionEnsurer(DistributionOption()),
            help="The bath law whose window probability slope gives the parameter",
        )
        parser.add_argument(
            "--window", type=SingleOptionEnsurer(WindowOption()), help="The bath window H,DELTA"
        )
        parser.add_argument(
            "--scale",
            type=SingleOptionEnsurer(float),
            help="Multiply the bath slope by this (like 1/sqrt(n))",
        )
        parser.add_argument(
            "--rate-window",
            type=SingleOptionEnsurer(WindowOption()),
            help="The window H,DELTA for the rate function parameter",
        )
        parser.add_argument(
            "--mean",
            type=SingleOptionEnsurer(float),
            help="The mean the maximum entropy law must have",
        )
        parser.add_argument(
            "--points",
            type=SingleOptionEnsurer(int),
            help=f"How many points tabulate continuous laws (default {DEFAULT_POINTS})",
        )

    def run(self, parsed_args):
        """Run the command."""
        params = self.resolve_params(parsed_args)
        base_text = resolve_base(params)
        base = distributions.parse_distribution(base_text)
        param = resolve_param(base, params)
        tilted = tilt(base, param)
        logger.debug("Tilted %s with %s", base.label, param)

        points = params.get("points")
        points = DEFAULT_POINTS if points is None else points
        if points < 2:
            raise CommandError("The --points option must be at least 2.")
        xs = evaluation_points(tilted, points)
        rows = list(zip(xs.tolist(), density(base, xs).tolist(), density(tilted, xs).tolist()))

        result = {
            "base": base.to_dict(),
            "tilt": param.to_dict(),
            "temperature": param.temperature,
            "normalizer": tilted.normalizer,
            "law": tilted.law.to_dict(),
            "mean": tilted.law.mean(),
        }
        logger.info("Base law: %s", base.label)
        logger.info(
            "Lambda: %.10g (%s), temperature %.6g", param.lam, param.provenance, param.temperature
        )
        logger.info("Tilted law: %s, mean %.10g", tilted.law.label, result["mean"])
        log_table(rows, headers=["x", "base", "tilted"])
        emit(self, params, "tilt", result, ["x", "base", "tilted"], rows)
