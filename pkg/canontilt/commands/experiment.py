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

"""Infrastructure for the 'experiment' command."""

import logging
import textwrap

from canontilt.cmdbase import BaseCommand, CommandError
from canontilt.commands import emit, log_table
from canontilt.errors import VerdictFailed
from canontilt.experiments import EXPERIMENTS

logger = logging.getLogger(__name__)

_overview = textwrap.dedent(
    """
    Run one of the convergence experiments and report, for each n of its grid,
    the measured metrics, with a log-log fit of the main one and the verdict of
    its acceptance checks.

    The experiment is selected with `--name` (or the `name` key of the run
    config params); the rest of the params tune it (grid, windows, laws,
    tolerances) and every one has a default, which is echoed in the report.
    The `seed` of the run config seeds every random draw.

    Available experiments:

    {}

    The command fails with return code 2 when the experiment ran but some of
    its checks did not pass (the report is written anyway).
"""
)


class ExperimentCommand(BaseCommand):
    """Run a convergence experiment."""

    name = "experiment"
    help_msg = "Run a convergence experiment and check its verdict"
    overview = _overview.format("\n".join(f"- {name}" for name in EXPERIMENTS))

    def fill_parser(self, parser):
        """Add own parameters to the general parser."""
        parser.add_argument("--name", choices=list(EXPERIMENTS), help="The experiment to run")

    def resolve_params(self, parsed_args):
        """Merge the experiment name in the config params; the spec validates the rest."""
        params = dict(self.config.params) if self.config is not None else {}
        name = parsed_args.name
        if name is not None:
            if params.get("name") not in (None, name):
                raise CommandError(
                    f"The run config params are for the {params['name']!r} experiment, "
                    f"not for {name!r}."
                )
            params["name"] = name
        if params.get("name") is None:
            raise CommandError("Indicate the experiment to run with --name.")
        if params["name"] not in EXPERIMENTS:
            known = ", ".join(EXPERIMENTS)
            raise CommandError(f"Unknown experiment {params['name']!r} (known ones: {known}).")
        if "seed" in params:
            raise CommandError("The seed goes in the run config itself, not in its params.")
        return params

    def run(self, parsed_args):
        """Run the command."""
        params = self.resolve_params(parsed_args)
        spec_class, runner = EXPERIMENTS[params["name"]]
        spec = spec_class.unmarshal({**params, "seed": self.config.seed})
        logger.info("Running %s", spec.name)
        report = runner(spec)

        resolved = spec.to_dict()
        del resolved["seed"]
        rows = report.rows
        log_table(rows, headers=["n", "metric", "value"])
        logger.info(
            "Fitted slope of %s: %.4g (stderr %.2g, r2 %.4f)",
            report.metric,
            report.fitted_slope,
            report.slope_stderr,
            report.r2,
        )
        for check, ok in report.checks.items():
            logger.info("- %s: %s", check, "ok" if ok else "FAILED")
        emit(self, resolved, "experiment", report.to_dict(), ["n", "metric", "value"], rows)

        if not report.passed:
            failed = ", ".join(report.failed_checks())
            raise VerdictFailed(f"Experiment {spec.name!r} failed its checks: {failed}.")
