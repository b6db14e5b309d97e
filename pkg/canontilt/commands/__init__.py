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


"""The canontilt commands, and what they share to present their results."""

import logging

import numpy as np
from tabulate import tabulate

from canontilt.distributions import Interval, parse_window
from canontilt.report import Report, emit_report

logger = logging.getLogger(__name__)


def as_window(value):
    """Build a window from a [h, delta] pair or a 'H,DELTA' text."""
    if isinstance(value, str):
        return parse_window(value)
    h, delta = value
    return Interval(h, delta)


def density(law, xs):
    """Return the density of the law at the points (the mass, for discrete laws)."""
    law = law.as_law()
    values = law.pmf(xs) if law.kind == "discrete" else law.pdf(xs)
    return np.asarray(values, dtype=float)


def log_table(rows, headers=(), limit=20):
    """Log the rows as a plain table, eliding the middle of long ones."""
    rows = list(rows)
    if len(rows) > limit:
        half = limit // 2
        rows = rows[:half] + [["..."] * len(rows[0])] + rows[-half:]
    table = tabulate(rows, headers=list(headers), tablefmt="plain", floatfmt=".6g")
    for line in table.splitlines():
        logger.info(line)


def emit(command, params, kind, result, columns=(), rows=()):
    """Write the command report, echoing the resolved config with the given params."""
    config = command.config.to_dict()
    config["command"] = command.name
    config["params"] = params
    report = Report(kind, config, result, tuple(columns), [tuple(row) for row in rows])
    emit_report(report, command.config.out_format, command.config.out_path)
    return report
