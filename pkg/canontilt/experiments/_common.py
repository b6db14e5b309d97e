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

"""Pieces shared by all the experiments: specs, sweeps over n, fits and reports."""

import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, List, Tuple

import humanize
import numpy as np
import pydantic
from scipy import stats

from canontilt import env
from canontilt.cmdbase import CommandError
from canontilt.conditioning import condition_mc, mc_agreement
from canontilt.config import ModelConfigDefaults, format_pydantic_errors
from canontilt.distributions import Interval, parse_distribution
from canontilt.errors import NonPositiveValue

logger = logging.getLogger(__name__)

# what every report says about the scope of its checks
VALIDATION_NOTE = (
    "The run checks the conclusions of the limit statements (decay of the scaled "
    "divergences and the contrast against other parameters); the remainder conditions "
    "they assume are not verified."
)

# fraction of histogram bins that must agree with the Monte Carlo oracle
MC_AGREEMENT_FLOOR = 0.95

MIN_FIT_POINTS = 4

PASS = "pass"
FAIL = "fail"


class ExperimentSpec(ModelConfigDefaults):
    """Parameters common to every experiment."""

    name: str
    n_grid: List[int]
    seed: pydantic.conint(ge=0, lt=2 ** 64) = 0
    mc_samples: pydantic.conint(ge=0) = 0

    @pydantic.validator("n_grid")
    def validate_n_grid(cls, value):
        """Verify the grid is long enough, positive and strictly increasing."""
        if len(value) < MIN_FIT_POINTS:
            raise ValueError(f"must have at least {MIN_FIT_POINTS} entries")
        if any(n < 1 for n in value):
            raise ValueError("all entries must be positive")
        if any(b <= a for a, b in zip(value, value[1:])):
            raise ValueError("must be strictly increasing")
        return value

    @pydantic.validator("mc_samples")
    def validate_mc_samples(cls, value):
        """Verify the Monte Carlo budget is disabled or large enough."""
        if 0 < value < 10_000:
            raise ValueError("must be 0 (disabled) or at least 10000")
        return value

    @classmethod
    def unmarshal(cls, obj: Dict[str, Any]):
        """Build the spec from the run config params.

        :raises CommandError: On failure to validate the params.
        """
        try:
            return cls.parse_obj(obj)
        except pydantic.error_wrappers.ValidationError as error:
            raise CommandError(
                format_pydantic_errors(error.errors(), file_name="experiment params")
            )

    def to_dict(self):
        """Return the resolved spec (defaults filled) with plain lists."""
        return _listify(self.dict())


def _listify(value):
    if isinstance(value, dict):
        return {key: _listify(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_listify(item) for item in value]
    return value


def check_distribution(value):
    """Validate a distribution description (for pydantic validators)."""
    try:
        parse_distribution(value)
    except CommandError as exc:
        raise ValueError(str(exc))
    return value


def as_window(value: Tuple[float, float]) -> Interval:
    """Build the window from its (h, delta) spec field."""
    return Interval(*value)


def check_window(value):
    """Validate a (h, delta) window (for pydantic validators)."""
    try:
        as_window(value)
    except CommandError as exc:
        raise ValueError(str(exc))
    return value


@dataclass(frozen=True)
class FitResult:
    """Least squares line of log(value) against log(n)."""

    slope: float
    stderr: float
    r2: float
    intercept: float


def fit_loglog(rows):
    """Fit log(value) on log(n) by ordinary least squares.

    Each row is (n, value) or (n, metric, value).

    :raises NonPositiveValue: if there are too few points or any of them is not positive.
    """
    ns = np.array([float(row[0]) for row in rows])
    values = np.array([float(row[-1]) for row in rows])
    if ns.size < MIN_FIT_POINTS:
        raise NonPositiveValue(
            f"The log-log fit needs at least {MIN_FIT_POINTS} points (got {ns.size})."
        )
    bad = ~np.isfinite(values) | (values <= 0) | ~np.isfinite(ns) | (ns <= 0)
    if np.any(bad):
        where = int(np.argmax(bad))
        raise NonPositiveValue(
            f"The log-log fit needs positive finite values (got {values[where]!r} "
            f"at {ns[where]!r})."
        )
    result = stats.linregress(np.log(ns), np.log(values))
    return FitResult(
        float(result.slope),
        float(result.stderr),
        float(result.rvalue ** 2),
        float(result.intercept),
    )


def sweep(task, n_grid, seed):
    """Run `task(n, rng)` for every n of the grid, in parallel, merged in grid order.

    Each task gets its own generator seeded with (seed, n).
    """
    workers = min(len(n_grid), env.get_thread_count())
    logger.debug("Sweeping n over %s with %d workers (seed %d)", list(n_grid), workers, seed)
    start = time.monotonic()

    def timed(n):
        task_start = time.monotonic()
        result = task(n, np.random.default_rng([seed, n]))
        logger.debug("n=%d done in %s", n, humanize.naturaldelta(time.monotonic() - task_start))
        return result

    with ThreadPoolExecutor(max_workers=workers) as pool:
        results = list(pool.map(timed, n_grid))
    elapsed = humanize.naturaldelta(time.monotonic() - start)
    logger.info("Sweep of %d points done in %s", len(n_grid), elapsed)
    return results


def temperature(lam):
    """Return 1 / lam, infinite for a null parameter."""
    return math.inf if lam == 0 else 1 / lam


def mc_oracle(exact, X, Y, samples, seed, sampler=None):
    """Return the agreement fraction between the exact conditional and rejection sampling."""
    mc = condition_mc(X, Y, exact.window, samples, seed, sampler)
    return mc_agreement(exact, mc)


@dataclass
class ConvergenceReport:
    """What an experiment measured and whether its acceptance checks hold."""

    name: str
    metric: str
    rows: List[Tuple[float, str, float]]
    fitted_slope: float
    slope_stderr: float
    r2: float
    verdict: str
    checks: Dict[str, bool] = field(default_factory=dict)
    notes: List[str] = field(default_factory=list)
    summary: Dict[str, Any] = field(default_factory=dict)
    spec: Dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self):
        """Tell if every check passed."""
        return self.verdict == PASS

    def failed_checks(self):
        """Return the names of the checks that did not pass."""
        return [name for name, ok in self.checks.items() if not ok]

    def to_dict(self):
        """Return a serializable representation."""
        return {
            "name": self.name,
            "metric": self.metric,
            "fitted_slope": self.fitted_slope,
            "slope_stderr": self.slope_stderr,
            "r2": self.r2,
            "verdict": self.verdict,
            "checks": dict(self.checks),
            "notes": list(self.notes),
            "summary": dict(self.summary),
            "spec": dict(self.spec),
        }


def build_report(spec, metric, rows, checks, summary=None, notes=(), fit=None):
    """Assemble the report of a run; the slope is fitted on the `metric` rows unless given.

    The fit is reported even when the checks fail; if it can not be done (some value is
    zero) the slope is NaN and that is noted.
    """
    notes = [VALIDATION_NOTE] + list(notes)
    if fit is None:
        metric_rows = [row for row in rows if row[1] == metric]
        try:
            fit = fit_loglog(metric_rows)
        except NonPositiveValue as exc:
            notes.append(f"No log-log fit for {metric!r}: {exc}")
            fit = FitResult(math.nan, math.nan, math.nan, math.nan)
    verdict = PASS if all(checks.values()) else FAIL
    report = ConvergenceReport(
        name=spec.name,
        metric=metric,
        rows=[(row[0], row[1], float(row[2])) for row in rows],
        fitted_slope=fit.slope,
        slope_stderr=fit.stderr,
        r2=fit.r2,
        verdict=verdict,
        checks={name: bool(ok) for name, ok in checks.items()},
        notes=notes,
        summary=dict(summary or {}),
        spec=spec.to_dict(),
    )
    logger.info(
        "%s: slope %.4g (stderr %.2g, r2 %.4f), verdict %s",
        spec.name,
        report.fitted_slope,
        report.slope_stderr,
        report.r2,
        verdict,
    )
    return report
