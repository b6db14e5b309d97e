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

"""Distance between the standardized sum and the standard normal."""

import logging
import math
from typing import List, Tuple

import numpy as np
import pydantic
from scipy import stats

from canontilt import distributions
from canontilt.distributions import ScalingScheme, parse_distribution
from canontilt.experiments._common import (
    ExperimentSpec,
    build_report,
    check_distribution,
    fit_loglog,
    sweep,
)

logger = logging.getLogger(__name__)

NAME = "exp_clt_error"

# constant of the Berry-Esseen bound for identically distributed summands
BERRY_ESSEEN_C = 0.4748


class CltErrorSpec(ExperimentSpec):
    """Parameters of the central limit error scan."""

    name: str = NAME
    n_grid: List[int] = [16, 64, 256, 1024]
    summands: List[str] = ["exp:1", "normal:0,1", "pois:1"]
    z_points: pydantic.conint(ge=2) = 200
    z_range: Tuple[float, float] = (-4.0, 4.0)
    continuous_slope_range: Tuple[float, float] = (-0.65, -0.35)
    lattice_slope_range: Tuple[float, float] = (-0.7, -0.3)
    normal_tolerance: pydantic.confloat(gt=0) = 1e-12

    _summands = pydantic.validator("summands", each_item=True, allow_reuse=True)(
        check_distribution
    )

    @pydantic.validator("z_range")
    def validate_z_range(cls, value):
        """Verify the range is ordered."""
        if not value[0] < value[1]:
            raise ValueError("the lower end must be below the upper end")
        return value


def _metric(summand):
    return f"sup_error[{summand}]"


def standardized_sum(X, n):
    """Return the law of (S_n - n mu) / (sigma sqrt(n))."""
    mean, sd = X.mean(), math.sqrt(X.var())
    scheme = ScalingScheme(n, lambda k: 1 / (sd * math.sqrt(k)), lambda k: k * mean, "clt")
    return distributions.standardize(distributions.sum_law(X, n), scheme)


def kolmogorov_error(law, zs):
    """Return the largest |P(Z <= z) - Phi(z)| over the points.

    For lattice laws both one sided limits at every lattice point in range are included.
    """
    errors = np.abs(np.asarray(law.cdf(zs), dtype=float) - stats.norm.cdf(zs))
    worst = float(np.max(errors))
    if law.kind == "discrete":
        positions = law.positions()
        inside = positions[(positions >= zs[0]) & (positions <= zs[-1])]
        if inside.size:
            phi = stats.norm.cdf(inside)
            right = np.abs(np.asarray(law.cdf(inside), dtype=float) - phi)
            left = np.abs(np.asarray(law.cdf_left(inside), dtype=float) - phi)
            worst = max(worst, float(np.max(right)), float(np.max(left)))
    return worst


def berry_esseen_bound(X, n):
    """Return C E|X - mu|^3 / (sigma^3 sqrt(n))."""
    mean, sd = X.mean(), math.sqrt(X.var())
    rho = X.expect(lambda x: np.abs(x - mean) ** 3)
    return BERRY_ESSEEN_C * rho / (sd ** 3 * math.sqrt(n))


def _is_normal(X):
    return X.as_law().family == "normal"


def exp_clt_error(spec):
    """Scan the sup error of the normal approximation for each summand law."""
    laws = {summand: parse_distribution(summand) for summand in spec.summands}
    zs = np.linspace(spec.z_range[0], spec.z_range[1], spec.z_points)

    def task(n, rng):
        rows = []
        for summand, X in laws.items():
            rows.append((n, _metric(summand), kolmogorov_error(standardized_sum(X, n), zs)))
            rows.append((n, f"berry_esseen[{summand}]", berry_esseen_bound(X, n)))
        return rows

    rows = [row for task_rows in sweep(task, spec.n_grid, spec.seed) for row in task_rows]

    def series(metric):
        return [(n, value) for n, name, value in rows if name == metric]

    checks = {}
    fits = {}
    main_fit = None
    for summand, X in laws.items():
        errors = series(_metric(summand))
        bounds = series(f"berry_esseen[{summand}]")
        checks[f"berry_esseen[{summand}]"] = all(
            error <= bound for (_, error), (_, bound) in zip(errors, bounds)
        )
        if _is_normal(X):
            checks[f"exact_normal[{summand}]"] = all(
                error <= spec.normal_tolerance for _, error in errors
            )
            continue
        fit = fit_loglog(errors)
        fits[summand] = {"slope": fit.slope, "stderr": fit.stderr, "r2": fit.r2}
        low, high = (
            spec.lattice_slope_range if X.kind == "discrete" else spec.continuous_slope_range
        )
        checks[f"rate[{summand}]"] = low <= fit.slope <= high
        if main_fit is None:
            main_fit = (summand, fit)

    notes = [
        f"The error is taken over {spec.z_points} points of {list(spec.z_range)}; lattice "
        "laws add both one sided limits at their support points.",
    ]
    if main_fit is None:
        metric = _metric(spec.summands[0])
        fit = None
    else:
        metric, fit = _metric(main_fit[0]), main_fit[1]
    summary = {"fits": fits, "berry_esseen_constant": BERRY_ESSEEN_C}
    return build_report(spec, metric, rows, checks, summary, notes, fit=fit)
