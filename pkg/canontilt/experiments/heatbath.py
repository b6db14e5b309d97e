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

"""What makes a heat bath: the same tilt parameter from every sub-window.

A bath whose window probabilities have exponential form on I gives the same slope on any
sub-window, while a Normal bath does not. At the large deviation scale the same happens
with a linear rate function against the (strictly convex) Cramer one.
"""

import logging
import math
from typing import List, Tuple

import numpy as np
import pydantic

from canontilt import distributions
from canontilt.divergence import total_variation
from canontilt.experiments._common import (
    ExperimentSpec,
    as_window,
    build_report,
    check_distribution,
    check_window,
    fit_loglog,
    sweep,
)
from canontilt.ldp import RateFunction, ldp_tilt_param, rate_function
from canontilt.tilting import bath_slope_param, tilt

logger = logging.getLogger(__name__)

NAME = "exp_heatbath_invariance"


class HeatBathSpec(ExperimentSpec):
    """Parameters of the sub-window invariance experiment."""

    name: str = NAME
    n_grid: List[int] = [16, 64, 256, 1024]
    subsystem: str = "exp:1"
    bath_rate: pydantic.confloat(gt=0) = 2.0
    window: Tuple[float, float] = (-1.0, 1.0)
    normal_window: Tuple[float, float] = (-2.0, 1.0)
    ldp_window: Tuple[float, float] = (0.2, 0.4)
    subintervals: pydantic.conint(ge=2) = 20
    sub_width: pydantic.confloat(gt=0) = 0.1
    ldp_sub_width: pydantic.confloat(gt=0) = 0.04
    exponential_spread_max: pydantic.confloat(gt=0) = 1e-8
    normal_spread_min: pydantic.confloat(gt=0) = 0.1
    linear_spread_max: pydantic.confloat(gt=0) = 1e-10
    tv_slope_range: Tuple[float, float] = (-0.65, -0.35)

    _subsystem = pydantic.validator("subsystem", allow_reuse=True)(check_distribution)
    _windows = pydantic.validator(
        "window", "normal_window", "ldp_window", allow_reuse=True
    )(check_window)


def exponential_form_bath(rate, window):
    """Return a bath with density proportional to exp(rate y) on the window."""
    reflected = distributions.affine(distributions.exponential(rate), -1.0, 0.0)
    return distributions.truncated(reflected, window.h, window.upper)


def linear_rate_function(slope, offset, domain):
    """Return phi(y) = slope * y + offset on the domain."""
    return RateFunction.from_callables(
        lambda y: slope * y + offset, lambda y: slope, lambda y: 0.0, domain
    )


def spread(values):
    """Return max - min."""
    return float(np.max(values) - np.min(values))


def exp_heatbath_invariance(spec):
    """Compare the tilt parameters recovered from random sub-windows of each bath."""
    rng = np.random.default_rng([spec.seed, 0])
    window = as_window(spec.window)
    normal_window = as_window(spec.normal_window)
    ldp_window = as_window(spec.ldp_window)

    exp_bath = exponential_form_bath(spec.bath_rate, window)
    normal_bath = distributions.normal(0.0, 1.0)
    subs = window.subintervals(spec.sub_width, spec.subintervals, rng)
    normal_subs = normal_window.subintervals(spec.sub_width, spec.subintervals, rng)
    ldp_subs = ldp_window.subintervals(spec.ldp_sub_width, spec.subintervals, rng)

    exp_slopes = [bath_slope_param(exp_bath, sub).lam for sub in subs]
    normal_slopes = [bath_slope_param(normal_bath, sub).lam for sub in normal_subs]
    domain = (ldp_window.h - 10, ldp_window.upper + 10)
    linear = linear_rate_function(-spec.bath_rate, 1.0, domain)
    linear_params = [ldp_tilt_param(linear, sub).lam for sub in ldp_subs]
    cramer = rate_function(distributions.parse_distribution(spec.subsystem))
    cramer_params = [ldp_tilt_param(cramer, sub).lam for sub in ldp_subs]

    X = distributions.parse_distribution(spec.subsystem)
    exp_full = bath_slope_param(exp_bath, window).lam
    normal_full = bath_slope_param(normal_bath, normal_window).lam

    def task(n, _rng):
        beta = 1 / math.sqrt(n)
        exp_tv = max(
            total_variation(tilt(X, beta * lam), tilt(X, beta * exp_full)) for lam in exp_slopes
        )
        normal_tv = max(
            total_variation(tilt(X, beta * lam), tilt(X, beta * normal_full))
            for lam in normal_slopes
        )
        return [(n, "tv_exponential_bath", exp_tv), (n, "tv_normal_bath", normal_tv)]

    rows = [row for task_rows in sweep(task, spec.n_grid, spec.seed) for row in task_rows]
    fit = fit_loglog([row for row in rows if row[1] == "tv_normal_bath"])

    spreads = {
        "exponential_bath": spread(exp_slopes),
        "normal_bath": spread(normal_slopes),
        "linear_rate": spread(linear_params),
        "cramer_rate": spread(cramer_params),
    }
    low, high = spec.tv_slope_range
    checks = {
        "exponential_bath_invariant": spreads["exponential_bath"] < spec.exponential_spread_max,
        "normal_bath_contrast": spreads["normal_bath"] > spec.normal_spread_min,
        "linear_rate_invariant": spreads["linear_rate"] < spec.linear_spread_max,
        "cramer_rate_contrast": spreads["cramer_rate"] > 0,
        "normal_tv_rate": low <= fit.slope <= high,
    }
    summary = {
        "spreads": spreads,
        "exponential_bath_slope": exp_full,
        "normal_bath_slope": normal_full,
        "linear_rate_parameter": linear_params[0],
    }
    notes = [
        "Rows carry, for each n, the largest total variation between the canonical law "
        "built from a sub-window and the one built from the whole window.",
    ]
    return build_report(spec, "tv_normal_bath", rows, checks, summary, notes, fit=fit)
