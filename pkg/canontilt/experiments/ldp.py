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

"""Temperature at the scale of large deviations.

One summand X out of n, conditioned on the total falling in n I with the mean outside I.
The canonical law tilts X by -phi'(y*), y* the point of I closest to the mean in rate;
the KL divergence to the exact conditional goes to zero for that parameter only.
"""

import logging
import math
from typing import List, Tuple

import pydantic

from canontilt import distributions
from canontilt.conditioning import condition_exact
from canontilt.distributions import ScalingScheme, parse_distribution
from canontilt.divergence import scaled_divergence
from canontilt.experiments._common import (
    MC_AGREEMENT_FLOOR,
    ExperimentSpec,
    as_window,
    build_report,
    check_distribution,
    check_window,
    mc_oracle,
    sweep,
    temperature,
)
from canontilt.ldp import ldp_tilt_param, maxent_ldp_equivalence, rate_function, reciprocity_check
from canontilt.tilting import TiltParam, tilt

logger = logging.getLogger(__name__)

NAME = "exp_ldp_temperature"

# agreement of the maximum entropy and rate function routes
EQUIVALENCE_TOLERANCE = 1e-8


class LdpTemperatureSpec(ExperimentSpec):
    """Parameters of the large deviation experiment."""

    name: str = NAME
    n_grid: List[int] = [25, 50, 100, 200]
    subsystem: str = "exp:1"
    window: Tuple[float, float] = (0.4, 0.1)
    misspecified_lambda: float = 0.5
    kl_max: pydantic.confloat(gt=0) = 1e-2
    misspecified_factor: pydantic.confloat(gt=0) = 5.0

    _subsystem = pydantic.validator("subsystem", allow_reuse=True)(check_distribution)
    _window = pydantic.validator("window", allow_reuse=True)(check_window)


def exp_ldp_temperature(spec):
    """Measure KL(exact conditional, canonical law) with the rate function parameter."""
    X = parse_distribution(spec.subsystem)
    window = as_window(spec.window)
    rf = rate_function(X)
    param = ldp_tilt_param(rf, window)
    y_star = rf.minimizer(window)
    equivalence = maxent_ldp_equivalence(X, window)
    reciprocity = max(reciprocity_check(rf, y_star))
    wrong = TiltParam.user(spec.misspecified_lambda, window)
    canonical = tilt(X, param)
    misspecified = tilt(X, wrong)
    bath_family = distributions.bath_sum_family(X)
    logger.info("Rate function parameter %.10g at y* = %.10g", param.lam, y_star)
    edges = (spec.n_grid[0], spec.n_grid[-1])

    def task(n, rng):
        scheme = ScalingScheme.large_deviation(n)
        bath = bath_family(n)
        exact = condition_exact(X, bath, scheme.condition_window(window))
        divergence = scaled_divergence(exact, canonical)
        rows = [
            (n, "kl", divergence.kl),
            (n, "kl_misspecified", scaled_divergence(exact, misspecified).kl),
            (n, "tv", divergence.tv),
            (n, "temperature", temperature(param.lam)),
        ]
        agreement = None
        if spec.mc_samples and n in edges:
            agreement = mc_oracle(exact, X, bath, spec.mc_samples, spec.seed)
            rows.append((n, "mc_agreement", agreement))
        return rows, agreement

    results = sweep(task, spec.n_grid, spec.seed)
    rows = [row for task_rows, _ in results for row in task_rows]
    agreements = [agreement for _, agreement in results if agreement is not None]

    correct = [value for _, name, value in rows if name == "kl"]
    wrong_values = [value for _, name, value in rows if name == "kl_misspecified"]
    checks = {
        "kl_decreasing": all(b < a for a, b in zip(correct, correct[1:])),
        "kl_small": correct[-1] < spec.kl_max,
        "misspecified_floor": wrong_values[-1] >= spec.misspecified_factor * correct[-1],
        "maxent_equivalence": equivalence < EQUIVALENCE_TOLERANCE,
        "reciprocity": reciprocity < EQUIVALENCE_TOLERANCE,
    }
    if agreements:
        checks["mc_oracle"] = min(agreements) >= MC_AGREEMENT_FLOOR
    summary = {
        "lambda": param.lam,
        "y_star": y_star,
        "rate_at_y_star": rf.phi(y_star),
        "temperature": temperature(param.lam),
        "canonical": canonical.law.to_dict(),
        "maxent_residual": equivalence,
        "reciprocity_residual": reciprocity,
    }
    notes = []
    if not spec.mc_samples:
        notes.append(
            "No Monte Carlo oracle: the window probability is exponentially small in n."
        )
    if not math.isfinite(correct[-1]):
        notes.append("The KL divergence is not finite at the largest n.")
    return build_report(spec, "kl", rows, checks, summary, notes)
