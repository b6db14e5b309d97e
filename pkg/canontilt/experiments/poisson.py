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

"""A Poisson count given the total with a large Poisson bath.

K ~ Poisson(lam) and L ~ Poisson(n mu), conditioned on K + L in n mu + sqrt(n) I. The
canonical law tilts K by psi(I) / sqrt(n), psi(I) being the window slope of the Normal
(0, mu) limit of the standardized bath; the sup distance to the exact conditional
decays like 1 / sqrt(n).
"""

import logging
import math
from typing import List, Tuple

import pydantic

from canontilt import distributions
from canontilt.conditioning import condition_exact
from canontilt.distributions import Interval, ScalingScheme
from canontilt.divergence import scaled_divergence, sup_distance
from canontilt.errors import HypothesisViolated
from canontilt.experiments._common import (
    MC_AGREEMENT_FLOOR,
    ExperimentSpec,
    as_window,
    build_report,
    check_window,
    fit_loglog,
    mc_oracle,
    sweep,
    temperature,
)
from canontilt.tilting import bath_slope_param, tilt

logger = logging.getLogger(__name__)

NAME = "exp_poisson_rate"

# where the tilt has to be negligible
VANISHING_N = 10 ** 6
VANISHING_LIMIT = 1e-3

# the window slope must not move more than this when the width shrinks tenfold
SLOPE_STABILITY = 0.02
STABILITY_DELTA = 0.02


class PoissonRateSpec(ExperimentSpec):
    """Parameters of the Poisson count experiment."""

    name: str = NAME
    n_grid: List[int] = [64, 256, 1024, 4096]
    lam: pydantic.confloat(gt=0) = 1.0
    mu: pydantic.confloat(gt=0) = 1.0
    window: Tuple[float, float] = (-1.0, 0.2)
    slope_max: float = -0.35
    reference_range: Tuple[float, float] = (-0.65, -0.35)
    mc_samples: pydantic.conint(ge=0) = 1_000_000

    _window = pydantic.validator("window", allow_reuse=True)(check_window)

    @pydantic.validator("reference_range")
    def validate_reference_range(cls, value):
        """Verify the range is ordered."""
        if not value[0] < value[1]:
            raise ValueError("the lower end must be below the upper end")
        return value


def _slope(mu, window):
    return bath_slope_param(distributions.normal(0.0, mu), window).lam


def exp_poisson_rate(spec):
    """Measure how fast the canonical law of the count approaches the exact conditional."""
    window = as_window(spec.window)
    if window.upper > 0:
        raise HypothesisViolated(f"The window {window} must lie on the negative axis.")
    psi = _slope(spec.mu, window)
    if 2 * window.delta / spec.mu >= psi:
        raise HypothesisViolated(
            f"The window is too wide for its slope: 2 delta / mu = "
            f"{2 * window.delta / spec.mu:.6g} is not below psi = {psi:.6g}."
        )
    logger.info("Window slope psi(%s) = %.10g", window, psi)

    K = distributions.poisson(spec.lam)
    edges = (spec.n_grid[0], spec.n_grid[-1])

    def task(n, rng):
        scheme = ScalingScheme.gaussian(n, spec.mu)
        raw_window = scheme.condition_window(window)
        bath = distributions.poisson(n * spec.mu)
        exact = condition_exact(K, bath, raw_window)
        param = bath_slope_param(distributions.normal(0.0, spec.mu), window, scheme.beta)
        canonical = tilt(K, param)
        normal_bath = distributions.normal(n * spec.mu, n * spec.mu)
        bridge = condition_exact(K, normal_bath, raw_window)
        divergence = scaled_divergence(exact, canonical)

        rows = [
            (n, "sup_distance", divergence.sup_dist),
            (n, "bridge_sup", sup_distance(exact, bridge)),
            (n, "kl", divergence.kl),
            (n, "tv", divergence.tv),
            (n, "temperature", temperature(param.lam)),
        ]
        agreement = None
        if spec.mc_samples and n in edges:
            agreement = mc_oracle(exact, K, bath, spec.mc_samples, spec.seed)
            rows.append((n, "mc_agreement", agreement))
        return rows, agreement

    results = sweep(task, spec.n_grid, spec.seed)
    rows = [row for task_rows, _ in results for row in task_rows]
    agreements = [agreement for _, agreement in results if agreement is not None]

    # the tilt vanishes for very large n
    vanishing = sup_distance(tilt(K, psi / math.sqrt(VANISHING_N)), K)
    stable_psi = _slope(spec.mu, Interval(window.h, STABILITY_DELTA))
    narrow_psi = _slope(spec.mu, Interval(window.h, STABILITY_DELTA / 10))
    stability = abs(narrow_psi - stable_psi) / abs(stable_psi)

    fit = fit_loglog([row for row in rows if row[1] == "sup_distance"])
    low, high = spec.reference_range
    checks = {
        "slope_upper_bound": fit.slope <= spec.slope_max,
        "vanishing_tilt": vanishing < VANISHING_LIMIT,
        "slope_stability": stability < SLOPE_STABILITY,
    }
    if agreements:
        checks["mc_oracle"] = min(agreements) >= MC_AGREEMENT_FLOOR
    summary = {
        "psi": psi,
        "vanishing_n": VANISHING_N,
        "vanishing_sup_distance": vanishing,
        "slope_stability": stability,
        "fitted_slope": fit.slope,
        "reference_range": list(spec.reference_range),
        "inside_reference_range": low <= fit.slope <= high,
    }
    notes = [
        "The 1/sqrt(n) rate is an upper bound: the fitted slope must be at most "
        f"{spec.slope_max:g}.",
        f"Fitted slope {fit.slope:.4g} against the reference range [{low:g}, {high:g}]; "
        "the lattice conditional often converges faster than 1/sqrt(n).",
    ]
    return build_report(spec, "sup_distance", rows, checks, summary, notes, fit=fit)
