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

"""Temperature at the scale of Gaussian fluctuations.

One summand X out of n, conditioned on the total falling in n mu + sqrt(n) I. The
canonical law tilts X by psi(I) / sqrt(n) with psi(I) the window slope of the Normal
(0, sigma2) limit; n times the KL divergence goes to zero for that parameter, while the
perturbed parameters stay clearly above it from a moderate n on.
"""

import logging
import math
from typing import List, Optional, Tuple

import numpy as np
import pydantic

from canontilt import distributions
from canontilt.conditioning import condition_exact, condition_exact_dependent
from canontilt.distributions import Interval, ScalingScheme, parse_distribution
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
from canontilt.tilting import InteractionModel, TiltParam, bath_slope_param, corrected_param, tilt

logger = logging.getLogger(__name__)

NAME = "exp_gauss_temperature"


class GaussTemperatureSpec(ExperimentSpec):
    """Parameters of the Gaussian scale experiment."""

    name: str = NAME
    n_grid: List[int] = [25, 100, 400, 1600]
    subsystem: str = "exp:1"
    window: Tuple[float, float] = (-1.0, 0.5)
    perturbations: List[pydantic.confloat(gt=0)] = [0.75, 1.25]
    dominance_factor: pydantic.confloat(gt=0) = 2.0
    beats_from: pydantic.conint(ge=1) = 100
    interaction_c: Optional[float] = None
    mc_samples: pydantic.conint(ge=0) = 1_000_000

    _subsystem = pydantic.validator("subsystem", allow_reuse=True)(check_distribution)
    _window = pydantic.validator("window", allow_reuse=True)(check_window)


def _metric(factor):
    return "scaled_kl" if factor == 1 else f"scaled_kl[x{factor:g}]"


def _coupled_bath(bath, c, beta):
    """Return P(Y in J | X = x) = P(Y in J) * exp(c beta x)."""

    def conditional(x, lower, delta):
        with np.errstate(divide="ignore"):
            log_prob = np.asarray(bath.log_window_prob(lower, delta), dtype=float)
        return np.exp(log_prob + c * beta * np.asarray(x, dtype=float))

    return conditional


def exp_gauss_temperature(spec):
    """Measure n KL(exact conditional, canonical law) for the right and perturbed slopes."""
    X = parse_distribution(spec.subsystem)
    window = as_window(spec.window)
    mean, variance = X.mean(), X.var()
    limit_bath = distributions.normal(0.0, variance)
    psi = bath_slope_param(limit_bath, window).lam
    # the same width centred at zero has a null slope
    centered = Interval(-window.delta / 2, window.delta)
    bath_family = distributions.bath_sum_family(X)
    interaction = None
    if spec.interaction_c is not None:
        interaction = InteractionModel.exponential(spec.interaction_c, window)
    logger.info("Window slope psi(%s) = %.10g for %s", window, psi, X.label)
    edges = (spec.n_grid[0], spec.n_grid[-1])

    def task(n, rng):
        scheme = ScalingScheme.gaussian(n, mean)
        raw_window = scheme.condition_window(window)
        bath = bath_family(n)
        param = bath_slope_param(limit_bath, window, scheme.beta)
        if interaction is None:
            exact = condition_exact(X, bath, raw_window)
        else:
            coupled = _coupled_bath(bath, interaction.dlogG0, scheme.beta)
            kinks = [raw_window.h - end for end in bath.support if math.isfinite(end)]
            kinks += [raw_window.upper - end for end in bath.support if math.isfinite(end)]
            exact = condition_exact_dependent(X, coupled, raw_window, kinks)
            param = corrected_param(param, interaction, "smooth")

        rows = []
        for factor in [1.0] + list(spec.perturbations):
            perturbed = param
            if factor != 1:
                note = f"perturbed x{factor:g}"
                perturbed = TiltParam(param.lam * factor, "user", window, scheme.beta, note)
            divergence = scaled_divergence(exact, tilt(X, perturbed), scale=n)
            rows.append((n, _metric(factor), divergence.scaled_kl))
            if factor == 1:
                rows.append((n, "kl", divergence.kl))
                rows.append((n, "tv", divergence.tv))

        zabell = condition_exact(X, bath, scheme.condition_window(centered))
        rows.append((n, "zabell_kl", scaled_divergence(zabell, X).kl))
        rows.append((n, "temperature", temperature(param.lam)))

        agreement = None
        if spec.mc_samples and interaction is None and n in edges:
            agreement = mc_oracle(exact, X, bath, spec.mc_samples, spec.seed)
            rows.append((n, "mc_agreement", agreement))
        return rows, agreement

    results = sweep(task, spec.n_grid, spec.seed)
    rows = [row for task_rows, _ in results for row in task_rows]
    agreements = [agreement for _, agreement in results if agreement is not None]

    def series(metric):
        return [value for _, name, value in rows if name == metric]

    correct = series(_metric(1.0))
    zabell = series("zabell_kl")
    checks = {
        "correct_decreasing": all(b < a for a, b in zip(correct, correct[1:])),
        "zabell_vanishing": zabell[-1] < zabell[0],
    }
    summary = {"psi": psi, "mean": mean, "variance": variance}
    for factor in spec.perturbations:
        values = series(_metric(factor))
        checks[f"dominance_x{factor:g}"] = values[-1] >= spec.dominance_factor * correct[-1]
        beats = [p > c for p, c in zip(values, correct)]
        summary[f"beats_correct_x{factor:g}"] = beats
        late = [b for n, b in zip(spec.n_grid, beats) if n >= spec.beats_from]
        if late:
            checks[f"beats_correct_x{factor:g}"] = all(late)
    if agreements:
        checks["mc_oracle"] = min(agreements) >= MC_AGREEMENT_FLOOR
    notes = [
        f"The bath is the sum of n - 1 summands; the window is n * {mean:g} + sqrt(n) * I.",
        f"Perturbed curves must be at least {spec.dominance_factor:g} times the correct "
        f"one at the largest n, and above it at every n >= {spec.beats_from}.",
    ]
    if interaction is not None:
        notes.append(
            f"Coupling exp({spec.interaction_c:g} beta_n x); the canonical parameter is "
            "corrected accordingly."
        )
    if not math.isfinite(correct[-1]):
        notes.append("The correct curve is not finite at the largest n.")
    return build_report(spec, _metric(1.0), rows, checks, summary, notes)
