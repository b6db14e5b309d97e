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

"""Gibbs measure on a phase space with quadratic energies.

The phase space is R^(k + m) with the standard normal product measure; the subsystem
energy is the squared norm of the first k coordinates and the bath energy the one of the
last m, both divided by m. Conditioning the total energy on a shell I, the subsystem
energy follows the canonical law tilted by the slope of the bath structure function
over the shell, with an error of the order of the subsystem energy scale.
"""

import logging
import math
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np
import pydantic
from scipy import integrate

from canontilt import distributions
from canontilt.conditioning import condition_exact
from canontilt.distributions import Interval
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

NAME = "exp_gibbs_phase"

# how many test sets the sup error runs over
TEST_SETS = 50

# phase space points drawn to check that the energies add up
ADDITIVITY_POINTS = 1000

# width of the shell and weight used for the prior irrelevance check
PRIOR_DELTA = 1e-3
PRIOR_ALPHA = 1.0


@dataclass(frozen=True)
class PhaseSpaceModel:
    """Product of standard normals on R^k x R^m, energies being squared norms over m."""

    k: int
    m: int

    def subsystem_energy(self, u):
        """Return e1(u), the energy of the first coordinates."""
        return np.sum(np.square(u), axis=-1) / self.m

    def bath_energy(self, w):
        """Return e2(w), the energy of the last coordinates."""
        return np.sum(np.square(w), axis=-1) / self.m

    def energy(self, v):
        """Return e(v) = e1(u) + e2(w) for v = (u, w)."""
        return np.sum(np.square(v), axis=-1) / self.m

    def split(self, v):
        """Return the (u, w) parts of the phase space points."""
        v = np.asarray(v, dtype=float)
        k = self.k
        return v[..., :k], v[..., k:]

    def subsystem_law(self):
        """Return the law of the subsystem energy (a scaled chi-square)."""
        return distributions.gamma(self.k / 2, self.m / 2)

    def bath_law(self):
        """Return the law of the bath energy, whose density is the bath structure function."""
        return distributions.gamma(self.m / 2, self.m / 2)

    def draw(self, count, rng):
        """Draw phase space points from the product of standard normals."""
        return rng.standard_normal((count, self.k + self.m))

    def sample(self, count, rng):
        """Draw phase space points and return their (subsystem, bath) energies."""
        u, w = self.split(self.draw(count, rng))
        return self.subsystem_energy(u), self.bath_energy(w)

    def additivity_gap(self, count, rng):
        """Return the largest |e(v) - e1(u) - e2(w)| over drawn points."""
        v = self.draw(count, rng)
        u, w = self.split(v)
        gap = np.abs(self.energy(v) - self.subsystem_energy(u) - self.bath_energy(w))
        return float(np.max(gap))

    def epsilon(self):
        """Return the energy scale of the subsystem, E[e1^2] ** 0.5."""
        return math.sqrt(self.k * (self.k + 2)) / self.m


class GibbsPhaseSpec(ExperimentSpec):
    """Parameters of the phase space experiment."""

    name: str = NAME
    n_grid: List[int] = [50, 100, 200, 400]
    k: pydantic.conint(ge=2) = 2
    window: Tuple[float, float] = (0.8, 0.05)
    slope_range: Tuple[float, float] = (0.5, 1.5)
    oracle_tolerance: pydantic.confloat(gt=0) = 1e-6
    ratio_tolerance: pydantic.confloat(gt=0) = 1e-10
    prior_tolerance: pydantic.confloat(gt=0) = 1e-3
    mc_samples: pydantic.conint(ge=0) = 1_000_000

    _window = pydantic.validator("window", allow_reuse=True)(check_window)


def _test_sets(law, rng):
    """Return random windows [a, b] spread over the bulk of the law."""
    cuts = np.sort(rng.random((TEST_SETS, 2)), axis=1)
    bounds = np.asarray(law.ppf(np.clip(cuts, 1e-9, 1 - 1e-9)), dtype=float)
    return [(float(a), float(b)) for a, b in bounds]


def _oracle_gap(X, canonical, lam):
    """Compare the normalizer with an adaptive quadrature of f(x) exp(-lam x)."""
    lower, upper, _ = X.truncation()
    integral, _ = integrate.quad(
        lambda x: float(X.pdf(x)) * math.exp(-lam * x),
        lower,
        upper,
        epsabs=1e-14,
        epsrel=1e-12,
    )
    return abs(canonical.normalizer * integral - 1)


def _ratio_gap(bath, window, lam):
    """Compare the slope with (G(h + delta) - G(h)) / integral of G over the shell."""
    mass, _ = integrate.quad(bath.pdf, window.h, window.upper, epsabs=1e-15, epsrel=1e-13)
    ratio = (float(bath.pdf(window.upper)) - float(bath.pdf(window.h))) / mass
    return abs(ratio - lam) / max(1.0, abs(ratio))


def _prior_gap(model, window):
    """Recover the canonical law with both structure functions weighted by exp(-alpha s)."""
    narrow = Interval(window.h, PRIOR_DELTA)
    X, Y = model.subsystem_law(), model.bath_law()
    plain = tilt(X, bath_slope_param(Y, narrow))
    X_w = distributions.gamma(model.k / 2, model.m / 2 + PRIOR_ALPHA)
    Y_w = distributions.gamma(model.m / 2, model.m / 2 + PRIOR_ALPHA)
    weighted = tilt(X_w, bath_slope_param(Y_w, narrow))
    lower, upper, _ = plain.law.truncation()
    grid = np.linspace(lower, upper, 2001)
    plain_values = np.asarray(plain.pdf(grid))
    gap = np.max(np.abs(plain_values - np.asarray(weighted.pdf(grid))))
    return float(gap / np.max(plain_values))


def exp_gibbs_phase(spec):
    """Measure the sup error of the canonical law of the subsystem energy."""
    window = as_window(spec.window)
    edges = (spec.n_grid[0], spec.n_grid[-1])

    def task(m, rng):
        model = PhaseSpaceModel(spec.k, m)
        X, Y = model.subsystem_law(), model.bath_law()
        param = bath_slope_param(Y, window)
        canonical = tilt(X, param)
        exact = condition_exact(X, Y, window)
        errors = [
            abs(exact.probability(a, b) - (float(canonical.cdf(b)) - float(canonical.cdf(a))))
            for a, b in _test_sets(canonical, rng)
        ]
        rows = [
            (m, "sup_error", max(errors)),
            (m, "epsilon", model.epsilon()),
            (m, "temperature", temperature(param.lam)),
            (m, "shell_entropy", math.log(Y.interval_prob(window))),
            (m, "oracle_gap", _oracle_gap(X, canonical, param.lam)),
            (m, "slope_ratio_gap", _ratio_gap(Y, window, param.lam)),
            (m, "prior_gap", _prior_gap(model, window)),
            (m, "additivity_gap", model.additivity_gap(ADDITIVITY_POINTS, rng)),
        ]
        agreement = None
        if spec.mc_samples and m in edges:
            # joint draws of the energies from the phase space itself
            agreement = mc_oracle(exact, X, None, spec.mc_samples, spec.seed, model.sample)
            rows.append((m, "mc_agreement", agreement))
        return rows, agreement

    results = sweep(task, spec.n_grid, spec.seed)
    rows = [row for task_rows, _ in results for row in task_rows]
    agreements = [agreement for _, agreement in results if agreement is not None]

    def series(metric):
        return [value for _, name, value in rows if name == metric]

    fit = fit_loglog(list(zip(series("epsilon"), series("sup_error"))))
    low, high = spec.slope_range
    checks = {
        "rate_in_epsilon": low <= fit.slope <= high,
        "oracle": max(series("oracle_gap")) < spec.oracle_tolerance,
        "slope_ratio": max(series("slope_ratio_gap")) < spec.ratio_tolerance,
        "prior_irrelevance": max(series("prior_gap")) < spec.prior_tolerance,
        "energy_additive": max(series("additivity_gap")) < 1e-12,
    }
    if agreements:
        checks["mc_oracle"] = min(agreements) >= MC_AGREEMENT_FLOOR
    summary = {"k": spec.k, "test_sets": TEST_SETS, "prior_alpha": PRIOR_ALPHA}
    notes = [
        "The grid runs over the bath dimension m; the slope is fitted against the "
        "subsystem energy scale epsilon = sqrt(k (k + 2)) / m.",
    ]
    return build_report(spec, "sup_error", rows, checks, summary, notes, fit=fit)
