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

"""The law of X given X + Y in a window, exactly (Bayes formula) or by rejection sampling.

Exact continuous conditionals live on a composite Gauss-Legendre grid: half of the
panels are uniform over the region carrying the mass, the other half are placed at
quantiles of a pilot evaluation, and the points where the bath probability has kinks
are always panel edges.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Optional

import numpy as np
from scipy import integrate, special

from canontilt import env, quadrature
from canontilt.cmdbase import CommandError
from canontilt.distributions import Distribution, Interval
from canontilt.errors import (
    EmptyWindow,
    NonFiniteConditional,
    TooFewAccepted,
    UnsupportedDependence,
)
from canontilt.tilting import TiltField, tilt, tilt_field

logger = logging.getLogger(__name__)

# points of the pilot evaluation that locates the mass
PILOT_POINTS = 8193

# uniform panels and quantile panels of the exact grid
UNIFORM_PANELS = 64
QUANTILE_PANELS = 64

# the grid covers where the unnormalized density is above this fraction of its maximum
_LOG_NEGLIGIBLE = -math.log(1e16)

# discrete baths with more support points than this do not add their kinks to the grid
MAX_LATTICE_KINKS = 4096

MIN_MC_SAMPLES = 10_000
MIN_ACCEPTED = 100
MC_TASKS = 8
MC_BINS = 64

# draws generated at once by each Monte Carlo task
_MC_CHUNK = 2 ** 20


@dataclass(eq=False)
class ConditionalLaw:
    """The conditional law of X given that X + Y falls in the window.

    `nodes` and `weights` are the quadrature grid (lattice points with unit weights for
    discrete laws, bin midpoints and widths for Monte Carlo histograms) and `density`
    the (normalized) density or mass at the nodes.
    """

    kind: str
    window: Interval
    method: str
    nodes: np.ndarray
    weights: np.ndarray
    density: np.ndarray
    log_mass_in_window: float
    stderr: Optional[np.ndarray] = None
    edges: Optional[np.ndarray] = None
    mc_meta: Optional[Dict[str, Any]] = None
    metadata: Dict[str, Any] = field(default_factory=dict)
    breakpoints: np.ndarray = field(default_factory=lambda: np.empty(0))
    _log_unnormalized: Optional[Callable] = None

    @property
    def mass_in_window(self):
        """Return P(X + Y in window)."""
        return math.exp(self.log_mass_in_window)

    @property
    def is_mc(self):
        """Tell if the law is a Monte Carlo histogram."""
        return self.method == "mc-rejection"

    def masses(self):
        """Return the probability carried by each node (or bin)."""
        return self.density * self.weights

    def total_mass(self):
        """Return the total probability of the representation."""
        return float(np.sum(self.masses()))

    def pdf(self, x):
        """Return the density (or mass) at x.

        Exact laws use the Bayes formula anywhere; histograms are step functions.
        """
        x = np.asarray(x, dtype=float)
        if self._log_unnormalized is not None:
            with np.errstate(divide="ignore", invalid="ignore"):
                values = np.exp(self._log_unnormalized(x) - self.log_mass_in_window)
        elif self.kind == "discrete":
            pos = np.clip(np.searchsorted(self.nodes, x), 0, self.nodes.size - 1)
            on_node = np.isclose(self.nodes[pos], x, rtol=0, atol=1e-9)
            values = np.where(on_node, self.density[pos], 0.0)
        else:
            pos = np.searchsorted(self.edges, x, side="right") - 1
            inside = (pos >= 0) & (pos < self.density.size)
            values = np.where(inside, self.density[np.clip(pos, 0, self.density.size - 1)], 0.0)
        return float(values) if values.ndim == 0 else values

    def probability(self, a, b):
        """Return P(a <= X <= b | window)."""
        if self.kind == "discrete":
            inside = (self.nodes >= a - 1e-12) & (self.nodes <= b + 1e-12)
            return float(np.sum(self.masses()[inside]))
        if self.is_mc:
            lower = np.clip(a, self.edges[:-1], self.edges[1:])
            upper = np.clip(b, self.edges[:-1], self.edges[1:])
            fraction = np.clip(upper - lower, 0, None) / np.diff(self.edges)
            return float(np.sum(fraction * self.masses()))

        lo, hi = self.support
        a, b = max(a, lo), min(b, hi)
        if a >= b:
            return 0.0
        points = [p for p in self.breakpoints if a < p < b]
        value, _ = integrate.quad(
            self.pdf, a, b, points=points or None, epsabs=1e-13, epsrel=1e-10, limit=400
        )
        return float(value)

    @property
    def support(self):
        """Return the ends of the represented support."""
        if self.edges is not None:
            return float(self.edges[0]), float(self.edges[-1])
        return float(self.nodes[0]), float(self.nodes[-1])

    def mean(self):
        """Return the conditional mean."""
        masses = self.masses()
        return float(np.sum(self.nodes * masses) / np.sum(masses))

    def to_rows(self):
        """Return (x, density) rows, with the standard error for histograms."""
        if self.stderr is None:
            return [(float(x), float(d)) for x, d in zip(self.nodes, self.density)]
        return [
            (float(x), float(d), float(s))
            for x, d, s in zip(self.nodes, self.density, self.stderr)
        ]

    def columns(self):
        """Return the names of the `to_rows` columns."""
        return ["x", "density", "stderr"] if self.stderr is not None else ["x", "density"]

    def to_dict(self):
        """Return a serializable description (without the grid)."""
        return {
            "kind": self.kind,
            "window": self.window.to_dict(),
            "method": self.method,
            "mass_in_window": self.mass_in_window,
            "points": int(self.nodes.size),
            "mean": self.mean(),
            "metadata": dict(self.metadata),
            "mc_meta": self.mc_meta,
        }


def _check_marginals(*laws):
    result = []
    for law in laws:
        if not isinstance(law, Distribution) and not hasattr(law, "as_law"):
            raise UnsupportedDependence(
                "Exact conditioning needs independent marginal laws; use the dependent "
                "variant with a conditional bath for joint models."
            )
        result.append(law.as_law())
    return result


def _grid_region(log_weight, lower, upper):
    """Locate where the unnormalized density is not negligible, using a pilot grid."""
    pilot = np.linspace(lower, upper, PILOT_POINTS)
    values = log_weight(pilot)
    finite = np.isfinite(values)
    if not np.any(finite):
        raise EmptyWindow("The conditioning event has zero probability.")
    peak = float(np.max(values[finite]))
    keep = np.flatnonzero(finite & (values >= peak + _LOG_NEGLIGIBLE))
    first = max(keep[0] - 1, 0)
    last = min(keep[-1] + 1, PILOT_POINTS - 1)
    return pilot[first:last + 1], values[first:last + 1] - peak


def _quantile_edges(pilot, log_values, count):
    weights = np.exp(log_values)
    cumulative = np.concatenate(([0.0], np.cumsum((weights[1:] + weights[:-1]) / 2)))
    cumulative = np.maximum.accumulate(cumulative / cumulative[-1])
    return np.interp(np.linspace(0, 1, count + 1)[1:-1], cumulative, pilot)


def _build_exact(x_law, log_weight, window, lower, upper, kinks):
    """Put the unnormalized conditional on its grid and normalize it."""
    if x_law.kind == "discrete":
        nodes = x_law.positions()
        weights = np.ones_like(nodes)
        edges = None
        breakpoints = np.empty(0)
    else:
        if not lower < upper:
            raise EmptyWindow(f"The conditioning event {window} has zero probability.")
        pilot, pilot_values = _grid_region(log_weight, lower, upper)
        lo, hi = float(pilot[0]), float(pilot[-1])
        breakpoints = quadrature.clean_edges(
            np.concatenate([np.asarray(kinks, dtype=float), x_law.breakpoints()]), lo, hi
        )
        edges = quadrature.clean_edges(
            np.concatenate(
                [
                    quadrature.uniform_edges(lo, hi, UNIFORM_PANELS),
                    _quantile_edges(pilot, pilot_values, QUANTILE_PANELS),
                    breakpoints,
                ]
            ),
            lo,
            hi,
        )
        nodes, weights = quadrature.panel_nodes(edges)
        logger.debug(
            "Exact conditional grid on [%.6g, %.6g]: %d panels, %d kinks",
            lo,
            hi,
            edges.size - 1,
            breakpoints.size,
        )

    with np.errstate(divide="ignore"):
        log_values = log_weight(nodes)
        log_mass = float(special.logsumexp(log_values + np.log(weights)))
    if not math.isfinite(log_mass):
        raise EmptyWindow(f"The conditioning event {window} has zero probability.")
    density = np.exp(log_values - log_mass)
    return ConditionalLaw(
        kind=x_law.kind,
        window=window,
        method="bayes-exact",
        nodes=nodes,
        weights=weights,
        density=density,
        log_mass_in_window=log_mass,
        edges=edges,
        breakpoints=breakpoints,
        _log_unnormalized=log_weight,
    )


def _log_marginal(x_law):
    if x_law.kind == "discrete":
        return x_law.logpmf
    return x_law.logpdf


def condition_exact(X, Y, window):
    """Return the law of X given X + Y in the window, for independent X and Y."""
    x_law, y_law = _check_marginals(X, Y)
    log_marginal = _log_marginal(x_law)

    def log_weight(x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.asarray(log_marginal(x)) + np.asarray(
                y_law.log_window_prob(window.h - x, window.delta)
            )

    x_lo, x_hi, _ = x_law.truncation()
    y_lo, y_hi, _ = y_law.truncation()
    lower, upper = max(x_lo, window.h - y_hi), min(x_hi, window.upper - y_lo)

    # where the window probability of the bath changes its formula
    kinks = []
    if y_law.kind == "discrete":
        positions = y_law.positions()
        if positions.size <= MAX_LATTICE_KINKS:
            kinks.extend(window.h - positions)
            kinks.extend(window.upper - positions)
    else:
        for end in y_law.support:
            if math.isfinite(end):
                kinks.extend([window.h - end, window.upper - end])
        kinks.extend(window.h - np.asarray(y_law.breakpoints()))
        kinks.extend(window.upper - np.asarray(y_law.breakpoints()))

    law = _build_exact(x_law, log_weight, window, lower, upper, kinks)
    law.metadata.update({"x": x_law.label, "y": y_law.label})
    return law


def condition_exact_dependent(X, bath, window, kinks=None):
    """Return the law of X given X + Y in the window with a conditional bath.

    `bath(x, lower, delta)` must return P(Y in [lower, lower + delta] | X = x) for
    arrays of x and lower.
    """
    (x_law,) = _check_marginals(X)
    log_marginal = _log_marginal(x_law)

    def log_weight(x):
        x = np.asarray(x, dtype=float)
        probs = np.asarray(bath(x, window.h - x, window.delta), dtype=float)
        if np.any(np.isnan(probs)) or np.any(probs < 0) or np.any(probs > 1 + 1e-12):
            raise NonFiniteConditional(
                "The conditional bath must return probabilities in [0, 1]."
            )
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.asarray(log_marginal(x)) + np.log(np.clip(probs, 0.0, 1.0))

    lower, upper, _ = x_law.truncation()
    law = _build_exact(x_law, log_weight, window, lower, upper, kinks if kinks else [])
    law.metadata.update({"x": x_law.label, "y": "conditional bath"})
    return law


def _mc_bins(x_law):
    if x_law.kind == "discrete":
        return x_law.positions()
    lower, upper, _ = x_law.truncation()
    edges = np.asarray(x_law.ppf(np.linspace(0, 1, MC_BINS + 1)), dtype=float)
    edges[0], edges[-1] = lower, upper
    return np.clip(edges, lower, upper)


def _mc_task(x_law, y_law, sampler, window, bins, count, seed, task):
    """Run one share of the rejection sampling and return (bin counts, accepted)."""
    rng = np.random.default_rng([seed, task])
    discrete = x_law.kind == "discrete"
    counts = np.zeros(bins.size if discrete else bins.size - 1, dtype=np.int64)
    accepted = 0
    remaining = count
    while remaining:
        size = min(remaining, _MC_CHUNK)
        remaining -= size
        if sampler is None:
            x = np.asarray(x_law.draw(size, rng), dtype=float)
            y = np.asarray(y_law.draw(size, rng), dtype=float)
        else:
            x, y = (np.asarray(v, dtype=float) for v in sampler(size, rng))
        kept = x[window.contains(x + y)]
        accepted += kept.size
        if discrete:
            pos = np.clip(np.searchsorted(bins, kept - 1e-9), 0, bins.size - 1)
        else:
            pos = np.clip(np.searchsorted(bins, kept, side="right") - 1, 0, bins.size - 2)
        counts += np.bincount(pos, minlength=counts.size)
    return counts, accepted


def condition_mc(X, Y, window, samples, seed, sampler=None):
    """Estimate the conditional law by rejection sampling.

    Draws come from the marginals (or from `sampler(count, rng) -> (x, y)` for joint
    models); the budget is split among tasks seeded with (seed, task index) and the
    counts are merged in task order, so a given seed always gives the same histogram.
    """
    if samples < MIN_MC_SAMPLES:
        raise CommandError(f"Monte Carlo conditioning needs at least {MIN_MC_SAMPLES} samples.")
    (x_law,) = _check_marginals(X)
    y_law = None if Y is None else Y.as_law()
    bins = _mc_bins(x_law)

    shares = [samples // MC_TASKS + (1 if t < samples % MC_TASKS else 0) for t in range(MC_TASKS)]
    workers = min(MC_TASKS, env.get_thread_count())
    logger.debug("Rejection sampling: %d samples, seed %d, %d workers", samples, seed, workers)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        results = list(
            pool.map(
                lambda t: _mc_task(x_law, y_law, sampler, window, bins, shares[t], seed, t),
                range(MC_TASKS),
            )
        )
    counts = sum(result[0] for result in results)
    accepted = sum(result[1] for result in results)
    if accepted < MIN_ACCEPTED:
        raise TooFewAccepted(
            f"Only {accepted} of {samples} draws fell in {window}; "
            "enlarge the number of samples or the window."
        )

    masses = counts / accepted
    mass_stderr = np.sqrt(masses * (1 - masses) / accepted)
    if x_law.kind == "discrete":
        nodes, widths, edges = bins, np.ones_like(bins), None
    else:
        edges = bins
        nodes, widths = (bins[1:] + bins[:-1]) / 2, np.diff(bins)
    rate = accepted / samples
    mc_meta = {
        "samples": int(samples),
        "accepted": int(accepted),
        "seed": int(seed),
        "acceptance_rate": rate,
        "stderr": math.sqrt(rate * (1 - rate) / samples),
    }
    return ConditionalLaw(
        kind=x_law.kind,
        window=window,
        method="mc-rejection",
        nodes=nodes,
        weights=widths,
        density=masses / widths,
        log_mass_in_window=math.log(rate),
        stderr=mass_stderr / widths,
        edges=edges,
        mc_meta=mc_meta,
        metadata={"x": x_law.label},
    )


def mc_agreement(exact, mc, sigmas=3):
    """Return the fraction of histogram bins where both laws agree within `sigmas` errors."""
    accepted = mc.mc_meta["accepted"]
    mc_masses = mc.masses()
    if mc.kind == "discrete":
        exact_masses = np.array([exact.probability(x, x) for x in mc.nodes])
    else:
        exact_masses = np.array(
            [exact.probability(a, b) for a, b in zip(mc.edges[:-1], mc.edges[1:])]
        )
    stderr = np.sqrt(exact_masses * (1 - exact_masses) / accepted)
    agree = np.abs(mc_masses - exact_masses) <= sigmas * stderr + 1e-12
    return float(np.mean(agree))


def finite_n_conditional(X, bath_family, scheme, window, n):
    """Return the conditional law of the subsystem for a concrete number of summands."""
    scaled = scheme.at(n)
    bath = bath_family(n)
    raw_window = scaled.condition_window(window)
    law = condition_exact(X, bath, raw_window)
    law.metadata.update(
        {
            "n": n,
            "beta": scaled.beta,
            "mu": scaled.mu,
            "scheme": scaled.label,
            "window": window.to_dict(),
        }
    )
    return law


def canonical_approx(X, param):
    """Return the canonical approximation: the marginal of X tilted by the parameter."""
    if isinstance(param, TiltField):
        return tilt_field(X, param)
    return tilt(X, param)
