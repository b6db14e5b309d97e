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

"""KL divergence, total variation and sup distance between laws.

Both laws are put on a common grid and compared as the discrete measures given by the
node masses:

- a conditional law brings its own grid (its bins for Monte Carlo histograms, where the
  other law contributes its bin probabilities);
- discrete laws use the union of both supports;
- two analytic continuous laws use Gauss-Legendre panels over the union of their
  truncations, split where the densities cross.

Mass of a law that falls outside the grid of the other one counts fully in the total
variation and makes the KL divergence infinite.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import optimize, special

from canontilt import quadrature
from canontilt.conditioning import ConditionalLaw
from canontilt.errors import GridMismatch, PinskerViolation

logger = logging.getLogger(__name__)

# panels of the grid for two analytic continuous laws
DEFAULT_PANELS = 256

# points scanned to find where the densities cross
_CROSSING_SCAN = 4097

# mass outside the owner's grid below this is numerical noise
_OUTSIDE_TOLERANCE = 1e-12


@dataclass(frozen=True)
class _Pair:
    """Both laws as masses on a common grid, plus the mass each leaves outside it."""

    p: np.ndarray
    q: np.ndarray
    p_outside: float
    q_outside: float
    kind: str


def _kind(law):
    if isinstance(law, ConditionalLaw):
        return law.kind
    return law.as_law().kind


def _values_at(law, x):
    """Return the density (or mass) of the law at the points."""
    if isinstance(law, ConditionalLaw):
        return np.asarray(law.pdf(x), dtype=float)
    law = law.as_law()
    if law.kind == "discrete":
        return np.asarray(law.pmf(x), dtype=float)
    return np.asarray(law.pdf(x), dtype=float)


def _bin_masses(law, edges):
    if isinstance(law, ConditionalLaw):
        return np.array([law.probability(a, b) for a, b in zip(edges[:-1], edges[1:])])
    law = law.as_law()
    return np.exp(np.asarray(law.log_window_prob(edges[:-1], np.diff(edges)), dtype=float))


def _support_points(law):
    if isinstance(law, ConditionalLaw):
        return law.nodes
    return law.as_law().positions()


def _crossings(p, q, lower, upper):
    """Return the points of [lower, upper] where the two densities cross."""

    def gap(x):
        return float(p.pdf(x)) - float(q.pdf(x))

    scan = np.linspace(lower, upper, _CROSSING_SCAN)
    values = np.asarray(p.pdf(scan)) - np.asarray(q.pdf(scan))
    signs = np.sign(values)
    roots = []
    for i in np.flatnonzero(signs[:-1] * signs[1:] < 0):
        roots.append(optimize.brentq(gap, scan[i], scan[i + 1], xtol=1e-14))
    return np.array(roots)


def _analytic_grid(p, q, panels):
    p_lo, p_hi, _ = p.truncation()
    q_lo, q_hi, _ = q.truncation()
    lower, upper = min(p_lo, q_lo), max(p_hi, q_hi)
    edges = np.concatenate(
        [
            quadrature.uniform_edges(lower, upper, panels),
            p.breakpoints(),
            q.breakpoints(),
            [p_lo, p_hi, q_lo, q_hi],
            _crossings(p, q, lower, upper),
        ]
    )
    edges = quadrature.clean_edges(edges, lower, upper)
    logger.debug("Comparison grid on [%.6g, %.6g] with %d panels", lower, upper, edges.size - 1)
    return quadrature.panel_nodes(edges)


def _pair(P, Q, panels=DEFAULT_PANELS):
    """Put both laws on their common grid."""
    kind_p, kind_q = _kind(P), _kind(Q)
    if kind_p != kind_q:
        raise GridMismatch(f"Can not compare a {kind_p} law with a {kind_q} one.")

    if kind_p == "discrete":
        points = np.union1d(_support_points(P), _support_points(Q))
        p, q = _values_at(P, points), _values_at(Q, points)
        return _Pair(p, q, max(0.0, 1 - p.sum()), max(0.0, 1 - q.sum()), kind_p)

    # the conditional law owns the grid; a histogram owns it before an exact one
    owner, other, swapped = P, Q, False
    if isinstance(Q, ConditionalLaw) and (not isinstance(P, ConditionalLaw) or Q.is_mc):
        owner, other, swapped = Q, P, True

    if isinstance(owner, ConditionalLaw):
        if owner.is_mc:
            owner_masses = owner.masses()
            other_masses = _bin_masses(other, owner.edges)
        else:
            owner_masses = owner.masses()
            other_masses = _values_at(other, owner.nodes) * owner.weights
        owner_masses = owner_masses / owner_masses.sum()
        other_outside = max(0.0, 1 - float(other_masses.sum()))
        if swapped:
            return _Pair(other_masses, owner_masses, other_outside, 0.0, kind_p)
        return _Pair(owner_masses, other_masses, 0.0, other_outside, kind_p)

    p_law, q_law = P.as_law(), Q.as_law()
    nodes, weights = _analytic_grid(p_law, q_law, panels)
    p = np.asarray(p_law.pdf(nodes)) * weights
    q = np.asarray(q_law.pdf(nodes)) * weights
    return _Pair(p, q, max(0.0, 1 - p.sum()), max(0.0, 1 - q.sum()), kind_p)


def _kl_from_pair(pair):
    if pair.p_outside > _OUTSIDE_TOLERANCE:
        return math.inf
    value = float(np.sum(special.rel_entr(pair.p, pair.q)))
    return max(value, 0.0)


def _tv_from_pair(pair):
    value = 0.5 * (float(np.sum(np.abs(pair.p - pair.q))) + pair.p_outside + pair.q_outside)
    return min(value, 1.0)


def kl(P, Q, panels=DEFAULT_PANELS):
    """Return the KL divergence of P from Q (+inf when P is not dominated by Q)."""
    return _kl_from_pair(_pair(P, Q, panels))


def total_variation(P, Q, panels=DEFAULT_PANELS):
    """Return half the L1 distance between the laws."""
    return _tv_from_pair(_pair(P, Q, panels))


def sup_distance(P, Q):
    """Return the largest difference of point masses between two discrete laws."""
    if _kind(P) != "discrete" or _kind(Q) != "discrete":
        raise GridMismatch("The sup distance is defined for discrete laws only.")
    pair = _pair(P, Q)
    return float(np.max(np.abs(pair.p - pair.q)))


@dataclass(frozen=True)
class DivergenceReport:
    """All the distances between two laws, with the KL divergence scaled."""

    kl: float
    tv: float
    sup_dist: Optional[float]
    pinsker_bound: float
    scale: float
    scaled_kl: float

    def to_dict(self):
        """Return a serializable representation."""
        return {
            "kl": self.kl,
            "tv": self.tv,
            "sup_dist": self.sup_dist,
            "pinsker_bound": self.pinsker_bound,
            "scale": self.scale,
            "scaled_kl": self.scaled_kl,
        }


def scaled_divergence(P, Q, scale=1.0, panels=DEFAULT_PANELS):
    """Compute every distance between the laws, scaling the KL divergence by `scale`."""
    if not scale > 0:
        raise ValueError(f"The scale must be positive (got {scale!r}).")
    pair = _pair(P, Q, panels)
    kl_value = _kl_from_pair(pair)
    tv_value = _tv_from_pair(pair)
    sup_dist = float(np.max(np.abs(pair.p - pair.q))) if pair.kind == "discrete" else None
    bound = math.sqrt(kl_value / 2)
    if tv_value > bound + 1e-12:
        raise PinskerViolation(
            f"Total variation {tv_value:.6g} above the Pinsker bound {bound:.6g}: "
            "the comparison grid is not resolving the laws."
        )
    return DivergenceReport(kl_value, tv_value, sup_dist, bound, scale, scale * kl_value)
