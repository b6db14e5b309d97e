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

"""Composite Gauss-Legendre rules shared by the numerical modules.

A grid is a set of panels (given by their sorted edges), each one carrying the
nodes of a fixed order Gauss-Legendre rule mapped into it.
"""

import numpy as np

# nodes per panel
LEGENDRE_ORDER = 16

_UNIT_NODES, _UNIT_WEIGHTS = np.polynomial.legendre.leggauss(LEGENDRE_ORDER)


def clean_edges(edges, lower=None, upper=None):
    """Sort the edges, clip them to [lower, upper] and drop duplicates and non finite ones."""
    edges = np.asarray(edges, dtype=float)
    edges = edges[np.isfinite(edges)]
    if lower is not None:
        edges = edges[edges >= lower]
    if upper is not None:
        edges = edges[edges <= upper]
    edges = np.unique(edges)
    if edges.size > 1:
        # panels narrower than this are numerical noise from coincident breakpoints
        span = edges[-1] - edges[0]
        keep = np.concatenate(([True], np.diff(edges) > span * 1e-14))
        edges = edges[keep]
    return edges


def panel_nodes(edges):
    """Return the (nodes, weights) of the composite rule over the given panel edges."""
    edges = np.asarray(edges, dtype=float)
    if edges.size < 2:
        return np.empty(0), np.empty(0)
    left = edges[:-1, None]
    half = (edges[1:, None] - left) / 2
    nodes = left + half * (_UNIT_NODES[None, :] + 1)
    weights = half * _UNIT_WEIGHTS[None, :]
    return nodes.ravel(), weights.ravel()


def uniform_edges(lower, upper, panels):
    """Return the edges of `panels` equal panels covering [lower, upper]."""
    return np.linspace(lower, upper, panels + 1)


def integrate(func, edges):
    """Integrate a vectorized function over the panels."""
    nodes, weights = panel_nodes(edges)
    return float(np.sum(weights * func(nodes)))


def partial_integrals(func, lower, points):
    """Integrate a vectorized function from `lower` to each of the given points.

    Each point gets its own Gauss-Legendre rule, so the function must be smooth between
    `lower` and the points (callers split at their breakpoints beforehand). The lower
    limit may be a scalar or an array matching the points.
    """
    points = np.atleast_1d(np.asarray(points, dtype=float))
    lower = np.broadcast_to(np.asarray(lower, dtype=float), points.shape)
    half = (points - lower) / 2
    nodes = lower[:, None] + half[:, None] * (_UNIT_NODES[None, :] + 1)
    values = func(nodes.ravel()).reshape(nodes.shape)
    return half * np.sum(values * _UNIT_WEIGHTS[None, :], axis=1)
