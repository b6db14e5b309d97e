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

"""Large deviations: log moment generating functions, rate functions, maximum entropy.

Sign conventions: the moment generating side (and the maximum entropy constraint) uses
weights exp(lam x), while tilt parameters are always for weights exp(-lam x); the
conversion happens in `ldp_tilt_param` and `maxent_ldp_equivalence`.
"""

import functools
import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from canontilt.errors import (
    BoundarySupremum,
    InfeasibleMean,
    MeanInsideWindow,
)
from canontilt.tilting import TiltParam

logger = logging.getLogger(__name__)

# Newton iterations before giving up (bisection keeps the bracket shrinking anyway)
MAX_NEWTON_ITERATIONS = 64

# relative tolerance on A'(lam) = y
NEWTON_TOLERANCE = 1e-12

# how many times the bracket is expanded before declaring the point unreachable
_MAX_BRACKET_STEPS = 64


def log_mgf(dist, lam):
    """Return A(lam) = log E[exp(lam X)]; DivergentMGF outside the finiteness domain."""
    return dist.as_law().log_mgf(lam)


class RateFunction:
    """A convex rate function with its first two derivatives.

    `domain` is the open interval where the function is finite; `lambda_for(y)` gives
    the conjugate point (the derivative at y).
    """

    def __init__(self, phi, dphi, d2phi, domain, mean=None, variance=None, cumulants=None):
        self._phi = phi
        self._dphi = dphi
        self._d2phi = d2phi
        self._cumulants = cumulants
        self.domain = (float(domain[0]), float(domain[1]))
        self.mean = mean
        self.variance = variance

    @classmethod
    def from_callables(cls, phi, dphi, d2phi, domain, mean=None, variance=None, cumulants=None):
        """Build a rate function from user supplied evaluators.

        `cumulants(lam)`, when given, returns (A, A', A'') of the log moment generating
        function; otherwise they are recovered from the rate function by duality.
        """
        return cls(phi, dphi, d2phi, domain, mean, variance, cumulants)

    def inside(self, y):
        """Tell if y is in the open domain."""
        lower, upper = self.domain
        return lower < y < upper

    def _check_inside(self, y):
        if not self.inside(y):
            raise BoundarySupremum(
                f"The point {y!r} is outside the interior of the domain {self.domain}."
            )

    def lambda_for(self, y):
        """Return the conjugate point of y."""
        return self.dphi(y)

    def phi(self, y):
        """Return the rate at y (+inf outside the domain)."""
        if not self.inside(y):
            return math.inf
        return float(self._phi(y))

    def dphi(self, y):
        """Return the first derivative of the rate at y."""
        self._check_inside(y)
        return float(self._dphi(y))

    def d2phi(self, y):
        """Return the second derivative of the rate at y."""
        self._check_inside(y)
        return float(self._d2phi(y))

    def minimizer(self, window):
        """Return the point of the window where the rate is smallest."""
        lower, upper = window.h, window.upper
        if self.mean is not None:
            if lower <= self.mean <= upper:
                return float(self.mean)
            return lower if self.mean < lower else upper
        return lower if self.phi(lower) <= self.phi(upper) else upper

    def _search_bounds(self):
        """Return a finite stretch of the open domain where the conjugate points are sought."""
        lower, upper = self.domain
        center = self.mean if self.mean is not None else 0.0
        reach = 50 * max(1.0, math.sqrt(self.variance or 1.0), abs(center))
        a = max(lower, center - reach)
        b = min(upper, center + reach)
        margin = 1e-12 * max(1.0, abs(a), abs(b))
        return a + margin, b - margin

    def conjugate(self, lam):
        """Return sup_y [lam y - phi(y)], computed numerically."""
        result = optimize.minimize_scalar(
            lambda y: self.phi(y) - lam * y,
            bounds=self._search_bounds(),
            method="bounded",
            options={"xatol": 1e-9},
        )
        return float(-result.fun)

    def dual_point(self, lam):
        """Return the y where phi'(y) = lam."""
        a, b = self._search_bounds()
        low, high = self.dphi(a) - lam, self.dphi(b) - lam
        if low > 0 or high < 0:
            raise BoundarySupremum(
                f"The slope {lam!r} is not reached by the rate function on [{a:g}, {b:g}]."
            )
        if low == 0:
            return a
        if high == 0:
            return b
        return float(
            optimize.brentq(lambda y: self.dphi(y) - lam, a, b, xtol=1e-14, rtol=1e-15)
        )

    def cumulants(self, lam):
        """Return (A, A', A'') at lam, from the supplied evaluator or by duality."""
        if self._cumulants is not None:
            value, first, second = self._cumulants(lam)
            return float(value), float(first), float(second)
        y = self.dual_point(lam)
        return lam * y - self.phi(y), y, 1 / self.d2phi(y)

    def table(self, ys):
        """Return rows (y, phi, phi', phi'') for the given points (nan where undefined)."""
        rows = []
        for y in ys:
            y = float(y)
            if self.inside(y):
                rows.append((y, self.phi(y), self.dphi(y), self.d2phi(y)))
            else:
                rows.append((y, math.inf, math.nan, math.nan))
        return rows


class CramerRateFunction(RateFunction):
    """The Legendre-Fenchel conjugate of the log moment generating function of a law."""

    def __init__(self, dist):
        self.dist = dist.as_law()
        super().__init__(
            self._conjugate_value,
            self._solve_lambda,
            self._curvature,
            self.dist.hull(),
            self.dist.mean(),
            self.dist.var(),
        )
        self.mgf_domain = self.dist.mgf_domain()
        self._solve_cached = functools.lru_cache(maxsize=4096)(self._newton)

    def cumulants(self, lam):
        """Return (A, A', A'') at lam."""
        return self.dist.cumulants(lam)

    def _derivative(self, lam):
        _, first, _ = self.dist.cumulants(lam)
        return first

    def _bracket(self, y):
        """Return lam_a < lam_b with A'(lam_a) <= y <= A'(lam_b)."""
        lam_lo, lam_hi = self.mgf_domain
        limit = lam_hi if y > self.mean else lam_lo
        direction = 1.0 if y > self.mean else -1.0
        previous = 0.0
        for k in range(1, _MAX_BRACKET_STEPS + 1):
            if math.isfinite(limit):
                candidate = limit * (1 - 2.0 ** -k)
            else:
                candidate = direction * 2.0 ** (k - 1)
            try:
                with np.errstate(over="ignore", invalid="ignore"):
                    value = self._derivative(candidate)
            except OverflowError:
                break
            if not math.isfinite(value):
                break
            if direction * (value - y) >= 0:
                return (previous, candidate) if direction > 0 else (candidate, previous)
            previous = candidate
        raise BoundarySupremum(f"Could not bracket the conjugate point of {y!r}.")

    def _newton(self, y):
        a, b = self._bracket(y)
        tolerance = NEWTON_TOLERANCE * max(1.0, abs(y))
        lam = (a + b) / 2
        fallback = False
        for _ in range(MAX_NEWTON_ITERATIONS):
            _, first, second = self.dist.cumulants(lam)
            residual = first - y
            if abs(residual) <= tolerance:
                break
            if residual < 0:
                a = lam
            else:
                b = lam
            step = lam - residual / second if second > 0 else math.nan
            if a < step < b:
                lam = step
            else:
                fallback = True
                lam = (a + b) / 2
            if b - a <= 1e-15 * max(1.0, abs(lam)):
                break
        if fallback:
            logger.debug("Conjugate point of %r needed bisection steps (lambda=%.12g)", y, lam)
        return lam

    def _solve_lambda(self, y):
        if y == self.mean:
            return 0.0
        return self._solve_cached(float(y))

    def _conjugate_value(self, y):
        lam = self._solve_lambda(y)
        if lam == 0.0:
            return 0.0
        return max(y * lam - self.dist.log_mgf(lam), 0.0)

    def _curvature(self, y):
        _, _, second = self.dist.cumulants(self._solve_lambda(y))
        return 1 / second


def rate_function(dist):
    """Return the Cramer rate function of the law."""
    return CramerRateFunction(dist)


def reciprocity_check(rf, y):
    """Return the residuals of the reciprocal relations A'(lam) = y and phi'(y) = lam.

    The first is |A'(phi'(y)) - y|, the second |phi'(A'(lam)) - lam| for lam = phi'(y).
    """
    lam = rf.dphi(y)
    _, back, _ = rf.cumulants(lam)
    first = abs(back - y)
    second = abs(rf.dphi(back) - lam) if rf.inside(back) else math.inf
    return first, second


def ldp_tilt_param(rf, window):
    """Return the tilt parameter -phi'(y*) for the window, y* the rate minimizer on it."""
    if rf.mean is not None and window.h < rf.mean < window.upper:
        raise MeanInsideWindow(
            f"The mean {rf.mean:g} is inside the window {window}: there is no large deviation."
        )
    y_star = rf.minimizer(window)
    lam = -rf.dphi(y_star)
    return TiltParam(lam, "rate-function", window, note=f"y*={y_star:.12g}")


@dataclass(frozen=True)
class MaxEntSolution:
    """The multiplier of the maximum entropy law with a prescribed mean."""

    lam: float
    constraint_mean: float
    c_lambda: float
    residual: float

    def to_dict(self):
        """Return a serializable representation."""
        return {
            "lambda": self.lam,
            "constraint_mean": self.constraint_mean,
            "c_lambda": self.c_lambda,
            "residual": self.residual,
        }


def maxent_lambda(dist, alpha, rf=None):
    """Find lam so that the law weighted by exp(lam x) has mean alpha."""
    rf = rate_function(dist) if rf is None else rf
    if not rf.inside(alpha):
        raise InfeasibleMean(
            f"The mean {alpha!r} is not strictly inside the support hull {rf.domain}."
        )
    lam = rf.lambda_for(alpha)
    log_c, tilted_mean, _ = rf.cumulants(lam)
    return MaxEntSolution(lam, float(alpha), math.exp(log_c), abs(tilted_mean - alpha))


def maxent_ldp_equivalence(dist, window):
    """Return the gap between the maximum entropy and the rate function parameters."""
    rf = rate_function(dist)
    param = ldp_tilt_param(rf, window)
    solution = maxent_lambda(dist, rf.minimizer(window), rf)
    # maximum entropy weights are exp(lam x), tilt weights exp(-lam x)
    return abs(solution.lam + param.lam)


def tilted_mean_curve(dist, lams):
    """Return the means of the law weighted by exp(lam x) for each lam."""
    law = dist.as_law()
    return np.array([law.cumulants(lam)[1] for lam in lams])
