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

"""One dimensional laws, windows and scaling schemes.

Every law is either continuous (with a density) or discrete (supported on a lattice
`scale * k + shift`); both expose the same interface so the upper layers (tilting,
conditioning, divergences) can treat them uniformly.
"""

import csv
import functools
import logging
import math
import pathlib
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np
from scipy import integrate, optimize, signal, special, stats

from canontilt import quadrature
from canontilt.errors import (
    DivergentMGF,
    InvalidDistribution,
    InvalidTable,
    InvalidWindow,
    NonFiniteSlope,
    QuadratureError,
    UnsupportedConvolution,
    UnsupportedLaw,
    ZeroInterval,
)

logger = logging.getLogger(__name__)

# infinite supports are cut where the density drops below this fraction of its maximum
TRUNCATION_RATIO = 1e-16
_LOG_TRUNCATION_RATIO = math.log(TRUNCATION_RATIO)

# probability left out on each side when enumerating infinite lattice supports
LATTICE_TAIL = 1e-18
_LOG_LATTICE_TAIL = math.log(LATTICE_TAIL)

# tolerance (in lattice units) to decide that a position is a lattice point
LATTICE_EPS = 1e-9

# panels of the default quadrature grid over a truncated support
DEFAULT_PANELS = 128

# largest number of summands for the numerical convolution
MAX_NUMERIC_SUMMANDS = 64

# grid points for the numerical convolution of continuous laws; 2**k + 1 so that the
# grid of half the points sits on every other node
CONVOLUTION_POINTS = 2 ** 15 + 1

# most knots kept in the table of a numerical convolution
CONVOLUTION_KNOTS = 2 ** 15

_LOG_HALF = math.log(0.5)


def _plain(value):
    """Return a python float for 0-d results, the array otherwise."""
    value = np.asarray(value)
    if value.ndim == 0:
        return float(value)
    return value


def _log_diff(log_big, log_small):
    """Return log(exp(log_big) - exp(log_small)), -inf when not representable."""
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        result = log_big + np.log(-np.expm1(log_small - log_big))
    return np.where(np.isnan(result), -np.inf, result)


@dataclass(frozen=True)
class Interval:
    """The closed window [h, h + delta] of the conditioning event."""

    h: float
    delta: float

    def __post_init__(self):
        object.__setattr__(self, "h", float(self.h))
        object.__setattr__(self, "delta", float(self.delta))
        if not (math.isfinite(self.h) and math.isfinite(self.delta)) or self.delta <= 0:
            raise InvalidWindow(
                f"Invalid window (h={self.h!r}, delta={self.delta!r}): the lower end must be "
                "finite and the width finite and positive (a single lattice point is the "
                "window of one lattice step around it)."
            )

    @classmethod
    def around(cls, point, width=1.0):
        """Return the window of the given width centred on the point.

        With the lattice step as width it holds that lattice point and no other, which
        is how a point event such as {X + Y = 4} is written.
        """
        return cls(point - width / 2, width)

    @property
    def upper(self):
        """Return the upper end of the window."""
        return self.h + self.delta

    def shift(self, x):
        """Return the window seen by the rest of the sum when the first part is `x`."""
        return Interval(self.h - x, self.delta)

    def contains(self, x):
        """Tell if the point(s) lie in the closed window."""
        x = np.asarray(x, dtype=float)
        result = (x >= self.h) & (x <= self.upper)
        return bool(result) if result.ndim == 0 else result

    def split(self, at):
        """Split the window in two at the given inner point."""
        if not self.h < at < self.upper:
            raise InvalidWindow(f"Can not split {self} at {at!r}: the point must be inside.")
        return Interval(self.h, at - self.h), Interval(at, self.upper - at)

    def subintervals(self, width, count, rng):
        """Return `count` random sub-windows of the given width."""
        if not 0 < width <= self.delta:
            raise InvalidWindow(f"Sub-window width {width!r} does not fit in {self}.")
        lowers = self.h + rng.random(count) * (self.delta - width)
        return [Interval(float(lower), width) for lower in lowers]

    def to_dict(self):
        """Return a serializable representation."""
        return {"h": self.h, "delta": self.delta}

    def __str__(self):
        return f"[{self.h:g}, {self.upper:g}]"


@dataclass(frozen=True)
class ScalingScheme:
    """How the sum is scaled: the window of the raw sum is mu_n + [h, h + delta] / beta_n."""

    n: int
    beta_fn: Callable[[int], float]
    mu_fn: Callable[[int], float]
    label: str = "custom"

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"The number of summands must be positive (got {self.n!r}).")

    @classmethod
    def gaussian(cls, n, mean, offset=0):
        """Build the central limit scaling, centering `n - offset` summands of the given mean."""
        return cls(n, lambda k: 1 / math.sqrt(k), lambda k: (k - offset) * mean, "gaussian")

    @classmethod
    def large_deviation(cls, n):
        """Build the averaging scaling used for large deviations."""
        return cls(n, lambda k: 1.0 / k, lambda k: 0.0, "large-deviation")

    @classmethod
    def identity(cls, n=1):
        """Build the scaling that leaves the window untouched."""
        return cls(n, lambda k: 1.0, lambda k: 0.0, "identity")

    def at(self, n):
        """Return the same scheme for another number of summands."""
        return replace(self, n=n)

    @property
    def beta(self):
        """Return the scale factor for the current n."""
        beta = float(self.beta_fn(self.n))
        if not beta > 0:
            raise ValueError(f"The scaling factor must be positive (got {beta!r}).")
        return beta

    @property
    def mu(self):
        """Return the centering for the current n."""
        return float(self.mu_fn(self.n))

    def condition_window(self, window, n=None):
        """Return the window for the unscaled sum."""
        scheme = self if n is None else self.at(n)
        beta = scheme.beta
        return Interval(scheme.mu + window.h / beta, window.delta / beta)

    def to_dict(self):
        """Return a serializable representation."""
        return {"label": self.label, "n": self.n, "beta": self.beta, "mu": self.mu}


class Distribution:
    """Interface common to all the laws."""

    kind = None
    family = "custom"

    def params(self):
        """Return the parameters that describe the law."""
        return {}

    def as_law(self):
        """Return the plain law (tilted wrappers return the law they carry)."""
        return self

    def to_dict(self):
        """Return a serializable representation."""
        return {"kind": self.kind, "family": self.family, "params": self.params()}

    @property
    def label(self):
        """Return a short human description."""
        params = ", ".join(
            f"{k}={v:g}" if isinstance(v, (int, float)) else f"{k}={v}"
            for k, v in self.params().items()
        )
        return f"{self.family}({params})"

    def __repr__(self):
        return f"<{self.__class__.__name__} {self.label}>"

    def sample(self, count, seed):
        """Draw `count` values with a generator seeded with `seed`."""
        return self.draw(count, np.random.default_rng(seed))

    def interval_prob(self, window):
        """Return the probability of the closed window."""
        return float(np.exp(self.log_window_prob(window.h, window.delta)))

    def log_mgf(self, lam):
        """Return the log moment generating function at `lam`."""
        return self.cumulants(lam)[0]

    def hull(self):
        """Return the ends of the convex hull of the support (possibly infinite)."""
        return self.support

    def check_mgf(self, lam):
        """Raise DivergentMGF if `lam` is outside the finiteness domain."""
        lower, upper = self.mgf_domain()
        if not lower < lam < upper:
            raise DivergentMGF(lam, upper if lam >= upper else lower)

    def mean(self):
        """Return the expected value."""
        return self.moment(1)

    def var(self):
        """Return the variance."""
        mean = self.mean()
        return self.expect(lambda x: (x - mean) ** 2)

    def moment(self, k):
        """Return the raw moment of order k."""
        return self.expect(lambda x: x ** k)


class ContinuousDist(Distribution):
    """A law with a density."""

    kind = "continuous"
    support = (-math.inf, math.inf)

    def logpdf(self, x):
        """Return the log density."""
        raise NotImplementedError()

    def pdf(self, x):
        """Return the density."""
        return np.exp(self.logpdf(x))

    def cdf(self, x):
        """Return P(X <= x)."""
        raise NotImplementedError()

    def sf(self, x):
        """Return P(X > x)."""
        return _plain(1.0 - np.asarray(self.cdf(x)))

    def logcdf(self, x):
        """Return the log of the cumulative distribution."""
        with np.errstate(divide="ignore"):
            return _plain(np.log(self.cdf(x)))

    def logsf(self, x):
        """Return the log of the survival function."""
        with np.errstate(divide="ignore"):
            return _plain(np.log(self.sf(x)))

    def ppf(self, q):
        """Return the quantile function."""
        raise NotImplementedError()

    def isf(self, q):
        """Return the inverse survival function."""
        return self.ppf(1.0 - np.asarray(q))

    def breakpoints(self):
        """Return the points where the density is not smooth."""
        lower, upper = self.support
        return np.array([v for v in (lower, upper) if math.isfinite(v)])

    def draw(self, count, rng):
        """Draw `count` values using the given generator."""
        return np.asarray(self.ppf(rng.random(count)))

    def log_window_prob(self, lower, delta):
        """Return log P(lower <= X <= lower + delta), vectorized over `lower`."""
        lower = np.asarray(lower, dtype=float)
        upper = lower + delta
        with np.errstate(divide="ignore", invalid="ignore"):
            logcdf_upper = np.asarray(self.logcdf(upper))
            via_cdf = _log_diff(logcdf_upper, np.asarray(self.logcdf(lower)))
            via_sf = _log_diff(np.asarray(self.logsf(lower)), np.asarray(self.logsf(upper)))
        return _plain(np.where(logcdf_upper < _LOG_HALF, via_cdf, via_sf))

    @functools.cached_property
    def _truncation(self):
        lower, upper = self.support
        if math.isfinite(lower) and math.isfinite(upper):
            return lower, upper, 0.0

        q_lo = lower if math.isfinite(lower) else float(self.ppf(1e-10))
        q_hi = upper if math.isfinite(upper) else float(self.isf(1e-10))
        grid = np.linspace(q_lo, q_hi, 2049)
        with np.errstate(divide="ignore"):
            logp = np.asarray(self.logpdf(grid))
        cutoff = float(np.max(logp[np.isfinite(logp)])) + _LOG_TRUNCATION_RATIO
        width = q_hi - q_lo

        discarded = 0.0
        if not math.isfinite(lower):
            lower = self._tail_point(q_lo, -width, cutoff)
            discarded += float(self.cdf(lower))
        if not math.isfinite(upper):
            upper = self._tail_point(q_hi, width, cutoff)
            discarded += float(self.sf(upper))
        logger.debug("Truncated %s to [%.6g, %.6g] (discarded mass %.3g)", self, lower, upper,
                     discarded)
        return lower, upper, discarded

    def _tail_point(self, start, step, cutoff):
        """Walk from `start` doubling the step until the log density falls below the cutoff."""
        def excess(t):
            return float(self.logpdf(t)) - cutoff

        point = start
        if excess(point) <= 0:
            return point
        for _ in range(200):
            following = point + step
            if excess(following) <= 0:
                return optimize.brentq(excess, min(point, following), max(point, following))
            point = following
            step *= 2
        raise QuadratureError(f"Could not find where the tail of {self} becomes negligible", step)

    def truncation(self):
        """Return (lower, upper, discarded mass) of the effective support used numerically."""
        return self._truncation

    def quadrature_grid(self, panels=DEFAULT_PANELS):
        """Return the (nodes, weights) of a Gauss-Legendre grid over the truncated support."""
        lower, upper, _ = self.truncation()
        edges = np.concatenate(
            [quadrature.uniform_edges(lower, upper, panels), self.breakpoints()]
        )
        return quadrature.panel_nodes(quadrature.clean_edges(edges, lower, upper))

    def expect(self, func):
        """Return the expectation of func(X)."""
        nodes, weights = self.quadrature_grid()
        return float(np.sum(weights * self.pdf(nodes) * func(nodes)))

    def cumulants(self, lam):
        """Return (A, A', A'') of the log moment generating function at `lam`."""
        lam = float(lam)
        self.check_mgf(lam)
        nodes, weights = self.quadrature_grid()
        with np.errstate(divide="ignore"):
            log_terms = np.log(weights) + np.asarray(self.logpdf(nodes)) + lam * nodes
        big = special.logsumexp(log_terms)
        probs = np.exp(log_terms - big)
        first = float(np.sum(probs * nodes))
        second = float(np.sum(probs * (nodes - first) ** 2))
        return float(big), first, second

    def mgf_domain(self):
        """Return the open interval of `lam` where the moment generating function is finite."""
        lower, upper = self.support
        lam_lo = -math.inf if math.isfinite(lower) else -self._scan_tail_rate(-1)
        lam_hi = math.inf if math.isfinite(upper) else self._scan_tail_rate(1)
        return lam_lo, lam_hi

    def _scan_tail_rate(self, side):
        """Estimate the exponential decay rate of the density towards one side.

        The rate is estimated on geometrically growing segments until two consecutive
        estimates agree to 1e-6 relative precision; faster than exponential decay gives inf.
        """
        lower, upper, _ = self.truncation()
        start = upper if side > 0 else lower
        unit = max(abs(start), 1.0)
        rates = []
        for j in range(1, 60):
            a = start + side * unit * 2.0 ** (j - 1)
            b = start + side * unit * 2.0 ** j
            log_a, log_b = float(self.logpdf(a)), float(self.logpdf(b))
            if log_b == -math.inf:
                return math.inf
            rates.append((log_a - log_b) / abs(b - a))
            if len(rates) > 1 and abs(rates[-1] - rates[-2]) <= 1e-6 * abs(rates[-2]):
                return rates[-1]
        return math.inf if rates[-1] > rates[0] else rates[-1]


def _exponential_cumulants(lam, rate):
    return -math.log1p(-lam / rate), 1 / (rate - lam), 1 / (rate - lam) ** 2


def _gamma_cumulants(lam, shape, rate):
    return -shape * math.log1p(-lam / rate), shape / (rate - lam), shape / (rate - lam) ** 2


def _normal_cumulants(lam, mu, sigma2):
    return mu * lam + sigma2 * lam ** 2 / 2, mu + sigma2 * lam, sigma2


_CLOSED_CONTINUOUS_CUMULANTS = {
    "exponential": _exponential_cumulants,
    "gamma": _gamma_cumulants,
    "normal": _normal_cumulants,
}


class ScipyContinuous(ContinuousDist):
    """A named family backed by a frozen scipy distribution."""

    def __init__(self, family, frozen, params, mgf_domain):
        self.family = family
        self._frozen = frozen
        self._params = dict(params)
        self._mgf_domain = mgf_domain
        self.support = tuple(float(v) for v in frozen.support())

    def params(self):
        """Return the family parameters."""
        return dict(self._params)

    def logpdf(self, x):
        """Return the log density."""
        return _plain(self._frozen.logpdf(x))

    def pdf(self, x):
        """Return the density."""
        return _plain(self._frozen.pdf(x))

    def cdf(self, x):
        """Return P(X <= x)."""
        return _plain(self._frozen.cdf(x))

    def sf(self, x):
        """Return P(X > x)."""
        return _plain(self._frozen.sf(x))

    def logcdf(self, x):
        """Return the log of the cumulative distribution."""
        return _plain(self._frozen.logcdf(x))

    def logsf(self, x):
        """Return the log of the survival function."""
        return _plain(self._frozen.logsf(x))

    def ppf(self, q):
        """Return the quantile function."""
        return _plain(self._frozen.ppf(q))

    def isf(self, q):
        """Return the inverse survival function."""
        return _plain(self._frozen.isf(q))

    def mean(self):
        """Return the expected value."""
        return float(self._frozen.mean())

    def var(self):
        """Return the variance."""
        return float(self._frozen.var())

    def moment(self, k):
        """Return the raw moment of order k."""
        return float(self._frozen.moment(k))

    def draw(self, count, rng):
        """Draw `count` values using the given generator."""
        return self._frozen.rvs(size=count, random_state=rng)

    def mgf_domain(self):
        """Return the open interval of `lam` where the moment generating function is finite."""
        return self._mgf_domain

    def cumulants(self, lam):
        """Return (A, A', A'') of the log moment generating function at `lam`."""
        closed = _CLOSED_CONTINUOUS_CUMULANTS.get(self.family)
        if closed is None:
            return super().cumulants(lam)
        self.check_mgf(lam)
        return closed(float(lam), **self._params)


def uniform(a, b):
    """Build the uniform law on [a, b]."""
    a, b = float(a), float(b)
    if not b > a:
        raise ValueError(f"The uniform law needs a < b (got {a!r}, {b!r}).")
    return ScipyContinuous(
        "uniform", stats.uniform(loc=a, scale=b - a), {"a": a, "b": b}, (-math.inf, math.inf)
    )


def exponential(rate):
    """Build the exponential law with the given rate."""
    rate = float(rate)
    if not rate > 0:
        raise ValueError(f"The exponential rate must be positive (got {rate!r}).")
    return ScipyContinuous(
        "exponential", stats.expon(scale=1 / rate), {"rate": rate}, (-math.inf, rate)
    )


def gamma(shape, rate):
    """Build the gamma law with the given shape and rate."""
    shape, rate = float(shape), float(rate)
    if not (shape > 0 and rate > 0):
        raise ValueError(f"The gamma parameters must be positive (got {shape!r}, {rate!r}).")
    return ScipyContinuous(
        "gamma",
        stats.gamma(shape, scale=1 / rate),
        {"shape": shape, "rate": rate},
        (-math.inf, rate),
    )


def normal(mu, sigma2):
    """Build the normal law with the given mean and variance."""
    mu, sigma2 = float(mu), float(sigma2)
    if not sigma2 > 0:
        raise ValueError(f"The normal variance must be positive (got {sigma2!r}).")
    return ScipyContinuous(
        "normal",
        stats.norm(loc=mu, scale=math.sqrt(sigma2)),
        {"mu": mu, "sigma2": sigma2},
        (-math.inf, math.inf),
    )


def half_normal(sigma):
    """Build the half normal law (|N(0, sigma^2)|)."""
    sigma = float(sigma)
    if not sigma > 0:
        raise ValueError(f"The half normal scale must be positive (got {sigma!r}).")
    return ScipyContinuous(
        "half_normal", stats.halfnorm(scale=sigma), {"sigma": sigma}, (-math.inf, math.inf)
    )


class TruncatedContinuous(ContinuousDist):
    """A continuous law restricted (and renormalized) to [lower, upper]."""

    family = "truncated"

    def __init__(self, base, lower, upper):
        base_lo, base_hi = base.support
        lower, upper = max(float(lower), base_lo), min(float(upper), base_hi)
        if not lower < upper:
            raise ValueError(f"Empty truncation [{lower!r}, {upper!r}] for {base}.")
        self.base = base
        self.support = (lower, upper)
        self._log_mass = float(self._log_between(lower, upper))
        if self._log_mass == -math.inf:
            raise ZeroInterval(f"{base} gives no mass to [{lower!r}, {upper!r}].")

    def params(self):
        """Return the truncation description."""
        lower, upper = self.support
        return {"base": self.base.to_dict(), "lower": lower, "upper": upper}

    @property
    def label(self):
        """Return a short human description."""
        lower, upper = self.support
        return f"{self.base.label} on [{lower:g}, {upper:g}]"

    def _log_between(self, a, b):
        """Return log P(a <= base <= b), supporting infinite ends."""
        a, b = np.broadcast_arrays(np.asarray(a, dtype=float), np.asarray(b, dtype=float))
        with np.errstate(invalid="ignore"):
            finite_case = np.asarray(self.base.log_window_prob(a, b - a))
        result = np.where(np.isneginf(a), self.base.logcdf(b), finite_case)
        result = np.where(np.isposinf(b), self.base.logsf(a), result)
        result = np.where(np.isneginf(a) & np.isposinf(b), 0.0, result)
        return _plain(np.where(b <= a, -np.inf, result))

    def logpdf(self, x):
        """Return the log density."""
        x = np.asarray(x, dtype=float)
        lower, upper = self.support
        inside = (x >= lower) & (x <= upper)
        with np.errstate(divide="ignore"):
            values = np.asarray(self.base.logpdf(np.clip(x, lower, upper))) - self._log_mass
        return _plain(np.where(inside, values, -np.inf))

    def cdf(self, x):
        """Return P(X <= x)."""
        lower, upper = self.support
        x = np.clip(np.asarray(x, dtype=float), lower, upper)
        return _plain(np.exp(np.asarray(self._log_between(lower, x)) - self._log_mass))

    def sf(self, x):
        """Return P(X > x)."""
        lower, upper = self.support
        x = np.clip(np.asarray(x, dtype=float), lower, upper)
        return _plain(np.exp(np.asarray(self._log_between(x, upper)) - self._log_mass))

    def ppf(self, q):
        """Return the quantile function."""
        lower, upper = self.support
        q = np.asarray(q, dtype=float)
        mass = math.exp(self._log_mass)
        below = float(self.base.cdf(lower))
        if below < 0.5:
            values = self.base.ppf(below + q * mass)
        else:
            values = self.base.isf(float(self.base.sf(upper)) + (1 - q) * mass)
        return _plain(np.clip(values, lower, upper))

    def mgf_domain(self):
        """Return the open interval of `lam` where the moment generating function is finite."""
        lam_lo, lam_hi = self.base.mgf_domain()
        lower, upper = self.support
        if math.isfinite(lower):
            lam_lo = -math.inf
        if math.isfinite(upper):
            lam_hi = math.inf
        return lam_lo, lam_hi


def truncated(base, lower, upper):
    """Restrict a continuous law to [lower, upper]."""
    if base.kind != "continuous":
        raise UnsupportedLaw("Only continuous laws can be truncated.")
    if isinstance(base, TruncatedContinuous):
        lower = max(lower, base.support[0])
        upper = min(upper, base.support[1])
        base = base.base
    return TruncatedContinuous(base, lower, upper)


class AffineContinuous(ContinuousDist):
    """The law of scale * X + shift for a continuous X."""

    family = "affine"

    def __init__(self, base, scale, shift):
        self.base = base
        self.scale = float(scale)
        self.shift = float(shift)
        ends = sorted(self.scale * v + self.shift for v in base.support)
        self.support = (ends[0], ends[1])

    def params(self):
        """Return the transformation description."""
        return {"base": self.base.to_dict(), "scale": self.scale, "shift": self.shift}

    @property
    def label(self):
        """Return a short human description."""
        return f"{self.scale:g} * {self.base.label} + {self.shift:g}"

    def _back(self, y):
        return (np.asarray(y, dtype=float) - self.shift) / self.scale

    def logpdf(self, x):
        """Return the log density."""
        return _plain(np.asarray(self.base.logpdf(self._back(x))) - math.log(abs(self.scale)))

    def cdf(self, x):
        """Return P(X <= x)."""
        if self.scale > 0:
            return self.base.cdf(self._back(x))
        return self.base.sf(self._back(x))

    def sf(self, x):
        """Return P(X > x)."""
        if self.scale > 0:
            return self.base.sf(self._back(x))
        return self.base.cdf(self._back(x))

    def logcdf(self, x):
        """Return the log of the cumulative distribution."""
        if self.scale > 0:
            return self.base.logcdf(self._back(x))
        return self.base.logsf(self._back(x))

    def logsf(self, x):
        """Return the log of the survival function."""
        if self.scale > 0:
            return self.base.logsf(self._back(x))
        return self.base.logcdf(self._back(x))

    def ppf(self, q):
        """Return the quantile function."""
        inner = self.base.ppf(q) if self.scale > 0 else self.base.isf(q)
        return _plain(self.scale * np.asarray(inner) + self.shift)

    def isf(self, q):
        """Return the inverse survival function."""
        inner = self.base.isf(q) if self.scale > 0 else self.base.ppf(q)
        return _plain(self.scale * np.asarray(inner) + self.shift)

    def log_window_prob(self, lower, delta):
        """Return log P(lower <= X <= lower + delta), vectorized over `lower`."""
        lower = np.asarray(lower, dtype=float)
        width = delta / abs(self.scale)
        if self.scale > 0:
            return self.base.log_window_prob(self._back(lower), width)
        return self.base.log_window_prob(self._back(lower + delta), width)

    def truncation(self):
        """Return (lower, upper, discarded mass) of the effective support used numerically."""
        lower, upper, discarded = self.base.truncation()
        ends = sorted((self.scale * lower + self.shift, self.scale * upper + self.shift))
        return ends[0], ends[1], discarded

    def breakpoints(self):
        """Return the points where the density is not smooth."""
        return self.scale * np.asarray(self.base.breakpoints()) + self.shift

    def mean(self):
        """Return the expected value."""
        return self.scale * self.base.mean() + self.shift

    def var(self):
        """Return the variance."""
        return self.scale ** 2 * self.base.var()

    def moment(self, k):
        """Return the raw moment of order k."""
        total = 0.0
        for j in range(k + 1):
            base_moment = 1.0 if j == 0 else self.base.moment(j)
            total += math.comb(k, j) * self.scale ** j * self.shift ** (k - j) * base_moment
        return total

    def draw(self, count, rng):
        """Draw `count` values using the given generator."""
        return self.scale * np.asarray(self.base.draw(count, rng)) + self.shift

    def mgf_domain(self):
        """Return the open interval of `lam` where the moment generating function is finite."""
        lower, upper = self.base.mgf_domain()
        if self.scale > 0:
            return lower / self.scale, upper / self.scale
        return upper / self.scale, lower / self.scale

    def cumulants(self, lam):
        """Return (A, A', A'') of the log moment generating function at `lam`."""
        value, first, second = self.base.cumulants(self.scale * lam)
        return value + self.shift * lam, self.scale * first + self.shift, self.scale ** 2 * second


def affine(dist, scale, shift):
    """Return the law of scale * X + shift, simplified to a named family when possible."""
    scale, shift = float(scale), float(shift)
    if scale == 0 or not (math.isfinite(scale) and math.isfinite(shift)):
        raise ValueError(f"Invalid affine map (scale={scale!r}, shift={shift!r}).")
    if scale == 1 and shift == 0:
        return dist
    if dist.kind == "discrete":
        if scale < 0:
            raise UnsupportedLaw("Discrete laws only support increasing affine maps.")
        return dist.relabel(scale * dist.lattice_scale, scale * dist.lattice_shift + shift)
    if isinstance(dist, AffineContinuous):
        return affine(dist.base, scale * dist.scale, scale * dist.shift + shift)

    params = dist.params()
    if dist.family == "normal":
        return normal(scale * params["mu"] + shift, scale ** 2 * params["sigma2"])
    if dist.family == "uniform":
        ends = sorted((scale * params["a"] + shift, scale * params["b"] + shift))
        return uniform(*ends)
    if scale > 0 and shift == 0:
        if dist.family == "exponential":
            return exponential(params["rate"] / scale)
        if dist.family == "gamma":
            return gamma(params["shape"], params["rate"] / scale)
    return AffineContinuous(dist, scale, shift)


class TabulatedContinuous(ContinuousDist):
    """A piecewise linear density given by its values at increasing knots."""

    family = "tabulated"

    def __init__(self, knots, values):
        knots = np.asarray(knots, dtype=float)
        values = np.asarray(values, dtype=float)
        if knots.ndim != 1 or knots.size < 2 or knots.shape != values.shape:
            raise InvalidTable("A tabulated density needs at least two (x, p) pairs.")
        if not np.all(np.isfinite(knots)) or not np.all(np.isfinite(values)):
            raise InvalidTable("The tabulated density has non finite entries.")
        if np.any(np.diff(knots) <= 0):
            raise InvalidTable("The tabulated density knots must be strictly increasing.")
        if np.any(values < 0):
            raise InvalidTable("The tabulated density can not be negative.")
        total = float(np.sum(np.diff(knots) * (values[:-1] + values[1:]) / 2))
        if not total > 0:
            raise InvalidTable("The tabulated density has no mass.")
        self.renormalization = 1 / total
        self._x = knots
        self._p = values / total
        self._width = np.diff(knots)
        self._slope = np.diff(self._p) / self._width
        panel_mass = self._width * (self._p[:-1] + self._p[1:]) / 2
        self._cum = np.concatenate(([0.0], np.cumsum(panel_mass)))
        self._cum /= self._cum[-1]
        self.support = (float(knots[0]), float(knots[-1]))

    def params(self):
        """Return the table size and range."""
        return {"knots": int(self._x.size), "lower": self.support[0], "upper": self.support[1]}

    def pdf(self, x):
        """Return the density."""
        return _plain(np.interp(x, self._x, self._p, left=0.0, right=0.0))

    def logpdf(self, x):
        """Return the log density."""
        with np.errstate(divide="ignore"):
            return _plain(np.log(np.asarray(self.pdf(x))))

    def _panel(self, x):
        return np.clip(np.searchsorted(self._x, x, side="right") - 1, 0, self._x.size - 2)

    def cdf(self, x):
        """Return P(X <= x)."""
        x = np.clip(np.asarray(x, dtype=float), self._x[0], self._x[-1])
        i = self._panel(x)
        t = x - self._x[i]
        values = self._cum[i] + self._p[i] * t + self._slope[i] * t ** 2 / 2
        return _plain(np.clip(values, 0.0, 1.0))

    def ppf(self, q):
        """Return the quantile function."""
        q = np.clip(np.asarray(q, dtype=float), 0.0, 1.0)
        i = np.clip(np.searchsorted(self._cum, q, side="right") - 1, 0, self._x.size - 2)
        rest = q - self._cum[i]
        start = self._p[i]
        # positive root of slope * t^2 / 2 + start * t - rest = 0, written without cancellation
        root = np.sqrt(np.clip(start ** 2 + 2 * self._slope[i] * rest, 0.0, None))
        denominator = start + root
        with np.errstate(divide="ignore", invalid="ignore"):
            t = np.where(denominator > 0, 2 * rest / denominator, 0.0)
        return _plain(np.clip(self._x[i] + t, self._x[i], self._x[i + 1]))

    def breakpoints(self):
        """Return the points where the density is not smooth."""
        return self._x


class DensityContinuous(ContinuousDist):
    """A law given by an unnormalized log density on a bounded interval.

    The normalizer and the cumulative distribution come from a composite Gauss-Legendre
    grid; the quantiles from inverting a table of the cumulative masses at the panel
    edges, polished with a few Newton steps.
    """

    family = "density"

    def __init__(self, log_density, lower, upper, breakpoints=(), label="density", panels=256):
        lower, upper = float(lower), float(upper)
        if not (math.isfinite(lower) and math.isfinite(upper) and lower < upper):
            raise UnsupportedLaw(
                f"A numeric density needs a bounded support (got [{lower!r}, {upper!r}])."
            )
        self._log_density = log_density
        self._label = label
        self.support = (lower, upper)
        self._breaks = np.asarray(breakpoints, dtype=float)

        edges = quadrature.clean_edges(
            np.concatenate([quadrature.uniform_edges(lower, upper, panels), self._breaks]),
            lower,
            upper,
        )
        nodes, weights = quadrature.panel_nodes(edges)
        log_terms = self._raw(nodes) + np.log(weights)
        self.log_normalizer = float(special.logsumexp(log_terms))
        if not math.isfinite(self.log_normalizer):
            raise ZeroInterval(f"The density {label} has no mass on [{lower:g}, {upper:g}].")
        panel_mass = np.exp(log_terms - self.log_normalizer).reshape(-1, quadrature.LEGENDRE_ORDER)
        self._edges = edges
        self._cum = np.concatenate(([0.0], np.cumsum(panel_mass.sum(axis=1))))

    @property
    def label(self):
        """Return a short human description."""
        return self._label

    def params(self):
        """Return the support of the density."""
        return {"lower": self.support[0], "upper": self.support[1]}

    def _raw(self, x):
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            values = np.asarray(self._log_density(x), dtype=float)
        return np.where(np.isnan(values), -np.inf, values)

    def logpdf(self, x):
        """Return the log density."""
        x = np.asarray(x, dtype=float)
        lower, upper = self.support
        inside = (x >= lower) & (x <= upper)
        values = self._raw(np.clip(x, lower, upper)) - self.log_normalizer
        return _plain(np.where(inside, values, -np.inf))

    def cdf(self, x):
        """Return P(X <= x)."""
        lower, upper = self.support
        x = np.clip(np.asarray(x, dtype=float), lower, upper)
        flat = np.atleast_1d(x).ravel()
        j = np.clip(np.searchsorted(self._edges, flat, side="right") - 1, 0, self._edges.size - 2)
        partial = quadrature.partial_integrals(self.pdf, self._edges[j], flat)
        values = np.clip(self._cum[j] + partial, 0.0, 1.0).reshape(x.shape)
        return _plain(values)

    def breakpoints(self):
        """Return the points where the density is not smooth."""
        return np.concatenate([np.asarray(self.support), self._breaks])

    def ppf(self, q):
        """Return the quantile function."""
        lower, upper = self.support
        q = np.clip(np.asarray(q, dtype=float), 0.0, 1.0)
        x = np.interp(q, self._cum, self._edges)
        for _ in range(3):
            density = np.asarray(self.pdf(x))
            with np.errstate(divide="ignore", invalid="ignore"):
                step = np.where(density > 0, (np.asarray(self.cdf(x)) - q) / density, 0.0)
            x = np.clip(x - step, lower, upper)
        return _plain(x)


def _lattice_closed_cumulants(family, t, params):
    if family == "poisson":
        mu = params["mu"]
        return mu * math.expm1(t), mu * math.exp(t), mu * math.exp(t)
    n = params.get("n", 1)
    p = params["p"]
    base = 1 + p * math.expm1(t)
    tilted = p * math.exp(t) / base
    return n * math.log(base), n * tilted, n * tilted * (1 - tilted)


class DiscreteDist(Distribution):
    """A law on the lattice `lattice_scale * k + lattice_shift` (k integer)."""

    kind = "discrete"

    def __init__(self, lattice_scale=1.0, lattice_shift=0.0):
        if not lattice_scale > 0:
            raise UnsupportedLaw(f"The lattice step must be positive (got {lattice_scale!r}).")
        self.lattice_scale = float(lattice_scale)
        self.lattice_shift = float(lattice_shift)

    def relabel(self, lattice_scale, lattice_shift):
        """Return the same index law on another lattice."""
        clone = object.__new__(self.__class__)
        clone.__dict__.update(self.__dict__)
        clone.__dict__.pop("_indices", None)
        DiscreteDist.__init__(clone, lattice_scale, lattice_shift)
        return clone

    def to_dict(self):
        """Return a serializable representation."""
        result = super().to_dict()
        result["lattice"] = {"scale": self.lattice_scale, "shift": self.lattice_shift}
        return result

    # index level primitives, provided by the subclasses
    def _logpmf_index(self, k):
        raise NotImplementedError()

    def _cdf_index(self, k):
        raise NotImplementedError()

    def _sf_index(self, k):
        raise NotImplementedError()

    def _index_bounds(self):
        raise NotImplementedError()

    def _draw_index(self, count, rng):
        raise NotImplementedError()

    def _logcdf_index(self, k):
        with np.errstate(divide="ignore"):
            return np.log(self._cdf_index(k))

    def _logsf_index(self, k):
        with np.errstate(divide="ignore"):
            return np.log(self._sf_index(k))

    def _to_index(self, x):
        return (np.asarray(x, dtype=float) - self.lattice_shift) / self.lattice_scale

    @functools.cached_property
    def _indices(self):
        lower, upper = self._index_bounds()
        candidates = np.arange(lower, upper + 1)
        return candidates[np.exp(self._logpmf_index(candidates)) > 0]

    def indices(self):
        """Return the lattice indices with positive mass (infinite supports truncated)."""
        return self._indices

    def positions(self):
        """Return the support points (infinite supports truncated)."""
        return self.lattice_scale * self._indices + self.lattice_shift

    @property
    def support(self):
        """Return the hull of the support points."""
        positions = self.positions()
        return float(positions[0]), float(positions[-1])

    def truncation(self):
        """Return (lower, upper, discarded mass) of the enumerated support."""
        lower, upper = self.support
        k = self._indices
        discarded = float(self._cdf_index(k[0] - 1)) + float(self._sf_index(k[-1]))
        return lower, upper, discarded

    def logpmf(self, x):
        """Return log P(X = x), -inf off the lattice."""
        u = self._to_index(x)
        k = np.rint(u)
        on_lattice = np.abs(u - k) <= LATTICE_EPS * np.maximum(1.0, np.abs(k))
        with np.errstate(divide="ignore"):
            values = np.asarray(self._logpmf_index(k), dtype=float)
        return _plain(np.where(on_lattice, values, -np.inf))

    def pmf(self, x):
        """Return P(X = x)."""
        return _plain(np.exp(self.logpmf(x)))

    def cdf(self, x):
        """Return P(X <= x)."""
        return _plain(self._cdf_index(np.floor(self._to_index(x) + LATTICE_EPS)))

    def cdf_left(self, x):
        """Return P(X < x)."""
        return _plain(self._cdf_index(np.ceil(self._to_index(x) - LATTICE_EPS) - 1))

    def sf(self, x):
        """Return P(X > x)."""
        return _plain(self._sf_index(np.floor(self._to_index(x) + LATTICE_EPS)))

    def log_window_prob(self, lower, delta):
        """Return log P(lower <= X <= lower + delta), vectorized over `lower`."""
        lower = np.asarray(lower, dtype=float)
        k_lo = np.ceil(self._to_index(lower) - LATTICE_EPS)
        k_hi = np.floor(self._to_index(lower + delta) + LATTICE_EPS)
        logcdf_hi = np.asarray(self._logcdf_index(k_hi))
        via_cdf = _log_diff(logcdf_hi, np.asarray(self._logcdf_index(k_lo - 1)))
        via_sf = _log_diff(
            np.asarray(self._logsf_index(k_lo - 1)), np.asarray(self._logsf_index(k_hi))
        )
        result = np.where(logcdf_hi < _LOG_HALF, via_cdf, via_sf)
        return _plain(np.where(k_hi < k_lo, -np.inf, result))

    def expect(self, func):
        """Return the expectation of func(X)."""
        positions = self.positions()
        probs = np.exp(self._logpmf_index(self._indices))
        return float(np.sum(probs * func(positions)))

    def draw(self, count, rng):
        """Draw `count` values using the given generator."""
        return self.lattice_scale * np.asarray(self._draw_index(count, rng)) + self.lattice_shift

    def mgf_domain(self):
        """Return the open interval of `lam` where the moment generating function is finite."""
        return -math.inf, math.inf

    def _index_cumulants(self, t):
        probs_log = np.asarray(self._logpmf_index(self._indices))
        k = self._indices.astype(float)
        log_terms = probs_log + t * k
        big = special.logsumexp(log_terms)
        weights = np.exp(log_terms - big)
        first = float(np.sum(weights * k))
        return float(big), first, float(np.sum(weights * (k - first) ** 2))

    def cumulants(self, lam):
        """Return (A, A', A'') of the log moment generating function at `lam`."""
        lam = float(lam)
        value, first, second = self._index_cumulants(self.lattice_scale * lam)
        return (
            value + self.lattice_shift * lam,
            self.lattice_scale * first + self.lattice_shift,
            self.lattice_scale ** 2 * second,
        )


def _first_index(predicate, start, limit):
    """Return the smallest integer k >= start where predicate(k) holds, None if not up to limit.

    The predicate must be monotone: once true it stays true. The search doubles its step
    and then bisects.
    """
    low = math.floor(start)
    if predicate(low):
        return low
    step = 1
    while True:
        high = low + step
        if high >= limit:
            high = int(limit)
            if not predicate(high):
                return None
            break
        if predicate(high):
            break
        low = high
        step *= 2
        if step > 2 ** 62:
            return None
    while high - low > 1:
        middle = (low + high) // 2
        if predicate(middle):
            high = middle
        else:
            low = middle
    return high


class ScipyDiscrete(DiscreteDist):
    """A named integer family backed by a frozen scipy distribution."""

    def __init__(self, family, frozen, params, lattice_scale=1.0, lattice_shift=0.0):
        super().__init__(lattice_scale, lattice_shift)
        self.family = family
        self._frozen = frozen
        self._params = dict(params)

    def params(self):
        """Return the family parameters."""
        return dict(self._params)

    def _logpmf_index(self, k):
        return self._frozen.logpmf(k)

    def _cdf_index(self, k):
        return self._frozen.cdf(k)

    def _sf_index(self, k):
        return self._frozen.sf(k)

    def _logcdf_index(self, k):
        return self._frozen.logcdf(k)

    def _logsf_index(self, k):
        return self._frozen.logsf(k)

    def _index_bounds(self):
        # walk the log tails from the median; some scipy versions give nan for isf(1e-18)
        support_lower, support_upper = (float(end) for end in self._frozen.support())
        median = float(self._frozen.median())
        if not math.isfinite(median):
            raise InvalidDistribution(f"The median of {self.label} is not finite.")
        upper = _first_index(
            lambda k: self._frozen.logsf(k) <= _LOG_LATTICE_TAIL, median, support_upper
        )
        below = _first_index(
            lambda j: self._frozen.logcdf(-j) < _LOG_LATTICE_TAIL, -median, -support_lower
        )
        upper = support_upper if upper is None else upper
        lower = support_lower if below is None else 1 - below
        if not (math.isfinite(lower) and math.isfinite(upper)):
            raise InvalidDistribution(
                f"Cannot bound the lattice of {self.label} at tail probability {LATTICE_TAIL:g}."
            )
        return int(lower), int(upper)

    def _draw_index(self, count, rng):
        return self._frozen.rvs(size=count, random_state=rng)

    def _index_cumulants(self, t):
        return _lattice_closed_cumulants(self.family, t, self._params)

    def hull(self):
        """Return the ends of the convex hull of the support (possibly infinite)."""
        lower, upper = self._frozen.support()
        return (
            self.lattice_scale * float(lower) + self.lattice_shift,
            self.lattice_scale * float(upper) + self.lattice_shift,
        )

    def mean(self):
        """Return the expected value."""
        return self.lattice_scale * float(self._frozen.mean()) + self.lattice_shift

    def var(self):
        """Return the variance."""
        return self.lattice_scale ** 2 * float(self._frozen.var())


def poisson(mu):
    """Build the Poisson law with the given mean."""
    mu = float(mu)
    if not mu > 0:
        raise ValueError(f"The Poisson mean must be positive (got {mu!r}).")
    return ScipyDiscrete("poisson", stats.poisson(mu), {"mu": mu})


def binomial(n, p):
    """Build the binomial law with n trials of success probability p."""
    if int(n) != n or n < 1 or not 0 < p < 1:
        raise ValueError(f"Invalid binomial parameters (n={n!r}, p={p!r}).")
    return ScipyDiscrete("binomial", stats.binom(int(n), float(p)), {"n": int(n), "p": float(p)})


def bernoulli(p):
    """Build the Bernoulli law with success probability p."""
    if not 0 < p < 1:
        raise ValueError(f"Invalid Bernoulli probability {p!r}.")
    return ScipyDiscrete("bernoulli", stats.bernoulli(float(p)), {"p": float(p)})


class TableDiscrete(DiscreteDist):
    """A law given by the masses of a finite set of lattice indices."""

    family = "table"

    def __init__(self, indices, probs, lattice_scale=1.0, lattice_shift=0.0):
        super().__init__(lattice_scale, lattice_shift)
        indices = np.asarray(indices, dtype=np.int64)
        probs = np.asarray(probs, dtype=float)
        if indices.ndim != 1 or indices.size == 0 or indices.shape != probs.shape:
            raise InvalidTable("A mass table needs at least one (x, p) pair.")
        if np.any(probs < 0) or not np.all(np.isfinite(probs)):
            raise InvalidTable("The masses must be finite and non negative.")
        if np.unique(indices).size != indices.size:
            raise InvalidTable("The mass table has repeated positions.")
        total = float(probs.sum())
        if not total > 0:
            raise InvalidTable("The mass table has no mass.")
        order = np.argsort(indices)
        keep = probs[order] > 0
        self.renormalization = 1 / total
        self._k = indices[order][keep]
        self._p = probs[order][keep] / total
        self._cum = np.cumsum(self._p)
        self._tail = np.cumsum(self._p[::-1])[::-1]

    def params(self):
        """Return the table size."""
        return {"points": int(self._k.size)}

    @property
    def label(self):
        """Return a short human description."""
        if self._k.size == 1:
            return f"point_mass({self.lattice_scale * self._k[0] + self.lattice_shift:g})"
        return super().label

    def _logpmf_index(self, k):
        k = np.asarray(k, dtype=float)
        pos = np.clip(np.searchsorted(self._k, k), 0, self._k.size - 1)
        with np.errstate(divide="ignore"):
            return np.where(self._k[pos] == k, np.log(self._p[pos]), -np.inf)

    def _cdf_index(self, k):
        pos = np.searchsorted(self._k, np.asarray(k, dtype=float), side="right") - 1
        return np.where(pos >= 0, self._cum[np.clip(pos, 0, None)], 0.0)

    def _sf_index(self, k):
        pos = np.searchsorted(self._k, np.asarray(k, dtype=float), side="right")
        return np.where(pos < self._k.size, self._tail[np.clip(pos, None, self._k.size - 1)], 0.0)

    def _index_bounds(self):
        return int(self._k[0]), int(self._k[-1])

    def _draw_index(self, count, rng):
        return rng.choice(self._k, size=count, p=self._p)

    def masses(self):
        """Return the (indices, masses) arrays."""
        return self._k, self._p


def point_mass(c):
    """Build the law concentrated at c."""
    return TableDiscrete([0], [1.0], 1.0, float(c))


def tabulated_mass(positions, probs):
    """Build a discrete law from positions on a common lattice and their masses."""
    positions = np.asarray(positions, dtype=float)
    if positions.size == 0:
        raise InvalidTable("A mass table needs at least one (x, p) pair.")
    ordered = np.unique(positions)
    if np.all(positions == np.rint(positions)):
        step, origin = 1.0, 0.0
    elif ordered.size == 1:
        step, origin = 1.0, float(ordered[0])
    else:
        step, origin = float(np.min(np.diff(ordered))), float(ordered[0])
    u = (positions - origin) / step
    k = np.rint(u)
    if np.any(np.abs(u - k) > 1e-6):
        raise InvalidTable("The mass table positions must lie on a common lattice.")
    return TableDiscrete(k.astype(np.int64), probs, step, origin)


def log_interval_prob_slope(dist, window, method="analytic"):
    """Return d/dh log P(X in [h, h + delta]).

    The analytic method uses the density at both ends; the finite difference one is a
    central difference of the log window probability, kept as a cross check.
    """
    dist = dist.as_law()
    if dist.kind != "continuous":
        raise UnsupportedLaw("The window slope is only defined for continuous laws.")
    log_prob = dist.log_window_prob(window.h, window.delta)
    if log_prob == -math.inf:
        raise ZeroInterval(f"The window {window} has zero probability under {dist.label}.")

    with np.errstate(over="ignore", invalid="ignore"):
        if method == "analytic":
            slope = math.exp(min(float(dist.logpdf(window.upper)) - log_prob, 710.0)) - math.exp(
                min(float(dist.logpdf(window.h)) - log_prob, 710.0)
            )
        elif method == "finite-difference":
            step = min(window.delta, 1e-4) * 1e-2
            forward = dist.log_window_prob(window.h + step, window.delta)
            backward = dist.log_window_prob(window.h - step, window.delta)
            slope = (forward - backward) / (2 * step)
        else:
            raise ValueError(f"Unknown slope method {method!r}.")

    if not math.isfinite(slope):
        raise NonFiniteSlope(f"The window slope for {dist.label} on {window} is not finite.")
    return float(slope)


def interval_prob(dist, window, method="cdf"):
    """Return P(X in window), from the distribution function or by adaptive quadrature."""
    dist = dist.as_law()
    if method == "cdf":
        return dist.interval_prob(window)
    if method != "quadrature":
        raise ValueError(f"Unknown probability method {method!r}.")
    if dist.kind != "continuous":
        raise UnsupportedLaw("Quadrature probabilities need a continuous law.")
    lower, upper, _ = dist.truncation()
    a, b = max(window.h, lower), min(window.upper, upper)
    if a >= b:
        return 0.0
    points = [p for p in dist.breakpoints() if a < p < b] or None
    value, error = integrate.quad(
        dist.pdf, a, b, points=points, epsabs=1e-12, epsrel=1e-12, limit=200
    )
    if error > 1e-10:
        raise QuadratureError(f"The probability of {window} did not converge", error)
    return float(value)


def _fft_power(array, count):
    """Return the `count`-fold self convolution of a probability array."""
    result = None
    power = array
    while count:
        if count & 1:
            result = power if result is None else signal.fftconvolve(result, power)
        count >>= 1
        if count:
            power = signal.fftconvolve(power, power)
    return np.clip(result, 0.0, None)


def _numeric_continuous_sum(dist, count, points):
    lower, upper, discarded = dist.truncation()
    grid = np.linspace(lower, upper, points)
    step = grid[1] - grid[0]
    weights = np.asarray(dist.pdf(grid)) * step
    weights[0] /= 2
    weights[-1] /= 2
    summed = _fft_power(weights, count)
    knots = count * lower + step * np.arange(summed.size)
    density = summed / step
    # sums of bounded densities vanish at both ends of their support
    density[0] = density[-1] = 0.0
    return knots, density, discarded


def _numeric_sum(dist, count):
    if dist.kind == "discrete":
        k = dist.indices()
        dense = np.zeros(k[-1] - k[0] + 1)
        dense[k - k[0]] = np.exp(dist._logpmf_index(k))
        summed = _fft_power(dense, count)
        indices = count * k[0] + np.arange(summed.size)
        keep = summed > 0
        return TableDiscrete(
            indices[keep], summed[keep], dist.lattice_scale, count * dist.lattice_shift
        )

    knots, density, discarded = _numeric_continuous_sum(dist, count, CONVOLUTION_POINTS)
    _, coarse, _ = _numeric_continuous_sum(dist, count, (CONVOLUTION_POINTS + 1) // 2)
    peak = max(float(np.max(density)), 1e-300)
    # the trapezoid error is O(h^2): a third of the gap to the doubled step estimates it
    extrapolation_gap = float(np.max(np.abs(density[::2] - coarse))) / 3

    # keep a bounded number of knots so later grids stay small
    stride = max(1, -(-(knots.size - 1) // CONVOLUTION_KNOTS))
    kept = np.unique(np.append(np.arange(0, knots.size, stride), knots.size - 1))
    resample_gap = float(np.max(np.abs(np.interp(knots, knots[kept], density[kept]) - density)))

    error_bound = count * discarded + (extrapolation_gap + resample_gap) / peak
    result = TabulatedContinuous(knots[kept], density[kept])
    result.convolution_error = error_bound
    logger.debug(
        "Numeric %d-fold convolution of %s (relative error bound %.3g)",
        count,
        dist.label,
        error_bound,
    )
    return result


def sum_law(dist, count):
    """Return the law of the sum of `count` independent copies of the law."""
    count = int(count)
    if count < 1:
        raise ValueError(f"The number of summands must be positive (got {count!r}).")
    if count == 1:
        return dist
    params = dist.params()

    if dist.kind == "discrete":
        if dist.family in ("poisson", "binomial", "bernoulli"):
            if dist.family == "poisson":
                index_law = poisson(count * params["mu"])
            else:
                index_law = binomial(count * params.get("n", 1), params["p"])
            return index_law.relabel(dist.lattice_scale, count * dist.lattice_shift)
    elif dist.family == "exponential":
        return gamma(count, params["rate"])
    elif dist.family == "gamma":
        return gamma(count * params["shape"], params["rate"])
    elif dist.family == "normal":
        return normal(count * params["mu"], count * params["sigma2"])
    elif isinstance(dist, AffineContinuous):
        return affine(sum_law(dist.base, count), dist.scale, count * dist.shift)

    if count > MAX_NUMERIC_SUMMANDS:
        raise UnsupportedConvolution(
            f"No closed form for the sum of {count} copies of {dist.label} and too many "
            f"summands for the numeric convolution (at most {MAX_NUMERIC_SUMMANDS})."
        )
    return _numeric_sum(dist, count)


def bath_sum_family(dist, offset=1):
    """Return n -> law of the sum of n - offset copies (the rest of the system)."""

    def bath(n):
        copies = n - offset
        if copies < 0:
            raise ValueError(f"Can not build a bath of {copies} summands.")
        if copies == 0:
            return point_mass(0.0)
        return sum_law(dist, copies)

    return bath


def standardize(dist, scheme):
    """Return the law of beta_n * (S - mu_n) for the given scheme."""
    return affine(dist, scheme.beta, -scheme.beta * scheme.mu)


def load_table(path, kind="density"):
    """Load a CSV table with a `x,p` header as a density or a mass table."""
    path = pathlib.Path(path)
    try:
        with path.open("rt", encoding="utf8", newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None or [field.strip() for field in header] != ["x", "p"]:
                raise InvalidTable(f"The table {str(path)!r} must start with a 'x,p' header.")
            rows = [row for row in reader if row]
    except OSError as exc:
        raise InvalidTable(f"Cannot read the table {str(path)!r}: {exc}")

    try:
        xs = [float(row[0]) for row in rows]
        ps = [float(row[1]) for row in rows]
    except (ValueError, IndexError):
        raise InvalidTable(f"The table {str(path)!r} has rows that are not two numbers.")

    if kind == "density":
        law = TabulatedContinuous(xs, ps)
    elif kind == "mass":
        law = tabulated_mass(xs, ps)
    else:
        raise ValueError(f"Unknown table kind {kind!r}.")
    if abs(law.renormalization - 1) > 1e-12:
        logger.info("Renormalized the table %r by a factor %.6g", str(path), law.renormalization)
    return law


# name -> (builder, number of arguments)
_PARSERS = {
    "normal": (normal, 2),
    "exp": (exponential, 1),
    "gamma": (gamma, 2),
    "uniform": (uniform, 2),
    "halfnormal": (half_normal, 1),
    "pois": (poisson, 1),
    "binom": (lambda n, p: binomial(int(n), p), 2),
    "bernoulli": (bernoulli, 1),
}


def parse_distribution(text):
    """Build a law from its short description.

    Accepted forms are `normal:MU,SIGMA2`, `exp:RATE`, `gamma:SHAPE,RATE`, `uniform:A,B`,
    `halfnormal:SIGMA`, `pois:MU`, `binom:N,P`, `bernoulli:P`, `table:PATH` (a density)
    and `ptable:PATH` (a mass table).
    """
    name, _, arguments = text.strip().partition(":")
    if name in ("table", "ptable"):
        if not arguments:
            raise InvalidDistribution(f"Missing the table path in {text!r}.")
        return load_table(arguments, "density" if name == "table" else "mass")

    try:
        builder, arity = _PARSERS[name]
    except KeyError:
        known = ", ".join(sorted(list(_PARSERS) + ["table", "ptable"]))
        raise InvalidDistribution(f"Unknown distribution {name!r} (known ones: {known}).")
    try:
        values = [float(value) for value in arguments.split(",")] if arguments else []
    except ValueError:
        raise InvalidDistribution(f"The parameters in {text!r} must be numbers.")
    if len(values) != arity:
        raise InvalidDistribution(f"The distribution {name!r} needs {arity} parameter(s).")
    try:
        return builder(*values)
    except ValueError as exc:
        raise InvalidDistribution(str(exc))


def parse_window(text):
    """Build a window from its `H,DELTA` description."""
    try:
        h, delta = (float(value) for value in text.split(","))
    except ValueError:
        raise InvalidWindow(f"Invalid window {text!r}: it must be 'H,DELTA'.")
    return Interval(h, delta)
