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

"""Exponential tilting and the different ways of getting the tilt parameter."""

import json
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Optional

import numpy as np
from scipy import special

from canontilt import distributions
from canontilt.distributions import (
    AffineContinuous,
    DensityContinuous,
    Interval,
    TableDiscrete,
    TruncatedContinuous,
)
from canontilt.errors import (
    DivergentNormalizer,
    InvalidInteraction,
    InvalidTilt,
    InvalidTiltField,
    QuadratureError,
    UnboundedAbove,
    UnboundedBelow,
)

logger = logging.getLogger(__name__)

PROVENANCES = ("bath-slope", "rate-function", "max-entropy", "user")

# relative step for the derivatives of the interaction functions at zero
_INTERACTION_STEP = 1e-5

# how many doublings are tried when looking for the end of a tilted tail
_MAX_TAIL_DOUBLINGS = 200

# how far below one the normalizer of a positive tilt on [0, inf) may fall numerically
NORMALIZER_SLACK = 1e-9


@dataclass(frozen=True)
class TiltParam:
    """A scalar tilt exponent and where it comes from."""

    lam: float
    provenance: str
    window: Optional[Interval] = None
    scale: float = 1.0
    note: str = ""

    def __post_init__(self):
        object.__setattr__(self, "lam", float(self.lam))
        object.__setattr__(self, "scale", float(self.scale))
        if not math.isfinite(self.lam):
            raise InvalidTilt(f"The tilt parameter must be finite (got {self.lam!r}).")
        if self.provenance not in PROVENANCES:
            known = ", ".join(PROVENANCES)
            raise InvalidTilt(f"Unknown provenance {self.provenance!r} (must be one of {known}).")

    @classmethod
    def user(cls, lam, window=None):
        """Build a parameter given directly by the user."""
        return cls(lam, "user", window)

    @property
    def temperature(self):
        """Return 1 / lambda (infinite for a null tilt)."""
        return math.inf if self.lam == 0 else 1 / self.lam

    def to_dict(self):
        """Return a serializable representation."""
        return {
            "lambda": self.lam,
            "provenance": self.provenance,
            "window": None if self.window is None else self.window.to_dict(),
            "scale": self.scale,
        }

    def to_json(self):
        """Serialize to JSON; floats use their shortest exact representation."""
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text):
        """Load a parameter serialized with `to_json`."""
        data = json.loads(text)
        window = data.get("window")
        return cls(
            data["lambda"],
            data["provenance"],
            None if window is None else Interval(window["h"], window["delta"]),
            data.get("scale", 1.0),
        )


class TiltField:
    """An x dependent tilt exponent, bounded in [0, bound].

    The values are computed once for the given nodes (if any) and validated there.
    """

    def __init__(self, zeta, bound, nodes=None):
        self.zeta = zeta
        self.bound = float(bound)
        self._cache = {}
        if nodes is not None:
            nodes = np.asarray(nodes, dtype=float)
            values = self._validate(nodes, np.asarray(zeta(nodes), dtype=float))
            self._cache = dict(zip(nodes.tolist(), values.tolist()))

    def _validate(self, nodes, values):
        bad = ~np.isfinite(values) | (values < 0) | (values > self.bound)
        if np.any(bad):
            where = float(nodes[np.argmax(bad)])
            raise InvalidTiltField(
                f"The tilt field leaves [0, {self.bound:g}] at x={where!r}."
            )
        return values

    @classmethod
    def constant(cls, lam):
        """Build the field that is `lam` everywhere."""
        return cls(lambda x: np.full(np.shape(x), float(lam)), abs(lam))

    def __call__(self, x):
        """Evaluate the field (validated against its bound)."""
        x = np.asarray(x, dtype=float)
        if x.ndim == 0 and float(x) in self._cache:
            return self._cache[float(x)]
        values = np.broadcast_to(np.asarray(self.zeta(x), dtype=float), x.shape)
        return self._validate(np.atleast_1d(x), np.atleast_1d(values)).reshape(x.shape)


@dataclass(frozen=True)
class TiltedDist:
    """A base law multiplied by exp(-lambda x) (or exp(-zeta(x) x)) and renormalized.

    `law` is the resulting law itself; every distribution method is forwarded to it.
    """

    base: Any
    tilt: Any
    normalizer: float
    law: Any

    def as_law(self):
        """Return the tilted law."""
        return self.law

    def __getattr__(self, name):
        if name.startswith("__") or name == "law":
            raise AttributeError(name)
        return getattr(self.law, name)

    def to_dict(self):
        """Return a serializable representation."""
        tilt = self.tilt.to_dict() if isinstance(self.tilt, TiltParam) else "field"
        return {
            "base": self.base.to_dict(),
            "tilt": tilt,
            "normalizer": self.normalizer,
            "law": self.law.to_dict(),
        }


def _as_param(lam):
    if isinstance(lam, TiltParam):
        return lam
    return TiltParam.user(lam)


def _tilted_bounds(dist, log_weight):
    """Find where the tilted density becomes negligible on the base support.

    The tails are walked outwards with doubling steps; a tail that never dies means the
    tilted integral diverges.
    """
    support_lo, support_hi = dist.support
    lower, upper, _ = dist.truncation()
    grid = np.linspace(lower, upper, 2049)
    values = log_weight(grid)
    finite = values[np.isfinite(values)]
    if finite.size == 0:
        raise DivergentNormalizer(f"The tilted density of {dist.label} vanishes everywhere.")
    cutoff = float(np.max(finite)) + distributions._LOG_TRUNCATION_RATIO
    width = upper - lower

    def walk(point, step, limit):
        for _ in range(_MAX_TAIL_DOUBLINGS):
            value = float(log_weight(point))
            if value <= cutoff or point == limit:
                return point
            point = point + step
            step *= 2
            if (step > 0 and point > limit) or (step < 0 and point < limit):
                point = limit
        raise DivergentNormalizer(f"The tilted integral of {dist.label} diverges.")

    if lower > support_lo:
        lower = walk(lower, -width, support_lo)
    if upper < support_hi:
        upper = walk(upper, width, support_hi)
    if not (math.isfinite(lower) and math.isfinite(upper)):
        raise DivergentNormalizer(f"The tilted integral of {dist.label} diverges.")
    return lower, upper


def _numeric_continuous_tilt(dist, lam):
    def log_weight(x):
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.asarray(dist.logpdf(x), dtype=float) - lam * np.asarray(x)

    lower, upper = _tilted_bounds(dist, log_weight)
    breakpoints = [p for p in dist.breakpoints() if lower < p < upper]
    law = DensityContinuous(
        log_weight, lower, upper, breakpoints, label=f"tilt({dist.label}, {lam:g})"
    )
    logger.debug("Numeric tilt of %s by %g on [%.6g, %.6g]", dist.label, lam, lower, upper)
    return law, -law.log_normalizer


def _closed_continuous_tilt(dist, lam):
    """Return the tilted law when the family is closed under tilting, None otherwise."""
    params = dist.params()
    if dist.family == "exponential":
        return distributions.exponential(params["rate"] + lam)
    if dist.family == "gamma":
        return distributions.gamma(params["shape"], params["rate"] + lam)
    if dist.family == "normal":
        return distributions.normal(params["mu"] - lam * params["sigma2"], params["sigma2"])
    if isinstance(dist, AffineContinuous):
        inner = tilt(dist.base, dist.scale * lam).law
        return distributions.affine(inner, dist.scale, dist.shift)
    if isinstance(dist, TruncatedContinuous):
        lower, upper = dist.support
        return distributions.truncated(tilt(dist.base, lam).law, lower, upper)
    return None


def _discrete_tilt(dist, lam):
    step = dist.lattice_scale * lam
    params = dist.params()
    if dist.family == "poisson":
        law = distributions.poisson(params["mu"] * math.exp(-step))
    elif dist.family in ("binomial", "bernoulli"):
        p = params["p"]
        weight = p * math.exp(-step)
        tilted_p = weight / (1 - p + weight)
        if dist.family == "binomial":
            law = distributions.binomial(params["n"], tilted_p)
        else:
            law = distributions.bernoulli(tilted_p)
    else:
        k = dist.indices()
        log_probs = np.asarray(dist.logpmf(dist.positions())) - step * k
        law = TableDiscrete(k, np.exp(log_probs - special.logsumexp(log_probs)))
    return law.relabel(dist.lattice_scale, dist.lattice_shift)


def tilt(base, lam):
    """Return the law with density proportional to f(x) exp(-lam x).

    `lam` can be a plain number or a TiltParam. Families closed under tilting stay in
    their family; anything else gets a numeric density.
    """
    param = _as_param(lam)
    dist = base.as_law()
    if param.lam == 0:
        return TiltedDist(base, param, 1.0, dist)
    lam = param.lam

    lam_lo, lam_hi = dist.mgf_domain()
    if not lam_lo < -lam < lam_hi:
        raise DivergentNormalizer(
            f"The tilt of {dist.label} by {lam:g} diverges (the moment generating "
            f"function is finite only on ({lam_lo:g}, {lam_hi:g}))."
        )

    if dist.kind == "discrete":
        law = _discrete_tilt(dist, lam)
        normalizer = math.exp(-dist.log_mgf(-lam))
    else:
        try:
            law = _closed_continuous_tilt(dist, lam)
        except DivergentNormalizer:
            # a bounded restriction can be tilted even when its base can not
            law = None
        if law is None:
            law, log_normalizer = _numeric_continuous_tilt(dist, lam)
            normalizer = math.exp(log_normalizer)
        else:
            normalizer = math.exp(-dist.log_mgf(-lam))

    if dist.support[0] >= 0 and lam >= 0 and normalizer < 1 - NORMALIZER_SLACK:
        # f e^{-lam x} <= f on the positive axis, so the integral is at most one
        raise QuadratureError(
            f"The normalizer of the tilt of {dist.label} by {lam:g} is {normalizer:.12g}, "
            "below one: the tilted integral was overestimated",
            1 - normalizer,
        )
    return TiltedDist(base, param, normalizer, law)


def tilt_field(base, zeta_field):
    """Return the law with density proportional to f(x) exp(-zeta(x) x)."""
    dist = base.as_law()
    field_ = zeta_field
    if dist.kind == "discrete":
        positions = dist.positions()
        zeta = np.asarray(field_(positions))
        log_probs = np.asarray(dist.logpmf(positions)) - zeta * positions
        log_total = special.logsumexp(log_probs)
        law = TableDiscrete(dist.indices(), np.exp(log_probs - log_total)).relabel(
            dist.lattice_scale, dist.lattice_shift
        )
        return TiltedDist(base, field_, math.exp(-log_total), law)

    def log_weight(x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.asarray(dist.logpdf(x), dtype=float) - np.asarray(field_(x)) * x

    lower, upper = _tilted_bounds(dist, log_weight)
    breakpoints = [p for p in dist.breakpoints() if lower < p < upper]
    law = DensityContinuous(log_weight, lower, upper, breakpoints, label=f"field({dist.label})")
    return TiltedDist(base, field_, math.exp(-law.log_normalizer), law)


def bath_slope_param(bath, window, scale=1.0):
    """Build the tilt parameter from the slope of the bath window probability."""
    slope = distributions.log_interval_prob_slope(bath, window)
    return TiltParam(scale * slope, "bath-slope", window, scale)


@dataclass(frozen=True)
class InteractionModel:
    """Multiplicative couplings G and R between the small system and the rest.

    Both are functions of (xi, window) equal to one at xi = 0; their log derivatives at
    zero correct the tilt parameter.
    """

    window: Interval
    G: Callable[[float, Interval], float]
    R: Callable[[float, Interval], float]
    dlogG0: float
    dlogR0: float
    label: str = field(default="custom")

    @staticmethod
    def _dlog_at_zero(func, window, name):
        value = float(func(0.0, window))
        if abs(value - 1) > 1e-12:
            raise InvalidInteraction(f"{name}(0) must be 1 (got {value!r}).")
        step = _INTERACTION_STEP
        forward, backward = float(func(step, window)), float(func(-step, window))
        if not (forward > 0 and backward > 0):
            raise InvalidInteraction(f"{name} must be positive around 0.")
        return (math.log(forward) - math.log(backward)) / (2 * step)

    @classmethod
    def from_functions(cls, window, G, R=None):
        """Build the model from the coupling functions (R defaults to G)."""
        R = G if R is None else R
        return cls(
            window,
            G,
            R,
            cls._dlog_at_zero(G, window, "G"),
            cls._dlog_at_zero(R, window, "R"),
        )

    @classmethod
    def independent(cls, window):
        """Build the model without interaction."""
        return cls(window, lambda xi, w: 1.0, lambda xi, w: 1.0, 0.0, 0.0, "independent")

    @classmethod
    def exponential(cls, c, window):
        """Build G = R = exp(c xi)."""
        c = float(c)
        return cls(
            window,
            lambda xi, w: math.exp(c * xi),
            lambda xi, w: math.exp(c * xi),
            c,
            c,
            f"exponential({c:g})",
        )

    @classmethod
    def linear(cls, c, window):
        """Build G = R = 1 + c xi."""
        c = float(c)
        return cls(
            window, lambda xi, w: 1 + c * xi, lambda xi, w: 1 + c * xi, c, c, f"linear({c:g})"
        )


def corrected_param(param, interaction, mode="smooth"):
    """Apply the interaction correction to a parameter.

    `mode` is "smooth" (uses G) or "ldp" (uses R); the derivative is taken at the
    parameter's own scale.
    """
    if mode == "smooth":
        derivative = interaction.dlogG0
    elif mode == "ldp":
        derivative = interaction.dlogR0
    else:
        raise ValueError(f"Unknown correction mode {mode!r}.")
    note = f"corrected by {derivative:.6g} ({interaction.label}, {mode})"
    return TiltParam(
        param.lam - param.scale * derivative, param.provenance, param.window, param.scale, note
    )


def shift_transform(dist, C=None):
    """Return the law of X - C for a law bounded below by C (its lower end if not given)."""
    lower = dist.as_law().support[0]
    if not math.isfinite(lower):
        raise UnboundedBelow(f"{dist.label} is not bounded below.")
    if C is None:
        C = lower
    if C > lower:
        raise UnboundedBelow(f"{dist.label} is not bounded below by {C!r}.")
    return distributions.affine(dist.as_law(), 1.0, -C)


def unshift_transform(dist, C):
    """Undo `shift_transform`."""
    return distributions.affine(dist.as_law(), 1.0, C)


def reflect_transform(dist):
    """Return the law of -X for a law bounded above."""
    upper = dist.as_law().support[1]
    if not math.isfinite(upper):
        raise UnboundedAbove(f"{dist.label} is not bounded above.")
    return distributions.affine(dist.as_law(), -1.0, 0.0)
