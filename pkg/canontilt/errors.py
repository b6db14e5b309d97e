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

"""Errors raised by the numerical layers.

All of them are CommandErrors, so the dispatcher reports them nicely to the user
(with the log file location) instead of crashing.
"""

from canontilt.cmdbase import CommandError


class InvalidWindow(CommandError):
    """The window is malformed (non positive or non finite width)."""


class UnsupportedLaw(CommandError):
    """The operation is not available for the given kind of distribution."""


class InvalidDistribution(CommandError):
    """A distribution description could not be understood."""


class InvalidTable(CommandError):
    """A tabulated distribution could not be loaded."""


class ZeroInterval(CommandError):
    """The window has zero probability under the law."""


class NonFiniteSlope(CommandError):
    """The log interval probability slope overflowed."""


class QuadratureError(CommandError):
    """A numerical integral did not reach the requested tolerance."""

    def __init__(self, message, error_bound):
        self.error_bound = error_bound
        super().__init__(f"{message} (estimated error {error_bound:.3g})")


class UnsupportedConvolution(CommandError):
    """The law of the sum can not be built for these inputs."""


class DivergentNormalizer(CommandError):
    """The tilted integral diverges."""


class InvalidTilt(CommandError):
    """The tilt parameter or field is not acceptable."""


class InvalidTiltField(InvalidTilt):
    """The tilt field leaves its declared bounds on the support."""


class InvalidInteraction(CommandError):
    """The interaction model does not satisfy its normalization."""


class UnboundedBelow(CommandError):
    """The law is not bounded below by the requested constant."""


class UnboundedAbove(CommandError):
    """The law has no finite upper bound."""


class EmptyWindow(CommandError):
    """The conditioning event has zero probability."""


class UnsupportedDependence(CommandError):
    """A joint law was passed where independent marginals are expected."""


class NonFiniteConditional(CommandError):
    """The user conditional bath returned something that is not a probability."""


class TooFewAccepted(CommandError):
    """Rejection sampling accepted too few draws to build a histogram."""


class GridMismatch(CommandError):
    """The laws can not be put on a common comparison grid."""


class PinskerViolation(CommandError):
    """The total variation exceeded the Pinsker bound (numerical breakdown)."""


class DivergentMGF(CommandError):
    """The moment generating function is infinite at the requested point."""

    def __init__(self, lam, boundary):
        self.boundary = boundary
        super().__init__(
            f"The moment generating function diverges at {lam!r} "
            f"(finiteness boundary detected at {boundary!r})."
        )


class BoundarySupremum(CommandError):
    """The point lies outside the interior of the support hull."""


class MeanInsideWindow(CommandError):
    """The mean lies strictly inside the window (no large deviation)."""


class InfeasibleMean(CommandError):
    """The constraint mean is outside the support hull."""


class HypothesisViolated(CommandError):
    """An experiment hypothesis does not hold for the given parameters."""


class NonPositiveValue(CommandError):
    """A log-log fit received non positive values."""


class ReportWriteError(CommandError):
    """The report could not be written."""


class VerdictFailed(CommandError):
    """The experiment ran fine but its acceptance checks failed."""

    def __init__(self, message):
        super().__init__(message, retcode=2)
