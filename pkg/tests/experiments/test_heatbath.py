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

import pytest

from canontilt.distributions import Interval
from canontilt.experiments.heatbath import (
    HeatBathSpec,
    exp_heatbath_invariance,
    exponential_form_bath,
    linear_rate_function,
    spread,
)
from canontilt.ldp import ldp_tilt_param
from canontilt.tilting import bath_slope_param


def test_spread():
    assert spread([1.0, 3.0, 2.0]) == 2.0


@pytest.mark.parametrize("sub", [Interval(-0.9, 0.1), Interval(-0.3, 0.2), Interval(0.5, 0.4)])
def test_exponential_bath_slope_is_constant(sub):
    bath = exponential_form_bath(2.0, Interval(-1, 2))
    assert bath_slope_param(bath, sub).lam == pytest.approx(2.0, rel=1e-8)


def test_linear_rate_parameter():
    rf = linear_rate_function(-2.0, 1.0, (-10, 10))
    assert ldp_tilt_param(rf, Interval(0.2, 0.1)).lam == 2.0
    assert ldp_tilt_param(rf, Interval(3, 1)).lam == 2.0


def test_full_run():
    report = exp_heatbath_invariance(HeatBathSpec.unmarshal({"seed": 8}))
    spreads = report.summary["spreads"]
    assert spreads["linear_rate"] == 0.0
    assert spreads["cramer_rate"] > 0
    assert report.summary["exponential_bath_slope"] == pytest.approx(2.0, rel=1e-8)
    assert report.checks["exponential_bath_invariant"]
    assert report.checks["normal_bath_contrast"]
    assert report.checks["linear_rate_invariant"]
    assert report.checks["cramer_rate_contrast"]
    assert {name for _, name, _ in report.rows} == {"tv_exponential_bath", "tv_normal_bath"}
