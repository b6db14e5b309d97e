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

import math

import numpy as np
import pytest

from canontilt.cmdbase import CommandError
from canontilt.distributions import exponential, normal
from canontilt.experiments.clt import (
    BERRY_ESSEEN_C,
    CltErrorSpec,
    berry_esseen_bound,
    exp_clt_error,
    kolmogorov_error,
    standardized_sum,
)

ZS = np.linspace(-4, 4, 200)


def test_berry_esseen_bound_exponential():
    # E|X - 1|^3 = 12 / e - 2 for the unit exponential
    expected = BERRY_ESSEEN_C * (12 / math.e - 2) / 2
    assert berry_esseen_bound(exponential(1), 4) == pytest.approx(expected, rel=1e-6)


def test_standardized_normal_sum_is_standard():
    assert kolmogorov_error(standardized_sum(normal(0, 1), 50), ZS) < 1e-12


@pytest.mark.parametrize("n", [4, 16, 64])
def test_error_below_berry_esseen(n):
    X = exponential(1)
    error = kolmogorov_error(standardized_sum(X, n), ZS)
    assert 0 < error <= berry_esseen_bound(X, n)


def test_bad_z_range():
    with pytest.raises(CommandError) as cm:
        CltErrorSpec.unmarshal({"z_range": [1.0, -1.0]})
    assert "the lower end must be below the upper end" in str(cm.value)


def test_bad_summand():
    with pytest.raises(CommandError) as cm:
        CltErrorSpec.unmarshal({"summands": ["exp:1", "cauchy:0,1"]})
    assert "Unknown distribution 'cauchy'" in str(cm.value)


def test_continuous_summands():
    spec = CltErrorSpec.unmarshal({"summands": ["exp:1", "normal:0,1"]})
    report = exp_clt_error(spec)
    assert report.metric == "sup_error[exp:1]"
    assert report.checks["berry_esseen[exp:1]"]
    assert report.checks["berry_esseen[normal:0,1]"]
    assert report.checks["exact_normal[normal:0,1]"]
    assert report.checks["rate[exp:1]"]
    assert set(report.summary["fits"]) == {"exp:1"}
