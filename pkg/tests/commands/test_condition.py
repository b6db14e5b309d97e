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
from argparse import Namespace

import pytest
from scipy import stats

from canontilt.cmdbase import CommandError
from canontilt.commands.condition import ConditionCommand


def _args(**kwargs):
    values = {name: None for name in ConditionCommand.param_names}
    values.update(kwargs)
    return Namespace(**values)


def test_exact_with_bath(config, read_report):
    cmd = ConditionCommand(config())
    cmd.run(_args(x="normal:0,1", y="normal:0,1", window=[0.0, 1.0]))
    data = read_report()

    assert data["kind"] == "condition"
    assert data["columns"] == ["x", "density"]
    result = data["result"]
    assert result["window"] == result["raw_window"] == {"h": 0.0, "delta": 1.0}
    assert "scheme" not in result
    s = stats.norm(0, math.sqrt(2))
    assert result["law"]["method"] == "bayes-exact"
    assert result["law"]["mass_in_window"] == pytest.approx(s.cdf(1) - s.cdf(0), rel=1e-10)
    assert len(data["rows"]) == result["law"]["points"]


def test_large_deviation_scheme(config, read_report):
    cmd = ConditionCommand(config())
    cmd.run(_args(x="exp:1", n=5, scheme="ldp", window=[1.5, 0.5]))
    result = read_report()["result"]

    assert result["scheme"]["label"] == "large-deviation"
    assert result["y"]["params"] == {"shape": 4.0, "rate": 1.0}
    raw = result["raw_window"]
    assert (raw["h"], raw["delta"]) == pytest.approx((7.5, 2.5))
    metadata = result["law"]["metadata"]
    assert metadata["n"] == 5
    assert metadata["scheme"] == "large-deviation"
    total = stats.gamma(5)
    assert result["law"]["mass_in_window"] == pytest.approx(
        total.cdf(10) - total.cdf(7.5), rel=1e-9
    )


def test_gaussian_scheme_by_default(config, read_report):
    cmd = ConditionCommand(config())
    cmd.run(_args(x="exp:1", n=4, window=[0.0, 1.0]))
    result = read_report()["result"]
    assert result["scheme"]["label"] == "gaussian"
    assert result["scheme"]["mu"] == pytest.approx(4.0)
    raw = result["raw_window"]
    assert (raw["h"], raw["delta"]) == pytest.approx((4.0, 2.0))


def test_monte_carlo(config, read_report):
    cmd = ConditionCommand(config(seed=5))
    cmd.run(_args(x="exp:1", y="exp:1", window=[1.0, 1.0], method="mc", samples=20_000))
    data = read_report()
    assert data["columns"] == ["x", "density", "stderr"]
    law = data["result"]["law"]
    assert law["method"] == "mc-rejection"
    assert law["mc_meta"]["seed"] == 5
    assert law["mc_meta"]["samples"] == 20_000
    assert all(len(row) == 3 for row in data["rows"])


def test_monte_carlo_is_reproducible(config, read_report):
    args = dict(x="exp:1", y="exp:1", window=[1.0, 1.0], method="mc", samples=20_000)
    ConditionCommand(config(seed=9)).run(_args(**args))
    first = read_report()["rows"]
    ConditionCommand(config(seed=9)).run(_args(**args))
    assert read_report()["rows"] == first


@pytest.mark.parametrize(
    "params, message",
    [
        ({"x": "exp:1"}, "The --x and --window options are required."),
        (
            {"x": "exp:1", "window": [1.0, 1.0]},
            "Indicate the bath with exactly one of --y or --n.",
        ),
        (
            {"x": "exp:1", "y": "exp:1", "n": 3, "window": [1.0, 1.0]},
            "Indicate the bath with exactly one of --y or --n.",
        ),
        (
            {"x": "exp:1", "y": "exp:1", "scheme": "ldp", "window": [1.0, 1.0]},
            "The --scheme option only applies with --n.",
        ),
        (
            {"x": "exp:1", "y": "exp:1", "method": "quad", "window": [1.0, 1.0]},
            "Unknown method 'quad' (must be 'exact' or 'mc').",
        ),
        ({"x": "exp:1", "n": 1, "window": [1.0, 1.0]}, "The --n option must be at least 2."),
    ],
)
def test_bad_params(config, params, message):
    cmd = ConditionCommand(config())
    with pytest.raises(CommandError) as cm:
        cmd.run(_args(**params))
    assert str(cm.value) == message


def test_unknown_param_in_config(config):
    cmd = ConditionCommand(config(params={"x": "exp:1", "bath": "exp:1"}))
    with pytest.raises(CommandError) as cm:
        cmd.run(_args())
    assert str(cm.value) == "Unknown parameter(s) for command 'condition' in the config: bath"
