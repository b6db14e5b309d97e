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

from canontilt.experiments.gauss import GaussTemperatureSpec, exp_gauss_temperature


def test_spec_defaults():
    spec = GaussTemperatureSpec.unmarshal({})
    assert spec.perturbations == [0.75, 1.25]
    assert spec.interaction_c is None
    assert spec.beats_from == 100


def test_small_run():
    spec = GaussTemperatureSpec.unmarshal({"n_grid": [4, 9, 16, 25], "mc_samples": 0})
    report = exp_gauss_temperature(spec)
    assert report.metric == "scaled_kl"
    metrics = {name for _, name, _ in report.rows}
    assert metrics == {
        "scaled_kl",
        "scaled_kl[x0.75]",
        "scaled_kl[x1.25]",
        "kl",
        "tv",
        "zabell_kl",
        "temperature",
    }
    assert set(report.checks) == {
        "correct_decreasing",
        "zabell_vanishing",
        "dominance_x0.75",
        "dominance_x1.25",
    }
    # exponential summands: mean and variance 1
    assert report.summary["mean"] == pytest.approx(1.0)
    assert report.summary["variance"] == pytest.approx(1.0)


def test_beats_checked_from_the_configured_n():
    spec = GaussTemperatureSpec.unmarshal(
        {"n_grid": [4, 9, 16, 25], "mc_samples": 0, "beats_from": 16}
    )
    report = exp_gauss_temperature(spec)
    assert {"beats_correct_x0.75", "beats_correct_x1.25"} <= set(report.checks)
    assert len(report.summary["beats_correct_x1.25"]) == 4


def test_default_grid_perturbed_curve_dominates():
    """With the window at n mu + sqrt(n) I, +25% stays above the right slope from n = 100."""
    spec = GaussTemperatureSpec.unmarshal({"mc_samples": 0})
    report = exp_gauss_temperature(spec)
    assert report.checks["correct_decreasing"]
    assert report.checks["dominance_x1.25"]
    assert report.checks["beats_correct_x1.25"]
    correct = {n: v for n, name, v in report.rows if name == "scaled_kl"}
    raised = {n: v for n, name, v in report.rows if name == "scaled_kl[x1.25]"}
    assert all(raised[n] > correct[n] for n in (100, 400, 1600))
    assert correct[1600] < 1e-3


def test_with_interaction():
    spec = GaussTemperatureSpec.unmarshal(
        {"n_grid": [4, 9, 16, 25], "mc_samples": 0, "interaction_c": 0.1, "perturbations": [2.0]}
    )
    report = exp_gauss_temperature(spec)
    assert "scaled_kl[x2]" in {name for _, name, _ in report.rows}
