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

import pytest

from canontilt.conditioning import condition_exact, condition_mc, mc_agreement
from canontilt.distributions import Interval
from canontilt.experiments.gibbs import (
    GibbsPhaseSpec,
    PhaseSpaceModel,
    _ratio_gap,
    exp_gibbs_phase,
)
from canontilt.tilting import bath_slope_param


def test_model_energies(rng):
    model = PhaseSpaceModel(2, 20)
    e1, e2 = model.sample(200_000, rng)
    # chi-square means over m
    assert e1.mean() == pytest.approx(2 / 20, rel=0.02)
    assert e2.mean() == pytest.approx(1.0, rel=0.01)
    assert model.subsystem_law().mean() == pytest.approx(2 / 20)
    assert model.bath_law().mean() == pytest.approx(1.0)
    assert model.epsilon() == pytest.approx(math.sqrt(8) / 20)


def test_energy_splits():
    model = PhaseSpaceModel(2, 3)
    v = [[1.0, 2.0, 3.0, 0.0, 1.0]]
    u, w = model.split(v)
    assert model.energy(v) == pytest.approx(model.subsystem_energy(u) + model.bath_energy(w))
    assert model.subsystem_energy(u)[0] == pytest.approx(5 / 3)


def test_energy_additivity_over_draws(rng):
    """e(v) = e1(u) + e2(w) over points drawn from the phase space."""
    model = PhaseSpaceModel(3, 50)
    assert model.additivity_gap(5000, rng) < 1e-13
    v = model.draw(10, rng)
    assert v.shape == (10, 53)


def test_monte_carlo_through_the_phase_space():
    """Rejection sampling on drawn phase space points agrees with the exact conditional."""
    model = PhaseSpaceModel(2, 50)
    window = Interval(0.8, 0.05)
    X, Y = model.subsystem_law(), model.bath_law()
    exact = condition_exact(X, Y, window)
    for seed in (1, 2):
        mc = condition_mc(X, None, window, 1_000_000, seed, sampler=model.sample)
        assert mc.mc_meta["acceptance_rate"] == pytest.approx(exact.mass_in_window, rel=0.02)
        assert mc_agreement(exact, mc) >= 0.95


def test_spec_defaults_run_the_monte_carlo_oracle():
    assert GibbsPhaseSpec.unmarshal({}).mc_samples == 1_000_000


def test_slope_is_structure_function_ratio():
    bath = PhaseSpaceModel(2, 40).bath_law()
    window = Interval(0.8, 0.05)
    lam = bath_slope_param(bath, window).lam
    assert _ratio_gap(bath, window, lam) < 1e-8


def test_small_run():
    spec = GibbsPhaseSpec.unmarshal({"n_grid": [20, 40, 80, 160], "mc_samples": 0})
    report = exp_gibbs_phase(spec)
    assert report.metric == "sup_error"
    metrics = [name for m, name, _ in report.rows if m == 20]
    assert metrics == [
        "sup_error",
        "epsilon",
        "temperature",
        "shell_entropy",
        "oracle_gap",
        "slope_ratio_gap",
        "prior_gap",
        "additivity_gap",
    ]
    assert report.checks["slope_ratio"]
    assert report.checks["energy_additive"]
    assert set(report.checks) == {
        "rate_in_epsilon",
        "oracle",
        "slope_ratio",
        "prior_irrelevance",
        "energy_additive",
    }
