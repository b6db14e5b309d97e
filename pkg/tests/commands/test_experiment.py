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

from argparse import Namespace

import pytest

from canontilt.cmdbase import CommandError
from canontilt.commands.experiment import ExperimentCommand
from canontilt.errors import VerdictFailed
from canontilt.experiments import EXPERIMENTS

LDP_PARAMS = {"name": "exp_ldp_temperature", "n_grid": [25, 50, 100, 200]}


def test_overview_lists_experiments():
    for name in EXPERIMENTS:
        assert f"- {name}" in ExperimentCommand.overview


def test_name_from_option(config):
    cmd = ExperimentCommand(config(params={"n_grid": [1, 2, 3, 4]}))
    params = cmd.resolve_params(Namespace(name="exp_clt_error"))
    assert params == {"name": "exp_clt_error", "n_grid": [1, 2, 3, 4]}


def test_name_from_config(config):
    cmd = ExperimentCommand(config(params={"name": "exp_gibbs_phase"}))
    assert cmd.resolve_params(Namespace(name=None)) == {"name": "exp_gibbs_phase"}


def test_name_missing(config):
    cmd = ExperimentCommand(config())
    with pytest.raises(CommandError) as cm:
        cmd.resolve_params(Namespace(name=None))
    assert str(cm.value) == "Indicate the experiment to run with --name."


def test_name_conflict(config):
    cmd = ExperimentCommand(config(params={"name": "exp_gibbs_phase"}))
    with pytest.raises(CommandError) as cm:
        cmd.resolve_params(Namespace(name="exp_clt_error"))
    assert str(cm.value) == (
        "The run config params are for the 'exp_gibbs_phase' experiment, not for "
        "'exp_clt_error'."
    )


def test_name_unknown(config):
    cmd = ExperimentCommand(config(params={"name": "exp_magic"}))
    with pytest.raises(CommandError) as cm:
        cmd.resolve_params(Namespace(name=None))
    assert str(cm.value).startswith("Unknown experiment 'exp_magic' (known ones: ")


def test_seed_in_params(config):
    cmd = ExperimentCommand(config(params={"name": "exp_clt_error", "seed": 3}))
    with pytest.raises(CommandError) as cm:
        cmd.resolve_params(Namespace(name=None))
    assert str(cm.value) == "The seed goes in the run config itself, not in its params."


def test_bad_spec_params(config):
    cmd = ExperimentCommand(config(params={**LDP_PARAMS, "n_grid": [3, 2, 1, 0]}))
    with pytest.raises(CommandError) as cm:
        cmd.run(Namespace(name=None))
    assert str(cm.value).startswith("Bad experiment params content:")


def test_run_and_report(config, read_report):
    cmd = ExperimentCommand(config(params=LDP_PARAMS, seed=4))
    cmd.run(Namespace(name=None))
    data = read_report()

    assert data["kind"] == "experiment"
    assert data["columns"] == ["n", "metric", "value"]
    # the seed is echoed once, at the top of the config
    assert data["config"]["seed"] == 4
    assert "seed" not in data["config"]["params"]
    assert data["config"]["params"]["misspecified_lambda"] == 0.5
    result = data["result"]
    assert result["name"] == "exp_ldp_temperature"
    assert result["metric"] == "kl"
    assert result["spec"]["seed"] == 4
    assert result["checks"]["maxent_equivalence"] is True


def test_failed_checks(config, read_report):
    params = {**LDP_PARAMS, "kl_max": 1e-12}
    cmd = ExperimentCommand(config(params=params))
    with pytest.raises(VerdictFailed) as cm:
        cmd.run(Namespace(name=None))
    assert cm.value.retcode == 2
    assert "kl_small" in str(cm.value)
    # the report is written anyway
    result = read_report()["result"]
    assert result["verdict"] == "fail"
    assert result["checks"]["kl_small"] is False
