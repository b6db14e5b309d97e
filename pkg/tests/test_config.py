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

import json
from textwrap import dedent

import pytest

from canontilt import config
from canontilt.cmdbase import CommandError
from canontilt.config import RunConfig, format_pydantic_errors, load


def test_load_defaults_without_file():
    run_config = load(None)
    assert run_config.command is None
    assert run_config.params == {}
    assert run_config.seed == 0
    assert run_config.out_format == "json"
    assert run_config.out_path is None


def test_load_yaml_file(tmp_path):
    config_file = tmp_path / "run.yaml"
    config_file.write_text(
        dedent(
            """
            command: tilt
            seed: 17
            params:
              dist: exp:1
              lam: 0.5
            """
        )
    )
    run_config = load(str(config_file))
    assert run_config.command == "tilt"
    assert run_config.seed == 17
    assert run_config.params == {"dist": "exp:1", "lam": 0.5}


def test_load_json_file(tmp_path):
    config_file = tmp_path / "run.json"
    content = {"command": "experiment", "params": {"name": "exp_clt_error"}, "out_format": "csv"}
    config_file.write_text(json.dumps(content))
    run_config = load(str(config_file))
    assert run_config.command == "experiment"
    assert run_config.out_format == "csv"


def test_load_overrides_win(tmp_path):
    config_file = tmp_path / "run.json"
    config_file.write_text(json.dumps({"seed": 3, "out_format": "csv"}))
    run_config = load(str(config_file), seed=99, out_format=None, out_path="report.json")
    assert run_config.seed == 99
    assert run_config.out_format == "csv"
    assert run_config.out_path == "report.json"


def test_load_overrides_without_file():
    run_config = load(None, seed=5, out_format="csv")
    assert run_config.seed == 5
    assert run_config.out_format == "csv"


def test_load_missing_file(tmp_path):
    missing = tmp_path / "nothere.yaml"
    with pytest.raises(CommandError) as cm:
        load(str(missing))
    assert str(cm.value) == f"Cannot find the run config {str(missing)!r}."


def test_load_corrupted_file(tmp_path):
    config_file = tmp_path / "run.yaml"
    config_file.write_text("seed: [1, 2")
    with pytest.raises(CommandError) as cm:
        load(str(config_file))
    assert str(cm.value) == f"Cannot read or parse the run config {str(config_file)!r}."


def test_load_not_a_mapping(tmp_path):
    config_file = tmp_path / "run.yaml"
    config_file.write_text("- 1\n- 2\n")
    with pytest.raises(CommandError) as cm:
        load(str(config_file))
    assert str(cm.value) == "Bad run.yaml content: it must be a mapping."


def test_unknown_key_rejected(tmp_path):
    config_file = tmp_path / "run.yaml"
    config_file.write_text("seed: 1\ncolour: blue\n")
    with pytest.raises(CommandError) as cm:
        load(str(config_file))
    assert str(cm.value) == dedent(
        """\
        Bad run.yaml content:
        - extra field 'colour' not permitted in top-level configuration"""
    )


@pytest.mark.parametrize("seed", [-1, 2 ** 64])
def test_seed_out_of_range(seed):
    with pytest.raises(CommandError) as cm:
        RunConfig.unmarshal({"seed": seed})
    assert "in field 'seed'" in str(cm.value)


def test_seed_full_range_accepted():
    assert RunConfig.unmarshal({"seed": 2 ** 64 - 1}).seed == 2 ** 64 - 1


def test_bad_command():
    with pytest.raises(CommandError) as cm:
        RunConfig.unmarshal({"command": "pack"})
    assert "in field 'command'" in str(cm.value)


def test_bad_out_format():
    with pytest.raises(CommandError) as cm:
        RunConfig.unmarshal({"out_format": "xml"})
    assert "in field 'out_format'" in str(cm.value)


@pytest.mark.parametrize("command", config.COMMAND_NAMES)
def test_every_command_name_accepted(command):
    assert RunConfig.unmarshal({"command": command}).command == command


def test_to_dict_has_defaults_filled():
    run_config = RunConfig.unmarshal({"params": {"p": "pois:1"}})
    assert run_config.to_dict() == {
        "command": None,
        "params": {"p": "pois:1"},
        "seed": 0,
        "out_format": "json",
        "out_path": None,
    }


def test_to_dict_round_trip():
    """A resolved config loads back to the same config."""
    run_config = RunConfig.unmarshal({"command": "ratefn", "seed": 8, "params": {"dist": "exp:1"}})
    assert RunConfig.unmarshal(run_config.to_dict()) == run_config


def test_config_is_frozen():
    run_config = RunConfig.unmarshal({})
    with pytest.raises(TypeError):
        run_config.seed = 3


# -- tests for the pydantic errors formatting


def test_format_pydantic_errors_single():
    errors = [{"loc": ("seed",), "msg": "value is not a valid integer"}]
    assert format_pydantic_errors(errors) == dedent(
        """\
        Bad run config content:
        - value is not a valid integer in field 'seed'"""
    )


def test_format_pydantic_errors_multiple():
    errors = [
        {"loc": ("params", "window"), "msg": "field required"},
        {"loc": ("n_grid", 2), "msg": "ensure this value is greater than 0"},
        {"loc": ("shoe",), "msg": "extra fields not permitted"},
    ]
    result = format_pydantic_errors(errors, file_name="experiment params")
    assert result == dedent(
        """\
        Bad experiment params content:
        - field 'window' required in 'params' configuration
        - ensure this value is greater than 0 in field 'n_grid[2]'
        - extra field 'shoe' not permitted in top-level configuration"""
    )


def test_format_pydantic_errors_str_type():
    errors = [{"loc": ("out_path",), "msg": "str type expected"}]
    assert format_pydantic_errors(errors) == dedent(
        """\
        Bad run config content:
        - string type expected in field 'out_path'"""
    )
