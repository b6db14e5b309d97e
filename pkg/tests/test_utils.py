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

import logging
import sys

import pytest

from canontilt.utils import (
    DistributionOption,
    RangeOption,
    SingleOptionEnsurer,
    WindowOption,
    load_yaml,
)


def test_load_yaml_success(tmp_path):
    test_file = tmp_path / "testfile.yaml"
    test_file.write_text(
        """
        seed: 33
    """
    )
    content = load_yaml(test_file)
    assert content == {"seed": 33}


def test_load_yaml_json_content(tmp_path):
    """JSON is a subset of YAML, so JSON run configs load too."""
    test_file = tmp_path / "testfile.json"
    test_file.write_text('{"command": "tilt", "params": {"window": [-1.0, 0.5]}}')
    content = load_yaml(test_file)
    assert content == {"command": "tilt", "params": {"window": [-1.0, 0.5]}}


def test_load_yaml_no_file(tmp_path, caplog):
    caplog.set_level(logging.DEBUG, logger="canontilt")

    test_file = tmp_path / "testfile.yaml"
    content = load_yaml(test_file)
    assert content is None

    expected = "Couldn't find config file {!r}".format(str(test_file))
    assert [expected] == [rec.message for rec in caplog.records]


def test_load_yaml_directory(tmp_path, caplog):
    caplog.set_level(logging.DEBUG, logger="canontilt")

    test_file = tmp_path / "testfile.yaml"
    test_file.mkdir()
    content = load_yaml(test_file)
    assert content is None

    expected = "Couldn't find config file {!r}".format(str(test_file))
    assert [expected] == [rec.message for rec in caplog.records]


def test_load_yaml_corrupted_format(tmp_path, caplog):
    caplog.set_level(logging.ERROR, logger="canontilt")

    test_file = tmp_path / "testfile.yaml"
    test_file.write_text(
        """
        seed: [1, 2
    """
    )
    content = load_yaml(test_file)
    assert content is None

    (logged,) = [rec.message for rec in caplog.records]
    assert "Failed to read/parse config file {!r}".format(str(test_file)) in logged
    assert "ParserError" in logged


@pytest.mark.skipif(sys.platform == "win32", reason="Windows not [yet] supported")
def test_load_yaml_file_problem(tmp_path, caplog):
    caplog.set_level(logging.ERROR, logger="canontilt")

    test_file = tmp_path / "testfile.yaml"
    test_file.write_text(
        """
        seed: 3
    """
    )
    test_file.chmod(0o000)
    content = load_yaml(test_file)
    test_file.chmod(0o600)
    if content is not None:
        pytest.skip("running with privileges that ignore file permissions")
    assert content is None

    (logged,) = [rec.message for rec in caplog.records]
    assert "Failed to read/parse config file {!r}".format(str(test_file)) in logged
    assert "PermissionError" in logged


# -- tests for the SingleOptionEnsurer helper class


def test_singleoptionensurer_convert_ok():
    """Work fine with one call, convert as expected."""
    soe = SingleOptionEnsurer(int)
    assert soe("33") == 33


def test_singleoptionensurer_too_many():
    """Raise an error after one ok call."""
    soe = SingleOptionEnsurer(int)
    assert soe("33") == 33
    with pytest.raises(ValueError) as cm:
        soe("33")
    assert str(cm.value) == "the option can be specified only once"


# -- tests for the DistributionOption helper class


@pytest.mark.parametrize("value", ["exp:1", "normal:0,1", "pois:2.5", "binom:10,0.3"])
def test_distributionoption_keeps_text(value):
    assert DistributionOption()(value) == value


@pytest.mark.parametrize("value", ["exp", "exp:1,2", "cauchy:0,1", "normal:a,b"])
def test_distributionoption_error(value):
    with pytest.raises(ValueError):
        DistributionOption()(value)


# -- tests for the WindowOption helper class


def test_windowoption_convert_ok():
    assert WindowOption()("-1,0.5") == [-1.0, 0.5]


@pytest.mark.parametrize("value", ["-1", "-1,0", "-1,-0.5", "a,b", "1,2,3", "1,inf"])
def test_windowoption_convert_error(value):
    with pytest.raises(ValueError) as cm:
        WindowOption()(value)
    assert str(cm.value) == "the window format must be <h>,<delta> (delta being positive)"


# -- tests for the RangeOption helper class


def test_rangeoption_convert_ok():
    assert RangeOption()("0.1, 3, 50") == [0.1, 3.0, 50]


@pytest.mark.parametrize("value", ["0,1", "1,0,5", "0,1,1", "0,1,x", "0,1,2.5"])
def test_rangeoption_convert_error(value):
    with pytest.raises(ValueError) as cm:
        RangeOption()(value)
    assert str(cm.value) == "the range format must be <lo>,<hi>,<count> (lo < hi, count >= 2)"
