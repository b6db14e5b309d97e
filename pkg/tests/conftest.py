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
import tempfile
from typing import List, Tuple

import numpy as np
import pytest

from canontilt import config as config_module
from canontilt import env


@pytest.fixture()
def caplog_filter(caplog):
    """Simplify log checking by filtering for desired module and return list of (lvl,msg)."""

    def filter(logger_name) -> List[Tuple[int, str]]:
        return [(r.levelno, r.message) for r in caplog.records if r.name == logger_name]

    return filter


@pytest.fixture(autouse=True, scope="session")
def tmpdir_under_tmpdir(tmpdir_factory):
    tempfile.tempdir = str(tmpdir_factory.getbasetemp())


@pytest.fixture(autouse=True)
def single_thread(monkeypatch):
    """Keep the sweeps in one worker unless a test says otherwise."""
    monkeypatch.setenv(env.THREADS_ENV_VAR, "1")


@pytest.fixture
def rng():
    """Provide a seeded random generator."""
    return np.random.default_rng(12345)


@pytest.fixture
def config(tmp_path):
    """Provide a run config writing the reports to a file in a temp dir."""

    def factory(**kwargs):
        content = {"out_path": str(tmp_path / "report.out")}
        content.update(kwargs)
        return config_module.RunConfig.unmarshal(content)

    return factory


@pytest.fixture
def read_report(tmp_path):
    """Provide a helper to load the report written by a command using the `config` fixture."""

    def reader(fmt="json"):
        text = (tmp_path / "report.out").read_text(encoding="utf8")
        if fmt == "json":
            return json.loads(text)
        return text

    return reader
