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
import os
import pathlib
import warnings

import numpy as np
import pytest
import scipy
from scipy import integrate

from canontilt import logsetup
from canontilt.errors import QuadratureError
from canontilt.logsetup import FORMATTER_DETAILED, FORMATTER_SIMPLE, _MessageHandler


@pytest.fixture
def handler():
    """Provide an initialized message handler factory, releasing the warnings capture after."""

    def factory(mode):
        # a previous run may have left the capture on with another target
        logging.captureWarnings(False)
        mh = _MessageHandler()
        mh.init(mode)
        return mh

    yield factory
    logging.captureWarnings(False)


def _log_text(mh):
    return pathlib.Path(mh._log_filepath).read_text()


# -- modes


@pytest.mark.parametrize(
    "mode, level, fmt",
    [
        ("quiet", logging.WARNING, FORMATTER_SIMPLE),
        ("normal", logging.INFO, FORMATTER_SIMPLE),
        ("verbose", logging.DEBUG, FORMATTER_DETAILED),
    ],
)
def test_modes(handler, mode, level, fmt):
    mh = handler(mode)
    assert mh.mode == mode
    assert mh._stderr_handler.level == level
    assert mh._stderr_handler.formatter._fmt == fmt


def test_mode_switch_moves_the_warnings(handler):
    mh = handler("verbose")
    assert mh._stderr_handler in logsetup.warnings_logger.handlers
    mh.set_mode(mh.QUIET)
    assert mh._stderr_handler not in logsetup.warnings_logger.handlers
    assert mh._stderr_handler.level == logging.WARNING


def test_verbose_announces_the_numerical_stack(caplog, handler):
    caplog.set_level(logging.DEBUG, logger="canontilt")
    handler("verbose")
    expected = f"(numpy {np.__version__}, scipy {scipy.__version__})"
    assert any(expected in rec.message for rec in caplog.records)


# -- the log file


def test_log_file_keeps_every_level(handler):
    mh = handler("quiet")
    log = logging.getLogger("canontilt.conditioning")
    log.debug("grid of 128 panels")
    log.info("window mass 0.25")
    log.error("empty window")

    lines = _log_text(mh).splitlines()
    assert "Starting canontilt version" in lines[0]
    assert [line.split()[-3:] for line in lines[1:]] == [
        ["of", "128", "panels"],
        ["window", "mass", "0.25"],
        ["ERROR", "empty", "window"],
    ]


def test_numpy_overflow_goes_to_the_file_only(caplog, handler):
    caplog.set_level(logging.DEBUG)
    mh = handler("normal")
    with warnings.catch_warnings():
        warnings.simplefilter("always")
        with np.errstate(over="warn"):
            np.exp(np.float64(1000.0))

    assert "RuntimeWarning: overflow encountered in exp" in _log_text(mh)
    assert "overflow" not in caplog.text


def test_scipy_quadrature_warning_captured(handler):
    mh = handler("normal")
    with warnings.catch_warnings():
        warnings.simplefilter("always")
        integrate.quad(lambda x: abs(x - 0.3) ** -0.5, 0, 1, limit=3)

    assert "IntegrationWarning" in _log_text(mh)


# -- how the run ends


def test_ended_ok_removes_the_file(handler):
    mh = handler("normal")
    mh.ended_ok()
    assert not os.path.exists(mh._log_filepath)


@pytest.mark.parametrize("mode, traceback", [("normal", False), ("verbose", True)])
def test_ended_interrupt(caplog, handler, mode, traceback):
    caplog.set_level(logging.DEBUG, logger="canontilt")
    mh = handler(mode)
    mh.ended_interrupt()

    assert not os.path.exists(mh._log_filepath)
    (record,) = [rec for rec in caplog.records if rec.levelname == "ERROR"]
    assert record.message == "Interrupted."
    assert (record.exc_info is not None) == traceback


def test_ended_command_error_keeps_the_file(caplog, handler):
    caplog.set_level(logging.DEBUG, logger="canontilt")
    mh = handler("normal")
    mh.ended_cmderror(QuadratureError("The normalizer did not converge", 1e-3))

    expected = (
        "The normalizer did not converge (estimated error 0.001) "
        f"(full execution logs in {str(mh._log_filepath)!r})"
    )
    assert expected in _log_text(mh)
    assert [rec.message for rec in caplog.records if rec.levelname == "ERROR"] == [expected]


@pytest.mark.parametrize("mode", ["normal", "verbose"])
def test_ended_crash(caplog, handler, mode):
    caplog.set_level(logging.DEBUG, logger="canontilt")
    mh = handler(mode)
    try:
        np.linalg.inv(np.zeros((2, 2)))
    except np.linalg.LinAlgError as err:
        mh.ended_crash(err)

    expected = (
        "canontilt internal error! LinAlgError: Singular matrix "
        f"(full execution logs in {mh._log_filepath})"
    )
    content = _log_text(mh)
    assert expected in content
    assert "Traceback" in content

    # the traceback reaches the terminal only in verbose mode
    shown = [rec for rec in caplog.records if rec.levelname == "ERROR"]
    (record,) = shown
    assert record.message == expected
    assert (record.exc_info is not None) == (mode == "verbose")
