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

"""Collection of utilities for canontilt."""

import logging
from dataclasses import dataclass

import yaml

from canontilt.cmdbase import CommandError
from canontilt.distributions import parse_distribution, parse_window

logger = logging.getLogger(__name__)


def load_yaml(fpath):
    """Return the content of a YAML (or JSON) file."""
    if not fpath.is_file():
        logger.debug("Couldn't find config file %r", str(fpath))
        return
    try:
        with fpath.open("rb") as fh:
            content = yaml.safe_load(fh)
    except (yaml.error.YAMLError, OSError) as err:
        logger.error("Failed to read/parse config file %r: %r", str(fpath), err)
        return
    return content


class SingleOptionEnsurer:
    """Argparse helper to ensure that the option is specified only once, converting it properly.

    Receives a callable to convert the string from command line to the desired object.

    Example of use:

        parser.add_argument('-n', '--number',  type=SingleOptionEnsurer(int), required=True)

    No lower limit is checked, that is verified with required=True in the argparse definition.
    """

    def __init__(self, converter):
        self.converter = converter
        self.count = 0

    def __call__(self, value):
        """Run by argparse to validate and convert the given argument."""
        self.count += 1
        if self.count > 1:
            raise ValueError("the option can be specified only once")
        return self.converter(value)


@dataclass(frozen=True)
class DistributionOption:
    """Argparse helper to validate a distribution description.

    The text is kept as given (it's what goes to the report), only checked here.

    Example of use:

        parser.add_argument('--dist',  type=DistributionOption())
    """

    def __call__(self, value):
        """Run by argparse to validate the given argument."""
        try:
            parse_distribution(value)
        except CommandError as exc:
            raise ValueError(str(exc))
        return value


@dataclass(frozen=True)
class WindowOption:
    """Argparse helper to validate and convert a 'H,DELTA' window option."""

    def __call__(self, value):
        """Run by argparse to validate and convert the given argument."""
        try:
            window = parse_window(value)
        except CommandError:
            raise ValueError("the window format must be <h>,<delta> (delta being positive)")
        return [window.h, window.delta]


@dataclass(frozen=True)
class RangeOption:
    """Argparse helper to validate and convert a 'LO,HI,COUNT' grid option."""

    def __call__(self, value):
        """Run by argparse to validate and convert the given argument."""
        parts = [x.strip() for x in value.split(",")]
        if len(parts) == 3:
            try:
                lower, upper, count = float(parts[0]), float(parts[1]), int(parts[2])
            except ValueError:
                pass
            else:
                if lower < upper and count >= 2:
                    return [lower, upper, count]
        raise ValueError("the range format must be <lo>,<hi>,<count> (lo < hi, count >= 2)")
