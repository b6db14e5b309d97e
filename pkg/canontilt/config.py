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

"""Run configuration management.

Using pydantic's BaseModel, this module supports the translation of a run config file
(JSON or YAML) to a python object.

Configuration Schema
====================

command: [string] optional, one of "tilt", "condition", "divergence", "ratefn" or
    "experiment"; if given, it must match the command being run

params: [mapping] optional, the command parameters (same names as the command line
    options, with underscores); command line options win over these

seed: [integer] optional, 0 <= seed < 2**64, defaults to 0

out_format: [string] optional, "json" or "csv", defaults to "json"

out_path: [string] optional, where to write the report, defaults to the standard output
"""

import pathlib
from typing import Any, Dict, Literal, Optional, Tuple

import pydantic

from canontilt.cmdbase import CommandError
from canontilt.utils import load_yaml

COMMAND_NAMES = ("tilt", "condition", "divergence", "ratefn", "experiment")

# the run config keys as listed by the detailed help
RUN_CONFIG_KEYS = (
    ("command", "The command the config is for; it must match the one being run"),
    ("params", "The command parameters, named as its options with underscores"),
    ("seed", "Seed for every random draw, 0 <= seed < 2**64 (default 0)"),
    ("out_format", "Either 'json' or 'csv' (default 'json')"),
    ("out_path", "Where to write the report (default the standard output)"),
)


class ModelConfigDefaults(
    pydantic.BaseModel, extra=pydantic.Extra.forbid, frozen=True, validate_all=True
):
    """Define canontilt's defaults for the BaseModel configuration."""


def format_pydantic_error_location(loc):
    """Format location."""
    loc_parts = []
    for loc_part in loc:
        if isinstance(loc_part, str):
            loc_parts.append(loc_part)
        elif isinstance(loc_part, int):
            # Integer indicates an index. Go
            # back and fix up previous part.
            previous_part = loc_parts.pop()
            previous_part += f"[{loc_part}]"
            loc_parts.append(previous_part)
        else:
            raise RuntimeError(f"unhandled loc: {loc_part}")

    loc = ".".join(loc_parts)

    # Filter out internal __root__ detail.
    loc = loc.replace(".__root__", "")
    return loc


def format_pydantic_error_message(msg):
    """Format pydantic's error message field."""
    # Replace shorthand "str" with "string".
    msg = msg.replace("str type expected", "string type expected")
    return msg


def printable_field_location_split(location: str) -> Tuple[str, str]:
    """Return split field location.

    If top-level, location is returned as unquoted "top-level".
    If not top-level, location is returned as quoted location.

    Examples:
    (1) params.window => 'window', 'params'
    (2) seed => 'seed', top-level

    :returns: Tuple of <field name>, <location> as printable representations.
    """
    loc_split = location.split(".")
    field_name = repr(loc_split.pop())

    if loc_split:
        return field_name, repr(".".join(loc_split))

    return field_name, "top-level"


def format_pydantic_errors(errors, *, file_name: str = "run config"):
    """Format errors.

    Example 1: Single error.

    Bad run config content:
    - field: <some field>
      reason: <some reason>

    Example 2: Multiple errors.

    Bad run config content:
    - field: <some field>
      reason: <some reason>
    - field: <some field 2>
      reason: <some reason 2>
    """
    combined = [f"Bad {file_name} content:"]
    for error in errors:
        formatted_loc = format_pydantic_error_location(error["loc"])
        formatted_msg = format_pydantic_error_message(error["msg"])

        if formatted_msg == "field required":
            field_name, location = printable_field_location_split(formatted_loc)
            combined.append(f"- field {field_name} required in {location} configuration")
        elif formatted_msg == "extra fields not permitted":
            field_name, location = printable_field_location_split(formatted_loc)
            combined.append(
                f"- extra field {field_name} not permitted in {location} configuration"
            )
        else:
            combined.append(f"- {formatted_msg} in field {formatted_loc!r}")

    return "\n".join(combined)


class RunConfig(ModelConfigDefaults):
    """Definition of a run: which command, its parameters and where the report goes."""

    command: Optional[Literal["tilt", "condition", "divergence", "ratefn", "experiment"]]
    params: Dict[str, Any] = {}
    seed: pydantic.conint(ge=0, lt=2 ** 64) = 0
    out_format: Literal["json", "csv"] = "json"
    out_path: Optional[str]

    @classmethod
    def unmarshal(cls, obj: Dict[str, Any], file_name: str = "run config"):
        """Unmarshal object with necessary translations and error handling.

        :returns: valid RunConfig.

        :raises CommandError: On failure to unmarshal object.
        """
        if not isinstance(obj, dict):
            raise CommandError(f"Bad {file_name} content: it must be a mapping.")
        try:
            return cls.parse_obj(obj)
        except pydantic.error_wrappers.ValidationError as error:
            raise CommandError(format_pydantic_errors(error.errors(), file_name=file_name))

    def to_dict(self):
        """Return the resolved configuration (defaults filled)."""
        return self.dict()


def load(path: Optional[str], **overrides) -> RunConfig:
    """Load the run config from the indicated file, applying the given overrides.

    Overrides with a None value are ignored. Without a file, the defaults are used.
    """
    content = {}
    file_name = "run config"
    if path is not None:
        filepath = pathlib.Path(path).expanduser()
        if not filepath.is_file():
            raise CommandError(f"Cannot find the run config {str(filepath)!r}.")
        content = load_yaml(filepath)
        if content is None:
            raise CommandError(f"Cannot read or parse the run config {str(filepath)!r}.")
        file_name = filepath.name

    if isinstance(content, dict):
        content = dict(content)
        content.update({k: v for k, v in overrides.items() if v is not None})
    return RunConfig.unmarshal(content, file_name=file_name)
