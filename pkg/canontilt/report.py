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

"""Reports of the commands and how they are written.

JSON reports carry everything (the resolved config included) pretty printed with sorted
keys; non finite floats are written as the strings "Infinity", "-Infinity" and "NaN".
CSV reports carry only the rows, floats with 17 significant digits.
"""

import csv
import io
import json
import logging
import math
import pathlib
import sys
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from canontilt.errors import ReportWriteError

logger = logging.getLogger(__name__)

FORMATS = ("json", "csv")

# what each format holds, as listed by the detailed help
FORMAT_CONTENTS = (
    ("json", "One document with the resolved config, the results and the rows"),
    ("csv", "Only the rows, after a header with the column names"),
)


@dataclass(frozen=True)
class Report:
    """What a command produced: the resolved config, a result mapping and tabular rows."""

    kind: str
    config: Dict[str, Any]
    result: Dict[str, Any] = field(default_factory=dict)
    columns: Sequence[str] = ()
    rows: List[Sequence[Any]] = field(default_factory=list)

    def to_dict(self):
        """Return the whole report as a mapping."""
        return {
            "kind": self.kind,
            "config": self.config,
            "result": self.result,
            "columns": list(self.columns),
            "rows": [list(row) for row in self.rows],
        }


def _plain_float(value):
    if math.isnan(value):
        return "NaN"
    if math.isinf(value):
        return "Infinity" if value > 0 else "-Infinity"
    return value


def _jsonable(obj):
    """Convert numpy values and non finite floats to what the JSON report holds."""
    if isinstance(obj, dict):
        return {str(key): _jsonable(value) for key, value in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_jsonable(value) for value in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _plain_float(float(obj))
    return obj


def _csv_value(value):
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if not math.isfinite(value):
            return _plain_float(value)
        return "%.17g" % value
    if value is None:
        return ""
    return str(value)


def render_json(report):
    """Return the JSON text of the report."""
    return json.dumps(_jsonable(report.to_dict()), sort_keys=True, indent=4) + "\n"


def render_csv(report):
    """Return the CSV text of the report rows (just the header if there are none)."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(report.columns)
    for row in report.rows:
        writer.writerow([_csv_value(value) for value in row])
    return buffer.getvalue()


def emit_report(report, fmt="json", path: Optional[str] = None):
    """Write the report in the given format to the path (the standard output if None)."""
    if fmt == "json":
        text = render_json(report)
    elif fmt == "csv":
        text = render_csv(report)
    else:
        raise ValueError(f"Unknown report format {fmt!r}.")

    if path is None:
        sys.stdout.write(text)
        sys.stdout.flush()
        return

    filepath = pathlib.Path(path).expanduser()
    try:
        with filepath.open("wb") as fh:
            fh.write(text.encode("utf8"))
    except OSError as exc:
        raise ReportWriteError(f"Cannot write the report to {str(filepath)!r}: {exc}")
    logger.debug("Report (%s) written to %r", fmt, str(filepath))
