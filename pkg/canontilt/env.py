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

"""Canontilt environment utilities."""

import os

from canontilt.cmdbase import CommandError

THREADS_ENV_VAR = "CANON_TILT_THREADS"


def get_thread_count() -> int:
    """Return how many worker threads sweeps and samplers may use.

    :raises CommandError: if the environment variable is not a positive integer.
    """
    raw = os.getenv(THREADS_ENV_VAR)
    if raw is None or not raw.strip():
        return os.cpu_count() or 1

    try:
        count = int(raw)
    except ValueError:
        raise CommandError(f"Bad {THREADS_ENV_VAR} value {raw!r}: must be a positive integer.")
    if count < 1:
        raise CommandError(f"Bad {THREADS_ENV_VAR} value {raw!r}: must be a positive integer.")
    return count
