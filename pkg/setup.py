#!/usr/bin/env python3

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

"""Setup script for canontilt."""

from pathlib import Path
from textwrap import dedent

from setuptools import find_packages, setup

import canontilt

with open("README.md", "rt", encoding="utf8") as fh:
    long_description = fh.read()

install_requires = [
    "humanize>=2.6.0",
    "numpy>=1.20",
    "pydantic<2",
    "pyyaml",
    "scipy>=1.7",
    "tabulate",
]

dev_requires = [
    "black",
    "coverage",
    "flake8",
    "pydocstyle",
    "pytest",
]

extras_require = {
    "dev": dev_requires,
}

version_path = Path("canontilt/version.py")
version_backup = Path("canontilt/version.py~")
if version_backup.exists():
    # Windows requires the dest file to be unlinked before renaming.
    version_backup.unlink()
version_path.rename(version_backup)
try:
    with version_path.open("wt", encoding="utf8") as fh:
        fh.write(
            dedent(
                """
            # this is a generated file

            version = {!r}
            """
            ).format(canontilt.__version__)
        )

    setup(
        name="canontilt",
        version=canontilt.__version__,
        description=(
            "Canonical (exponentially tilted) approximations of conditional laws, "
            "with the experiments that check them."
        ),
        long_description=long_description,
        long_description_content_type="text/markdown",
        license="Apache-2.0",
        packages=find_packages(include=["canontilt", "canontilt.*"]),
        classifiers=[
            "Environment :: Console",
            "License :: OSI Approved :: Apache Software License",
            "Operating System :: OS Independent",
            "Programming Language :: Python :: 3",
            "Topic :: Scientific/Engineering :: Mathematics",
        ],
        entry_points={
            "console_scripts": ["canontilt = canontilt.main:main"],
        },
        python_requires=">=3.8",
        install_requires=install_requires,
        extras_require=extras_require,
    )

finally:
    if version_path.exists():
        # Windows requires the dest file to be unlinked before renaming.
        version_path.unlink()
    version_backup.rename(version_path)
