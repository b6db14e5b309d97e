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

import textwrap
from unittest.mock import patch

import pytest

from canontilt import config, helptexts, main, report
from canontilt.experiments import EXPERIMENTS
from canontilt.helptexts import HelpSection, render_items
from canontilt.main import ArgumentParsingError, Dispatcher, ProvideHelpException
from tests.factory import create_command

# what every command help and the general help list as global options
GLOBAL_OPTIONS = [
    "--format",
    "--out",
    "--seed",
    "-c, --config",
    "-h, --help",
    "-q, --quiet",
    "-v, --verbose",
]

FAKE_GLOBAL_OPTIONS = [
    ("-h, --help", "Show this help message and exit"),
    ("-q, --quiet", "Only show warnings and errors, not progress"),
]

FAKE_SUMMARY = "\nSummary text\nin two lines.\n"


@pytest.fixture
def help_builder():
    """Provide a clean and fresh help_builder instance, ensuring the module also has it."""
    help_builder = helptexts.help_builder = main.help_builder = helptexts.HelpBuilder()
    return help_builder


def _fake_groups():
    tilt = create_command("tilt", "Tilt a law.")
    condition = create_command("condition", "Condition X on the window of X + Y.")
    experiment = create_command("experiment", "Run an experiment.")
    return [
        ("basic", "Basic", [tilt, condition]),
        ("experiments", "Experiment", [experiment]),
    ]


# -- sections


def test_render_items_aligns_descriptions():
    lines = render_items([("json", "One document"), ("csv", "Only the rows"), ("x", "")])
    assert lines == [
        "    json  One document",
        "    csv   Only the rows",
        "    x",
    ]


def test_render_items_wraps_at_terminal_width():
    lines = render_items([("x", "word " * 30)])
    assert lines == [
        "    x  " + " ".join(["word"] * 14),
        "       " + " ".join(["word"] * 14),
        "       word word",
    ]
    assert max(len(line) for line in lines) <= helptexts.TERMINAL_WIDTH


def test_section_with_shared_width():
    section = HelpSection("Report formats", [("csv", "Rows")])
    assert section.render() == "Report formats:\n    csv  Rows"
    assert section.render(width=6) == "Report formats:\n    csv     Rows"


def test_section_empty():
    assert render_items([]) == []
    assert HelpSection("Parameters").render() == "Parameters:"


# -- usage on errors


def test_get_usage_message_with_command(help_builder):
    help_builder.init("testapp", "general summary", [])
    text = help_builder.get_usage_message("bad parameter for tilt", "tilt")
    assert text == textwrap.dedent(
        """\
        Usage: testapp [global options] <command> [options]
        Run 'testapp tilt -h' for help.

        Error: bad parameter for tilt
        """
    )


def test_get_usage_message_no_command(help_builder):
    help_builder.init("testapp", "general summary", [])
    text = help_builder.get_usage_message("missing a mandatory command")
    assert text == textwrap.dedent(
        """\
        Usage: testapp [global options] <command> [options]
        Run 'testapp -h' for help.

        Error: missing a mandatory command
        """
    )


def test_get_usage_message_with_schema(help_builder):
    help_builder.init("testapp", "general summary", [])
    schema = [("--dist", "The base law"), ("--lambda", "The tilt parameter"), ("--flag", "")]
    text = help_builder.get_usage_message("bad value", "tilt", schema=schema)
    assert text == textwrap.dedent(
        """\
        Usage: testapp [global options] <command> [options]
        Run 'testapp tilt -h' for help.

        Error: bad value

        Accepted parameters:
            --dist    The base law
            --lambda  The tilt parameter
            --flag
        """
    )


# -- general and detailed help


def test_full_help_text(help_builder):
    help_builder.init("testapp", FAKE_SUMMARY, _fake_groups())
    text = help_builder.get_full_help(FAKE_GLOBAL_OPTIONS)
    assert text == textwrap.dedent(
        """\
        Usage:
            testapp [global options] <command> [options]

        Summary:
            Summary text
            in two lines.

        Commands:
            tilt        Tilt a law.
            condition   Condition X on the window of X + Y.
            experiment  Run an experiment.

        Global options:
            -h, --help   Show this help message and exit
            -q, --quiet  Only show warnings and errors, not progress

        Run 'testapp help <command>' for the options of a command, and
        'testapp help --all' for the run config keys and the report formats.
        """
    )


def test_detailed_help_text(help_builder):
    references = [
        HelpSection("Run config keys", [("seed", "Seed for every random draw")]),
        HelpSection("Report formats", [("json", "One document"), ("csv", "Only the rows")]),
    ]
    help_builder.init("testapp", FAKE_SUMMARY, _fake_groups(), references)
    text = help_builder.get_detailed_help(FAKE_GLOBAL_OPTIONS)
    assert text == textwrap.dedent(
        """\
        Usage:
            testapp [global options] <command> [options]

        Summary:
            Summary text
            in two lines.

        Global options:
            -h, --help   Show this help message and exit
            -q, --quiet  Only show warnings and errors, not progress

        Basic commands:
            tilt        Tilt a law.
            condition   Condition X on the window of X + Y.

        Experiment commands:
            experiment  Run an experiment.

        Run config keys:
            seed  Seed for every random draw

        Report formats:
            json  One document
            csv   Only the rows

        Run 'testapp help <command>' for the options of a command.
        """
    )


def test_run_config_keys_match_the_model():
    assert {key for key, _ in config.RUN_CONFIG_KEYS} == set(config.RunConfig.__fields__)


def test_report_formats_documented():
    assert tuple(name for name, _ in report.FORMAT_CONTENTS) == report.FORMATS


def test_real_detailed_help(help_builder):
    help_builder.init("canontilt", main.GENERAL_SUMMARY, main.COMMAND_GROUPS, main.REFERENCES)
    text = main.get_general_help(detailed=True)
    lines = text.splitlines()
    for key, _ in config.RUN_CONFIG_KEYS:
        assert any(line.startswith(f"    {key} ") for line in lines)
    for name in report.FORMATS:
        assert any(line.startswith(f"    {name} ") for line in lines)
    for _, _, group in main.COMMAND_GROUPS:
        for cmd in group:
            assert any(line.startswith(f"    {cmd.name} ") for line in lines)
    assert "Experiment commands:" in lines


# -- command help


def test_command_help_text(help_builder):
    overview = "\nConditions X.\n\nMultiline!\n"
    condition = create_command(
        "condition", "Condition.", overview_=overview, param_names_=("x", "y", "window")
    )
    tilt = create_command("tilt")
    divergence = create_command("divergence")
    groups = [("basic", "Basic", [condition, tilt, divergence])]
    arguments = [("--x", "The summand law"), ("--window", "The window as H,DELTA")]

    help_builder.init("testapp", "general summary", groups)
    text = help_builder.get_command_help(condition(None), arguments, FAKE_GLOBAL_OPTIONS)
    assert text == textwrap.dedent(
        """\
        Usage:
            testapp condition [options]

        Summary:
            Conditions X.

            Multiline!

        Options:
            --x       The summand law
            --window  The window as H,DELTA

        Run config params:
            The 'params' mapping of the run config may also give x, y, window; the
            options win over it.

        Global options:
            -h, --help   Show this help message and exit
            -q, --quiet  Only show warnings and errors, not progress

        See also:
            divergence, tilt

        For all the commands, run 'testapp help --all'.
        """
    )


def test_command_help_text_positional_and_alone(help_builder):
    experiment = create_command("experiment", "Run.", overview_="\nRuns one.\n")
    groups = [
        ("basic", "Basic", [create_command("tilt")]),
        ("experiments", "Experiment", [experiment]),
    ]
    arguments = [("name", "The experiment"), ("-h, --help", "Show this help message and exit")]

    help_builder.init("testapp", "general summary", groups)
    text = help_builder.get_command_help(experiment(None), arguments)
    assert text == textwrap.dedent(
        """\
        Usage:
            testapp experiment [options] <name>

        Summary:
            Runs one.

        Parameters:
            name  The experiment

        Options:
            -h, --help  Show this help message and exit

        For all the commands, run 'testapp help --all'.
        """
    )


def test_command_help_outside_the_groups(help_builder):
    help_builder.init("testapp", "general summary", [("basic", "Basic", [])])
    with pytest.raises(RuntimeError):
        help_builder.get_command_help(create_command("lost")(None), [])


@pytest.mark.parametrize(
    "name, expected",
    [
        ("condition", "may also give x, y, window, method, samples, n, scheme;"),
        ("divergence", "may also give p, q, scale;"),
        ("ratefn", "may also give dist, range, window;"),
    ],
)
def test_real_command_help_lists_run_config_params(help_builder, name, expected):
    help_builder.init("canontilt", main.GENERAL_SUMMARY, main.COMMAND_GROUPS)
    with pytest.raises(ProvideHelpException) as cm:
        Dispatcher(["help", name], main.COMMAND_GROUPS)
    assert expected in " ".join(str(cm.value).split())


def test_real_experiment_help_lists_the_experiments(help_builder):
    help_builder.init("canontilt", main.GENERAL_SUMMARY, main.COMMAND_GROUPS)
    with pytest.raises(ProvideHelpException) as cm:
        Dispatcher(["experiment", "--help"], main.COMMAND_GROUPS)
    text = str(cm.value)
    for name in EXPERIMENTS:
        assert f"- {name}" in text
    assert "Run config params:" not in text


# -- the dispatcher asking for the texts


def test_tool_exec_no_arguments_help():
    with patch("canontilt.helptexts.HelpBuilder.get_full_help") as mock:
        mock.return_value = "test help"
        with pytest.raises(ArgumentParsingError) as cm:
            Dispatcher([], [])

    args = mock.call_args[0]
    assert sorted(x[0] for x in args[0]) == GLOBAL_OPTIONS
    assert str(cm.value) == "test help"


@pytest.mark.parametrize("sysargv", [["-h"], ["--help"], ["help"]])
def test_tool_exec_full_help(sysargv):
    with patch("canontilt.helptexts.HelpBuilder.get_full_help") as mock:
        mock.return_value = "test help"
        with pytest.raises(ProvideHelpException) as cm:
            Dispatcher(sysargv, [])

    assert str(cm.value) == "test help"


def test_tool_exec_help_command_all():
    with patch("canontilt.helptexts.HelpBuilder.get_detailed_help") as mock:
        mock.return_value = "test help"
        with pytest.raises(ProvideHelpException) as cm:
            Dispatcher(["help", "--all"], [("group", "Group", [])])

    assert str(cm.value) == "test help"
    assert sorted(x[0] for x in mock.call_args[0][0]) == GLOBAL_OPTIONS


@pytest.mark.parametrize(
    "sysargv",
    [["somecommand", "-h"], ["--help", "somecommand"], ["help", "somecommand"]],
)
def test_tool_exec_command_help(sysargv):
    def fill_parser(self, parser):
        parser.add_argument("param1", help="help on param1")
        parser.add_argument("param2", metavar="transformed2", help="help on param2")
        parser.add_argument("--option1", help="help on option1")
        parser.add_argument("-o2", "--option2", help="help on option2")

    cmd = create_command("somecommand", "This command does that.")
    cmd.fill_parser = fill_parser

    with patch("canontilt.helptexts.HelpBuilder.get_command_help") as mock:
        mock.return_value = "test help"
        with pytest.raises(ProvideHelpException) as cm:
            Dispatcher(sysargv, [("group", "Group", [cmd])])

    assert str(cm.value) == "test help"
    command, arguments, global_options = mock.call_args[0]
    assert isinstance(command, cmd)
    assert sorted(name for name, _ in arguments) == [
        "--option1",
        "-o2, --option2",
        "param1",
        "transformed2",
    ]
    assert sorted(name for name, _ in global_options) == GLOBAL_OPTIONS


_USAGE_ERROR = """\
Usage: testapp [global options] <command> [options]
Run 'testapp{command} -h' for help.

Error: {error}
"""


def test_tool_exec_command_incorrect(help_builder):
    help_builder.init("testapp", "general summary", [])
    with pytest.raises(ArgumentParsingError) as cm:
        Dispatcher(["wrongcommand"], [])
    expected = _USAGE_ERROR.format(command="", error="no such command 'wrongcommand'")
    assert str(cm.value) == expected


@pytest.mark.parametrize(
    "sysargv",
    [["-h", "wrongcommand"], ["wrongcommand", "--help"], ["help", "wrongcommand"]],
)
def test_tool_exec_help_on_command_incorrect(sysargv, help_builder):
    help_builder.init("testapp", "general summary", [])
    with pytest.raises(ArgumentParsingError) as cm:
        Dispatcher(sysargv, [])
    error = "command 'wrongcommand' not found to provide help for"
    assert str(cm.value) == _USAGE_ERROR.format(command="", error=error)


@pytest.mark.parametrize(
    "sysargv",
    [["-h", "foo", "bar"], ["foo", "bar", "--help"], ["help", "foo", "bar"]],
)
def test_tool_exec_help_on_too_many_things(sysargv, help_builder):
    help_builder.init("testapp", "general summary", [])
    with pytest.raises(ArgumentParsingError) as cm:
        Dispatcher(sysargv, [])
    error = "Too many parameters when requesting help; pass a command, '--all', or leave it empty"
    assert str(cm.value) == _USAGE_ERROR.format(command="", error=error)


def test_tool_exec_command_wrong_option(help_builder):
    cmd = create_command("somecommand", "This command does that.")
    command_groups = [("group", "Group", [cmd])]
    help_builder.init("testapp", "general summary", command_groups)
    with pytest.raises(ArgumentParsingError) as cm:
        Dispatcher(["somecommand", "--whatever"], command_groups)
    expected = _USAGE_ERROR.format(
        command=" somecommand", error="unrecognized arguments: --whatever"
    )
    assert str(cm.value) == expected


def test_tool_exec_command_bad_option_type(help_builder):
    def fill_parser(self, parser):
        parser.add_argument("--number", type=int, help="Some number")
        parser.add_argument("--flag", action="store_true")

    cmd = create_command("somecommand", "This command does that.")
    cmd.fill_parser = fill_parser
    command_groups = [("group", "Group", [cmd])]
    help_builder.init("testapp", "general summary", command_groups)
    with pytest.raises(ArgumentParsingError) as cm:
        Dispatcher(["somecommand", "--number=foo"], command_groups)

    expected = _USAGE_ERROR.format(
        command=" somecommand", error="argument --number: invalid int value: 'foo'"
    )
    expected += "\nAccepted parameters:\n    --number  Some number\n    --flag\n"
    assert str(cm.value) == expected
