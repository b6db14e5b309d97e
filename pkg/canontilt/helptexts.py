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

"""Help texts.

Every text is a list of blocks separated by one blank line; listings (options, commands,
run config keys, report formats) are sections of (name, description) items, names left
aligned and descriptions wrapped to the terminal width.
"""

import textwrap
from dataclasses import dataclass
from typing import Sequence, Tuple

# max columns used in the terminal
TERMINAL_WIDTH = 79

# indentation of the items in a section
INDENT = "    "

USAGE = "{appname} [global options] <command> [options]"

ERROR_TEMPLATE = """\
Usage: {usage}
Run '{full_command} -h' for help.

Error: {error_message}
"""


def render_items(items, width=None):
    """Return the lines of (name, description) items, the descriptions in one column."""
    if not items:
        return []
    if width is None:
        width = max(len(name) for name, _ in items)
    text_space = TERMINAL_WIDTH - len(INDENT) - width - 2
    lines = []
    for name, text in items:
        wrapped = textwrap.wrap(text or "", text_space) or [""]
        lines.append(f"{INDENT}{name:<{width}}  {wrapped[0]}".rstrip())
        lines.extend(" " * (len(INDENT) + width + 2) + line for line in wrapped[1:])
    return lines


@dataclass(frozen=True)
class HelpSection:
    """A titled listing of (name, description) items."""

    title: str
    items: Sequence[Tuple[str, str]] = ()

    def render(self, width=None):
        """Return the section as text."""
        return "\n".join([f"{self.title}:"] + render_items(self.items, width))


def _join(blocks):
    """Join the stripped blocks leaving one blank line between them."""
    return "\n\n".join(block.strip("\n") for block in blocks if block.strip()) + "\n"


class HelpBuilder:
    """Produce the different help texts."""

    def __init__(self):
        self.appname = None
        self.general_summary = None
        self.command_groups = None
        self.references = ()

    def init(self, appname, general_summary, command_groups, references=()):
        """Set what the texts describe.

        `command_groups` holds (name, title, command classes) in presentation order and
        `references` the extra sections of the detailed help.
        """
        self.appname = appname
        self.general_summary = general_summary
        self.command_groups = command_groups
        self.references = tuple(references)

    @property
    def _usage_block(self):
        return "Usage:\n" + INDENT + USAGE.format(appname=self.appname)

    @property
    def _summary_block(self):
        return "Summary:" + textwrap.indent(self.general_summary, INDENT)

    def get_usage_message(self, error_message, command="", schema=None):
        """Build the text shown on a command line error.

        `command` completes the name of the application in the hint to get help, and
        `schema`, the (option, description) pairs the offending command accepts, is
        listed after the error.
        """
        full_command = f"{self.appname} {command}" if command else self.appname
        text = ERROR_TEMPLATE.format(
            usage=USAGE.format(appname=self.appname),
            full_command=full_command,
            error_message=error_message,
        )
        if schema:
            text += "\n" + HelpSection("Accepted parameters", schema).render() + "\n"
        return text

    def get_full_help(self, global_options):
        """Produce the default help: usage, summary, the commands and the global options."""
        commands = [
            (cmd.name, cmd.help_msg) for _, _, group in self.command_groups for cmd in group
        ]
        return _join(
            [
                self._usage_block,
                self._summary_block,
                HelpSection("Commands", commands).render(),
                HelpSection("Global options", global_options).render(),
                f"Run '{self.appname} help <command>' for the options of a command, and\n"
                f"'{self.appname} help --all' for the run config keys and the report formats.",
            ]
        )

    def get_detailed_help(self, global_options):
        """Produce the help with the commands by group and the reference sections."""
        names = [cmd.name for _, _, group in self.command_groups for cmd in group]
        width = max((len(name) for name in names), default=0)
        blocks = [
            self._usage_block,
            self._summary_block,
            HelpSection("Global options", global_options).render(),
        ]
        for _, title, group in self.command_groups:
            items = [(cmd.name, cmd.help_msg) for cmd in group]
            blocks.append(HelpSection(f"{title} commands", items).render(width))
        blocks.extend(section.render() for section in self.references)
        blocks.append(f"Run '{self.appname} help <command>' for the options of a command.")
        return _join(blocks)

    def get_command_help(self, command, arguments, global_options=()):
        """Produce the help of one command.

        `arguments` are the (name, description) of the command parameters: the ones
        starting with a dash are options, the rest positional.
        """
        options = [(name, text) for name, text in arguments if name.startswith("-")]
        positional = [(name, text) for name, text in arguments if not name.startswith("-")]

        usage = f"{self.appname} {command.name} [options]"
        usage += "".join(f" <{name}>" for name, _ in positional)
        blocks = [
            "Usage:\n" + INDENT + usage,
            "Summary:" + textwrap.indent(command.overview, INDENT),
        ]
        if positional:
            blocks.append(HelpSection("Parameters", positional).render())
        if options:
            blocks.append(HelpSection("Options", options).render())
        if command.param_names:
            names = ", ".join(command.param_names)
            blocks.append(
                "Run config params:\n"
                + textwrap.fill(
                    f"The 'params' mapping of the run config may also give {names}; "
                    "the options win over it.",
                    TERMINAL_WIDTH,
                    initial_indent=INDENT,
                    subsequent_indent=INDENT,
                )
            )
        if global_options:
            blocks.append(HelpSection("Global options", global_options).render())

        for _, _, group in self.command_groups:
            if any(isinstance(command, cmd) for cmd in group):
                break
        else:
            raise RuntimeError("Internal inconsistency in commands groups")
        siblings = sorted(cmd.name for cmd in group if not isinstance(command, cmd))
        if siblings:
            blocks.append("See also:\n" + INDENT + ", ".join(siblings))

        blocks.append(f"For all the commands, run '{self.appname} help --all'.")
        return _join(blocks)


help_builder = HelpBuilder()
