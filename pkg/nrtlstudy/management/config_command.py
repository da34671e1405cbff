"""
ConfigCommand is a base class for the batch commands that run from a JSON config.

Process settings (threads, output directory, verbosity, failure alarm) come
from Django settings and are listed in the --help epilog. The run itself
comes from --config. Errors map to exit codes:

* 2 - missing or invalid config (ConfigError), or an invalid setting or flag
* 3 - numerical failure (any other NrtlStudyError)
"""

from argparse import RawDescriptionHelpFormatter
from collections import namedtuple
from fnmatch import fnmatchcase
from pathlib import Path
from shutil import get_terminal_size
from typing import Any, Sequence, TypeVar
import logging
import textwrap

from codetiming import Timer

from django.conf import settings
from django.core.management.base import BaseCommand, CommandError, DjangoHelpFormatter

from nrtlstudy.exceptions import ConfigError, NrtlStudyError
from nrtlstudy.runconfig import RunConfig, load_run_config

error_logger = logging.getLogger("events")

CONFIG_ERROR = 2
NUMERICAL_ERROR = 3

_Labeled = TypeVar("_Labeled")


class RawDescriptionDjangoHelpFormatter(
    DjangoHelpFormatter, RawDescriptionHelpFormatter
):
    """DjangoHelpFormatter, but don't reflow the epilog."""

    pass


SettingToLocal = namedtuple(
    "SettingToLocal", ["setting_key", "local_name", "help_str", "validator"]
)


class ConfigCommand(BaseCommand):
    """A batch command driven by a run config and Django settings."""

    requires_system_checks: list[str] = []
    logger_name = "eventsinfo"

    settings_to_locals = [
        SettingToLocal(
            "NRTL_STUDY_THREADS",
            "threads",
            "Default number of worker threads.",
            lambda threads: isinstance(threads, int) and threads >= 1,
        ),
        SettingToLocal(
            "NRTL_STUDY_OUTPUT_DIR",
            "out",
            "Default output directory.",
            lambda out: bool(out),
        ),
        SettingToLocal(
            "NRTL_STUDY_FAILURE_ALARM",
            "failure_alarm",
            "Failed replicate fraction that raises an alarm.",
            lambda failure_alarm: 0.0 < failure_alarm < 1.0,
        ),
        SettingToLocal(
            "NRTL_STUDY_VERBOSITY",
            "verbosity",
            "Default verbosity of the command logs",
            lambda verbosity: verbosity in range(4),
        ),
    ]

    def create_parser(self, prog_name, subcommand, **kwargs):
        """
        Customize the default parser.

        * Add the Django settings and their values to the command help
        * Override the verbosity from an environment variable
        """
        epilog_lines = [
            "Defaults are read from Django settings and the related environment variable:",
            "",
        ]
        verbosity_override = None
        for setting_key, local_name, help_str, _ in self.settings_to_locals:
            raw = f"settings.{setting_key}={getattr(settings, setting_key)!r} : {help_str}"
            epilog_lines.extend(
                textwrap.wrap(
                    raw,
                    width=get_terminal_size().columns,
                    initial_indent="  ",
                    subsequent_indent="      ",
                )
            )
            if local_name == "verbosity":
                verbosity_override = getattr(settings, setting_key)
        epilog = "\n".join(epilog_lines)

        parser = super().create_parser(prog_name, subcommand, epilog=epilog, **kwargs)
        parser.formatter_class = RawDescriptionDjangoHelpFormatter
        parser.set_defaults(verbosity=verbosity_override)
        return parser

    def add_arguments(self, parser):
        parser.add_argument("--config", help="Path to the JSON run config.")
        parser.add_argument("--out", help="Output directory.")
        parser.add_argument("--seed", type=int, help="Override the config seed.")
        parser.add_argument("--threads", type=int, help="Number of worker threads.")
        parser.add_argument(
            "--scenario",
            help="Only run scenarios whose label matches this glob.",
        )

    def init_from_settings(self, verbosity):
        """Initialize local variables from settings"""
        for setting_key, local_name, help_str, validator in self.settings_to_locals:
            value = getattr(settings, setting_key)
            if not validator(value):
                raise CommandError(
                    f"settings.{setting_key} has invalid value {value!r}.",
                    returncode=CONFIG_ERROR,
                )
            if local_name == "verbosity":
                # The setting overrides the default, but use the command-line value
                self.verbosity = verbosity
            else:
                setattr(self, local_name, value)

    def handle(self, verbosity, config, out, seed, threads, scenario, *args, **kwargs):
        """Handle call from command line (called by BaseCommand)"""
        self.init_from_settings(verbosity)
        if config is None:
            raise CommandError("--config is required.", returncode=CONFIG_ERROR)
        if threads is not None:
            if threads < 1:
                raise CommandError("--threads must be >= 1.", returncode=CONFIG_ERROR)
            self.threads = threads
        if out is not None:
            self.out = out
        self.out_dir = Path(self.out)
        self.seed = seed
        self.scenario_glob = scenario
        self.logger = logging.getLogger(f"{self.logger_name}.{self.name}")

        with Timer(logger=None) as command_timer:
            try:
                run_config = load_run_config(config)
                context = self.run(run_config)
            except ConfigError as e:
                raise CommandError(str(e), returncode=CONFIG_ERROR) from e
            except NrtlStudyError as e:
                if self.verbosity > 0:
                    error_logger.error(
                        f"{self.name} failed",
                        extra={"command": self.name, **e.error_context()},
                    )
                raise CommandError(str(e), returncode=NUMERICAL_ERROR) from e
        if self.verbosity > 0:
            self.logger.info(
                f"{self.name} done",
                extra={
                    **context,
                    "out": str(self.out_dir),
                    "timers": {"command_s": round(command_timer.last, 3)},
                },
            )

    @property
    def name(self) -> str:
        return self.__module__.rsplit(".", 1)[-1]

    def run(self, run_config: RunConfig) -> dict[str, Any]:
        """Run the command, write outputs, and return the log context."""
        raise NotImplementedError()

    def select(self, items: Sequence[_Labeled]) -> list[_Labeled]:
        """Items whose label matches --scenario (all when no filter is given)."""
        if self.scenario_glob is None:
            return list(items)
        return [
            item
            for item in items
            if fnmatchcase(getattr(item, "label"), self.scenario_glob)
        ]

    def detail(self, message: str, extra: dict[str, Any]) -> None:
        """Per-scenario log record, at verbosity 2 and above."""
        if self.verbosity > 1:
            self.logger.info(message, extra=extra)
