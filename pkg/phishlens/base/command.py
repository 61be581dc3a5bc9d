# The MIT License (MIT)
# Copyright © 2023 Yuma Rao
# Copyright © 2024 phishlens developers

# Permission is hereby granted, free of charge, to any person obtaining a copy of this software and associated
# documentation files (the “Software”), to deal in the Software without restriction, including without limitation
# the rights to use, copy, modify, merge, publish, distribute, sublicense, and/or sell copies of the Software,
# and to permit persons to whom the Software is furnished to do so, subject to the following conditions:

# The above copyright notice and this permission notice shall be included in all copies or substantial portions of
# the Software.

# THE SOFTWARE IS PROVIDED “AS IS”, WITHOUT WARRANTY OF ANY KIND, EXPRESS OR IMPLIED, INCLUDING BUT NOT LIMITED TO
# THE WARRANTIES OF MERCHANTABILITY, FITNESS FOR A PARTICULAR PURPOSE AND NONINFRINGEMENT. IN NO EVENT SHALL
# THE AUTHORS OR COPYRIGHT HOLDERS BE LIABLE FOR ANY CLAIM, DAMAGES OR OTHER LIABILITY, WHETHER IN AN ACTION
# OF CONTRACT, TORT OR OTHERWISE, ARISING FROM, OUT OF OR IN CONNECTION WITH THE SOFTWARE OR THE USE OR OTHER
# DEALINGS IN THE SOFTWARE.

import copy
import json
import sys
from abc import ABC, abstractmethod
from typing import Mapping, Optional, Sequence, TextIO

import bittensor as bt
from pydantic import ValidationError

from phishlens import __spec_version__ as spec_version
from phishlens.errors import EXIT_INPUT, PhishlensError
from phishlens.utils.config import AppConfig, add_args, check_config, config


class BaseCommand(ABC):
    """
    Base class for the phishlens command-line entry points. Subclasses add their
    own arguments and implement ``run``; configuration parsing, logging set-up
    and the error-to-exit-code mapping live here.
    """

    command_name: str = "BaseCommand"
    prog: str = "phishlens"
    spec_version: int = spec_version

    @classmethod
    def check_config(cls, config: "bt.Config", environ: Optional[Mapping[str, str]] = None) -> AppConfig:
        return check_config(cls, config, environ)

    @classmethod
    def add_args(cls, parser):
        add_args(cls, parser)

    @classmethod
    def config(cls, argv: Optional[Sequence[str]] = None):
        return config(cls, argv)

    def __init__(self, config=None, environ: Optional[Mapping[str, str]] = None):
        self.config = copy.deepcopy(config) if config is not None else self.config([])
        self.settings = self.check_config(self.config, environ)

        # Set up logging with the provided configuration.
        bt.logging.set_config(config=self.config.logging)

        # Secrets show up masked.
        bt.logging.debug(f"{self.command_name} settings: {self.settings.masked()}")

    @abstractmethod
    def run(self, stdout: TextIO) -> int:
        ...

    @classmethod
    def main(
        cls,
        argv: Optional[Sequence[str]] = None,
        environ: Optional[Mapping[str, str]] = None,
        stdout: Optional[TextIO] = None,
        stderr: Optional[TextIO] = None,
    ) -> int:
        """
        Parses ``argv``, runs the command and returns its exit status. Failures
        are reported on stderr as ``{"error", "message", "exit_code"}``.
        """
        stdout = stdout or sys.stdout
        stderr = stderr or sys.stderr
        try:
            command = cls(config=cls.config(sys.argv[1:] if argv is None else argv), environ=environ)
            return command.run(stdout)
        except PhishlensError as e:
            bt.logging.error(f"{type(e).__name__}: {e}")
            report = e.to_dict()
        except (OSError, ValidationError) as e:
            bt.logging.error(f"{type(e).__name__}: {e}")
            report = {"error": type(e).__name__, "message": str(e), "exit_code": EXIT_INPUT}
        stderr.write(json.dumps(report, ensure_ascii=False) + "\n")
        stderr.flush()
        return report["exit_code"]
