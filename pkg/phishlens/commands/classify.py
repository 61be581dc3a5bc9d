from typing import TextIO

import bittensor as bt

from phishlens.base.command import BaseCommand
from phishlens.errors import ConfigError
from phishlens.pipeline import TriagePipeline
from phishlens.utils.config import add_classify_args


class ClassifyCommand(BaseCommand):
    """
    Triage one .eml file: the verdict JSON (which carries the warning payload)
    with ``--format json``, the rendered warning with ``--format text|html``.
    A legit verdict without priming always prints the verdict JSON.
    """

    command_name = "classify"
    prog = "phishlens-classify"

    @classmethod
    def add_args(cls, parser):
        super().add_args(parser)
        add_classify_args(cls, parser)

    def __init__(self, config=None, environ=None):
        super(ClassifyCommand, self).__init__(config=config, environ=environ)
        self.pipeline = TriagePipeline(self.settings)

    def run(self, stdout: TextIO) -> int:
        path = self.config.eml_path
        if not path:
            raise ConfigError("an .eml path is required")
        with open(path, "rb") as f:
            raw = f.read()
        bt.logging.info(f"Classifying {path}")

        result = self.pipeline.run_eml(raw)
        stdout.write(result.render(self.config.output.format or "json").decode("utf-8"))
        stdout.flush()
        return 0


def main() -> int:
    return ClassifyCommand.main()


if __name__ == "__main__":
    raise SystemExit(main())
