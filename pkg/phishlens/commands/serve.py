from typing import TextIO

import bittensor as bt
import uvicorn

from phishlens.api import create_app
from phishlens.base.command import BaseCommand
from phishlens.pipeline import TriagePipeline
from phishlens.utils.config import add_serve_args


class ServeCommand(BaseCommand):
    command_name = "serve"
    prog = "phishlens-serve"

    @classmethod
    def add_args(cls, parser):
        super().add_args(parser)
        add_serve_args(cls, parser)

    def __init__(self, config=None, environ=None):
        super(ServeCommand, self).__init__(config=config, environ=environ)
        # Requests must not wait on a full enrichment window; they get a 429.
        self.pipeline = TriagePipeline(self.settings, blocking=False)
        self.app = create_app(self.pipeline, fan_out=self.settings.server.fan_out)

    def run(self, stdout: TextIO) -> int:
        server = self.settings.server
        bt.logging.info(f"Serving on http://{server.bind}")
        uvicorn.run(self.app, host=server.host, port=server.port, log_level="info")
        return 0


def main() -> int:
    return ServeCommand.main()


if __name__ == "__main__":
    raise SystemExit(main())
