from typing import TextIO

import bittensor as bt
from rich.console import Console
from rich.table import Table

from phishlens.base.command import BaseCommand
from phishlens.enrichment import load_condition_table
from phishlens.errors import ConfigError
from phishlens.evaluation import EvaluationSettings, run_evaluation
from phishlens.ingest import load_dataset
from phishlens.pipeline import build_backend, build_enricher
from phishlens.protocol import EvaluationRun
from phishlens.utils.config import add_evaluate_args


def _fmt(value) -> str:
    return "-" if value is None else f"{value:.3f}"


def summary_table(run: EvaluationRun) -> Table:
    table = Table(title=f"{len(run.conditions)} condition(s) x {run.repetitions} repetition(s)")
    for column in ("Condition", "Rep", "Accuracy", "Precision", "Recall", "F1", "Log-loss", "AUC", "Failed"):
        table.add_column(column, justify="left" if column == "Condition" else "right")
    for row in run.metrics:
        m = row.metrics
        table.add_row(
            row.condition,
            str(row.repetition),
            _fmt(m.accuracy),
            _fmt(m.precision),
            _fmt(m.recall),
            _fmt(m.f1),
            _fmt(m.log_loss),
            _fmt(m.roc_auc),
            str(row.n_failed),
        )
    return table


class EvaluateCommand(BaseCommand):
    """Runs the dataset under each condition and writes the three reports."""

    command_name = "evaluate"
    prog = "phishlens-evaluate"

    @classmethod
    def add_args(cls, parser):
        super().add_args(parser)
        add_evaluate_args(cls, parser)

    def __init__(self, config=None, environ=None):
        super(EvaluateCommand, self).__init__(config=config, environ=environ)
        self.backend = build_backend(self.settings)
        # Verdicts are simulated; only the country may come from a lookup.
        self.enricher = build_enricher(self.settings.model_copy(
            update={"enrichment": self.settings.enrichment.model_copy(update={"vt_api_key": None})}
        ))

    def run(self, stdout: TextIO) -> int:
        path = self.config.dataset_path
        if not path:
            raise ConfigError("a dataset CSV path is required")
        dataset = load_dataset(path)
        cfg = self.settings.evaluation
        table = (
            load_condition_table(self.settings.enrichment.conditions_file)
            if self.settings.enrichment.conditions_file
            else None
        )

        run = run_evaluation(
            dataset,
            cfg.conditions,
            self.backend,
            repetitions=cfg.reps,
            out_dir=cfg.out_dir,
            enricher=self.enricher,
            settings=EvaluationSettings(
                temperature=self.settings.llm.temperature,
                header_budget=self.settings.prompting.header_budget,
                eps=cfg.eps,
                yates=cfg.yates,
                fan_out=cfg.fan_out,
                save_events=not cfg.dont_save_events,
            ),
            condition_table=table,
        )
        Console(file=stdout, width=120).print(summary_table(run))
        bt.logging.success(f"Reports written to {cfg.out_dir}")
        return 0


def main() -> int:
    return EvaluateCommand.main()


if __name__ == "__main__":
    raise SystemExit(main())
