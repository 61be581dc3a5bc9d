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

import asyncio
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import bittensor as bt

from phishlens.enrichment.enricher import Enricher, EnrichmentMode
from phishlens.enrichment.simulator import resolve_condition
from phishlens.errors import ConfigError, PhishlensError, StatsError
from phishlens.evaluation.metrics import DEFAULT_EPS, compute_metrics
from phishlens.evaluation.reports import write_condition_reports, write_reports
from phishlens.evaluation.stats import (
    anova_oneway,
    chi_square_omnibus,
    pairwise_chi_square,
    stats_matrix,
    tukey_hsd,
)
from phishlens.ingest.dataset import to_preprocessed
from phishlens.prompting.backends import DEFAULT_TEMPERATURE, LlmBackend
from phishlens.prompting.chain import classify
from phishlens.prompting.prompts import DEFAULT_HEADER_BUDGET
from phishlens.protocol import (
    DatasetEmail,
    EvaluationRun,
    FailedRecord,
    MetricsRow,
    PredictionRecord,
    SimulationCondition,
    StatsTable,
)
from phishlens.utils.logging import close_events_logger, setup_events_logger


@dataclass(frozen=True)
class EvaluationSettings:
    temperature: float = DEFAULT_TEMPERATURE
    header_budget: int = DEFAULT_HEADER_BUDGET
    eps: float = DEFAULT_EPS
    yates: bool = True
    fan_out: int = 1
    save_events: bool = True
    per_condition_reports: bool = True


Task = Tuple[int, SimulationCondition, int, DatasetEmail]


def evaluate_one(
    task: Task,
    backend: LlmBackend,
    enricher: Enricher,
    settings: EvaluationSettings,
) -> Union[PredictionRecord, FailedRecord]:
    """
    Classification-only chain for one (condition, repetition, email): simulated
    enrichment for the email's ground truth, first prompt, parsed verdict.
    """
    _, condition, repetition, email = task
    try:
        preprocessed = to_preprocessed(email)
        enrichment = enricher.enrich(preprocessed, EnrichmentMode.simulated(condition, email.label))
        outcome, _ = classify(
            preprocessed,
            enrichment,
            backend,
            temperature=settings.temperature,
            header_budget=settings.header_budget,
        )
    except PhishlensError as e:
        return FailedRecord(
            email_id=email.id,
            condition=condition.name,
            repetition=repetition,
            truth=email.label,
            error=type(e).__name__,
            message=str(e),
        )
    return PredictionRecord(
        email_id=email.id,
        condition=condition.name,
        repetition=repetition,
        truth=email.label,
        predicted=outcome.label,
        probability=outcome.phishing_probability,
        correct=outcome.label == email.label,
    )


async def concurrent_forward(
    tasks: Sequence[Task],
    backend: LlmBackend,
    enricher: Enricher,
    settings: EvaluationSettings,
) -> List[Union[PredictionRecord, FailedRecord]]:
    """Runs the tasks on worker threads, at most ``fan_out`` at a time, keeping task order."""
    fan_out = settings.fan_out if backend.concurrent_safe else 1
    semaphore = asyncio.Semaphore(max(1, fan_out))

    async def run(task: Task):
        async with semaphore:
            return await asyncio.to_thread(evaluate_one, task, backend, enricher, settings)

    return list(await asyncio.gather(*(run(t) for t in tasks)))


def _safe(fn, *args) -> Optional[Any]:
    try:
        return fn(*args)
    except StatsError as e:
        bt.logging.debug(f"{fn.__name__} skipped: {e}")
        return None


def build_stats(
    groups: Dict[str, Tuple[int, int]],
    probabilities: Dict[str, List[float]],
    yates: bool,
) -> Dict[str, Any]:
    """StatsTable over the given groups plus the square matrices of the pairwise tests."""
    names = list(groups)
    pairs = pairwise_chi_square(groups, yates=yates) if len(names) > 1 else []
    table = StatsTable(
        groups=names,
        omnibus=_safe(chi_square_omnibus, [groups[n] for n in names], yates),
        pairwise=pairs,
        anova=_safe(anova_oneway, [probabilities[n] for n in names]),
        tukey=_safe(tukey_hsd, [probabilities[n] for n in names]),
    )
    payload = table.model_dump()
    payload["matrices"] = stats_matrix(pairs, names)
    return payload


def compute_run_stats(
    records: Sequence[PredictionRecord],
    conditions: Sequence[str],
    repetitions: int,
    yates: bool = True,
) -> Dict[str, Any]:
    """
    Across conditions: chi-square on correct/wrong counts (all repetitions
    pooled) and ANOVA/Tukey on predicted probabilities. Within each condition
    run more than once: the same tests across repetitions.
    """
    def tally(rows):
        correct = sum(1 for r in rows if r.correct)
        return (correct, len(rows) - correct)

    by_condition = {c: [r for r in records if r.condition == c] for c in conditions}
    report: Dict[str, Any] = {
        "conditions": build_stats(
            {c: tally(rows) for c, rows in by_condition.items()},
            {c: [r.probability for r in rows] for c, rows in by_condition.items()},
            yates,
        ),
        "stability": {},
    }
    if repetitions > 1:
        for condition, rows in by_condition.items():
            reps = {str(i): [r for r in rows if r.repetition == i] for i in range(repetitions)}
            report["stability"][condition] = build_stats(
                {i: tally(r) for i, r in reps.items()},
                {i: [x.probability for x in r] for i, r in reps.items()},
                yates,
            )
    return report


def run_evaluation(
    dataset: Sequence[DatasetEmail],
    conditions: Sequence[Union[str, SimulationCondition]],
    backend: LlmBackend,
    repetitions: int,
    out_dir: str,
    enricher: Optional[Enricher] = None,
    settings: EvaluationSettings = EvaluationSettings(),
    condition_table: Optional[Dict[str, SimulationCondition]] = None,
) -> EvaluationRun:
    """
    Evaluates every email under every condition ``repetitions`` times and
    writes the reports.

    Failed chains are kept as FailedRecord rows, excluded from the metrics and
    counted per (condition, repetition). Results are aggregated in (condition,
    repetition, email_id) order whatever the fan-out.
    """
    if repetitions < 1:
        raise ValueError("repetitions must be >= 1")
    resolved = [resolve_condition(c, condition_table) for c in conditions]
    names = [c.name for c in resolved]
    if len(set(names)) != len(names):
        raise ConfigError(f"conditions listed more than once: {', '.join(names)}")
    enricher = enricher or Enricher.offline()

    events = setup_events_logger(out_dir) if settings.save_events else None
    try:
        ordered_emails = sorted(dataset, key=lambda e: e.id)
        tasks: List[Task] = [
            (ci, condition, rep, email)
            for ci, condition in enumerate(resolved)
            for rep in range(repetitions)
            for email in ordered_emails
        ]
        bt.logging.info(
            f"Evaluating {len(ordered_emails)} emails x {len(names)} conditions x {repetitions} repetition(s)"
        )
        results = asyncio.run(concurrent_forward(tasks, backend, enricher, settings))

        records = [r for r in results if isinstance(r, PredictionRecord)]
        failures = [r for r in results if isinstance(r, FailedRecord)]
        for failure in failures:
            bt.logging.warning(
                f"{failure.condition}/{failure.repetition} email {failure.email_id}: {failure.error}: {failure.message}"
            )
            if events is not None:
                events.event(
                    f"failed condition={failure.condition} repetition={failure.repetition} "
                    f"email_id={failure.email_id} error={failure.error} message={failure.message}"
                )

        metrics = []
        for name in names:
            for rep in range(repetitions):
                rows = [r for r in records if r.condition == name and r.repetition == rep]
                failed = sum(1 for f in failures if f.condition == name and f.repetition == rep)
                report = compute_metrics(rows, eps=settings.eps, require_auc=False)
                metrics.append(MetricsRow(condition=name, repetition=rep, n_failed=failed, metrics=report))
                bt.logging.info(
                    f"{name}/{rep}: accuracy={report.accuracy:.3f} f1={report.f1:.3f} "
                    f"log_loss={report.log_loss:.3f} failed={failed}"
                )

        stats = compute_run_stats(records, names, repetitions, yates=settings.yates)
        write_reports(records, metrics, stats, out_dir)
        if settings.per_condition_reports:
            for name in names:
                write_condition_reports(name, records, metrics, out_dir)
    finally:
        if events is not None:
            close_events_logger(events)

    return EvaluationRun(
        conditions=names,
        repetitions=repetitions,
        records=records,
        failures=failures,
        metrics=metrics,
        stats=stats,
    )
