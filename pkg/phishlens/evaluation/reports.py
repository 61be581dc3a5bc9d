import json
import os
from typing import Any, Dict, List, Sequence

import pandas as pd

from phishlens.protocol import MetricsRow, PredictionRecord

PREDICTIONS_FILE = "predicted_labels.csv"
METRICS_FILE = "metrics_report.json"
STATS_FILE = "stats_report.json"

PREDICTION_COLUMNS = ["email_id", "condition", "repetition", "truth", "predicted", "probability", "correct"]


def _dump_json(payload: Any, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False))
        f.write("\n")


def write_predictions(records: Sequence[PredictionRecord], path: str) -> None:
    frame = pd.DataFrame([r.model_dump() for r in records], columns=PREDICTION_COLUMNS)
    frame.to_csv(path, index=False, float_format="%.6f", lineterminator="\n", encoding="utf-8")


def metrics_payload(metrics: Sequence[MetricsRow]) -> Dict[str, Any]:
    rows = [m.to_report() for m in metrics]
    return {"rows": rows, "n_failed": sum(m.n_failed for m in metrics)}


def write_reports(
    records: Sequence[PredictionRecord],
    metrics: Sequence[MetricsRow],
    stats: Dict[str, Any],
    out_dir: str,
) -> List[str]:
    """
    Writes predicted_labels.csv, metrics_report.json and stats_report.json
    under ``out_dir``. Records are expected in (condition, repetition,
    email_id) order; identical inputs give byte-identical files.

    Returns:
        The written paths.
    """
    os.makedirs(out_dir, exist_ok=True)
    paths = [os.path.join(out_dir, name) for name in (PREDICTIONS_FILE, METRICS_FILE, STATS_FILE)]
    write_predictions(records, paths[0])
    _dump_json(metrics_payload(metrics), paths[1])
    _dump_json(stats, paths[2])
    return paths


def write_condition_reports(
    condition: str,
    records: Sequence[PredictionRecord],
    metrics: Sequence[MetricsRow],
    out_dir: str,
) -> List[str]:
    """Per-condition predicted_labels.csv and metrics_report.json in ``out_dir/<condition>``."""
    directory = os.path.join(out_dir, condition)
    os.makedirs(directory, exist_ok=True)
    predictions = os.path.join(directory, PREDICTIONS_FILE)
    report = os.path.join(directory, METRICS_FILE)
    write_predictions([r for r in records if r.condition == condition], predictions)
    _dump_json(metrics_payload([m for m in metrics if m.condition == condition]), report)
    return [predictions, report]
