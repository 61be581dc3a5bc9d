import json
from importlib import resources
from typing import Dict, Optional, Union

from pydantic import ValidationError

from phishlens.errors import ConfigError
from phishlens.protocol import (
    CONDITION_NAMES,
    ConditionName,
    Label,
    SimulationCondition,
    UrlEnrichment,
    VtVerdicts,
)

# Stands in for the real host when a condition is simulated without one.
SIMULATED_HOST = "http://simulated.invalid"

# (n_harmless, n_undetected, n_malicious) per ground-truth class. Q0 phishing
# follows "all detectors report undetected" rather than the printed (0, 0, 0).
def _triple(values) -> VtVerdicts:
    h, u, m = values
    return VtVerdicts(n_harmless=h, n_undetected=u, n_malicious=m)


def build_conditions(table: Dict[str, Dict[str, list]]) -> Dict[str, SimulationCondition]:
    conditions = {"noURL": SimulationCondition(name="noURL")}
    for name, rows in table.items():
        if name not in CONDITION_NAMES or name == "noURL":
            raise ConfigError(f"unknown condition {name!r}; valid: {', '.join(CONDITION_NAMES)}")
        try:
            conditions[name] = SimulationCondition(
                name=name, table={label: _triple(row) for label, row in rows.items()}
            )
        except (ValidationError, ValueError, TypeError) as e:
            raise ConfigError(f"condition {name}: {e}") from e
    missing = [n for n in CONDITION_NAMES if n not in conditions]
    if missing:
        raise ConfigError(f"condition table lacks: {', '.join(missing)}")
    return conditions


def load_condition_table(path: Optional[str] = None) -> Dict[str, SimulationCondition]:
    """
    Reads ``{name: {"legit": [h, u, m], "phishing": [h, u, m]}}``. The bundled
    table is used when no path is given.
    """
    try:
        if path is None:
            text = resources.files("phishlens.data").joinpath("conditions.json").read_text("utf-8")
        else:
            with open(path, "r", encoding="utf-8") as f:
                text = f.read()
        raw = json.loads(text)
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f"cannot read condition table {path}: {e}") from e
    raw.pop("noURL", None)
    return build_conditions(raw)


DEFAULT_CONDITIONS = load_condition_table()


def resolve_condition(
    condition: Union[str, SimulationCondition],
    conditions: Optional[Dict[str, SimulationCondition]] = None,
) -> SimulationCondition:
    if isinstance(condition, SimulationCondition):
        return condition
    table = conditions or DEFAULT_CONDITIONS
    if condition not in table:
        raise ConfigError(f"unknown condition {condition!r}; valid: {', '.join(CONDITION_NAMES)}")
    return table[condition]


def simulate_enrichment(
    condition: Union[ConditionName, SimulationCondition],
    truth: Label,
    host_url: str = SIMULATED_HOST,
    country: Optional[str] = None,
) -> Optional[UrlEnrichment]:
    """Pure function of (condition, truth); noURL yields no enrichment."""
    condition = resolve_condition(condition)
    if condition.name == "noURL":
        return None
    return UrlEnrichment(
        host_url=host_url,
        country=country,
        verdicts=condition.table[truth],
        source="simulated",
    )
