import json
import math
from typing import Any, Dict, List

from phishlens.errors import (
    BadLabel,
    ExplanationCountOutOfBounds,
    MissingField,
    NoJsonFound,
    ProbabilityOutOfRange,
)
from phishlens.protocol import ClassificationOutcome, PersuasionPrinciple

LABEL_ALIASES = {"phishing": "phishing", "legit": "legit", "legitimate": "legit"}
EXPLANATION_KEYS = ("explanation", "explanations", "explanation_features")
NAME_KEYS = ("name", "principle")
EVIDENCE_KEYS = ("evidence", "specific_sentences", "specific sentences", "sentences", "part")
RATIONALE_KEYS = ("rationale", "reason")

_decoder = json.JSONDecoder()


def extract_json_object(raw: str) -> Dict[str, Any]:
    """First balanced top-level JSON object in ``raw``; prose and code fences around it are ignored."""
    start = raw.find("{")
    while start != -1:
        try:
            value, _ = _decoder.raw_decode(raw, start)
        except json.JSONDecodeError:
            start = raw.find("{", start + 1)
            continue
        if isinstance(value, dict):
            return value
        start = raw.find("{", start + 1)
    raise NoJsonFound("no JSON object in backend response")


def normalize_probability(value: Any) -> float:
    """
    Maps 0-100 (number, "n" or "n%") onto [0, 1].
    """
    if isinstance(value, bool):
        raise ProbabilityOutOfRange(value)
    if isinstance(value, str):
        text = value.strip()
        if text.endswith("%"):
            text = text[:-1].strip()
        try:
            number = float(text)
        except ValueError:
            raise ProbabilityOutOfRange(value) from None
    elif isinstance(value, (int, float)):
        number = float(value)
    else:
        raise ProbabilityOutOfRange(value)
    if math.isnan(number) or not 0.0 <= number <= 100.0:
        raise ProbabilityOutOfRange(value)
    return number / 100.0


def _pick(obj: Dict[str, Any], keys, field: str) -> Any:
    for key in keys:
        if key in obj:
            return obj[key]
    raise MissingField(field)


def _text(value: Any) -> str:
    if isinstance(value, list):
        return " ".join(str(v) for v in value)
    return str(value).strip()


def _principles(value: Any) -> List[PersuasionPrinciple]:
    if value is None:
        return []
    if not isinstance(value, list):
        raise MissingField("persuasion_principles")
    principles = []
    for i, item in enumerate(value):
        if not isinstance(item, dict):
            raise MissingField(f"persuasion_principles[{i}].name")
        fields = {
            "name": _text(_pick(item, NAME_KEYS, f"persuasion_principles[{i}].name")),
            "evidence": _text(_pick(item, EVIDENCE_KEYS, f"persuasion_principles[{i}].evidence")),
            "rationale": _text(_pick(item, RATIONALE_KEYS, f"persuasion_principles[{i}].rationale")),
        }
        for name, text in fields.items():
            if not text:
                raise MissingField(f"persuasion_principles[{i}].{name}")
        principles.append(PersuasionPrinciple(**fields))
    return principles


def _feature_text(item: Any) -> str:
    if isinstance(item, dict):
        return ": ".join(str(v).strip() for v in item.values() if str(v).strip())
    return str(item).strip()


def parse_classification_response(raw: str) -> ClassificationOutcome:
    """
    Parses the first-prompt answer.

    Raises:
        NoJsonFound, MissingField, BadLabel, ProbabilityOutOfRange,
        ExplanationCountOutOfBounds
    """
    obj = extract_json_object(raw)

    label = _pick(obj, ("label",), "label")
    normalized = LABEL_ALIASES.get(label.strip().lower()) if isinstance(label, str) else None
    if normalized is None:
        raise BadLabel(label)

    probability = normalize_probability(_pick(obj, ("phishing_probability", "probability"), "phishing_probability"))
    principles = _principles(obj.get("persuasion_principles"))

    explanation = _pick(obj, EXPLANATION_KEYS, "explanation")
    if isinstance(explanation, str):
        explanation = [explanation]
    if not isinstance(explanation, list):
        raise MissingField("explanation")
    features = [text for text in (_feature_text(item) for item in explanation) if text]
    if not 3 <= len(features) <= 5:
        raise ExplanationCountOutOfBounds(len(features))

    return ClassificationOutcome(
        label=normalized,
        phishing_probability=probability,
        persuasion_principles=principles,
        explanation_features=features,
    )


def outcome_to_dict(outcome: ClassificationOutcome) -> Dict[str, Any]:
    """The backend's JSON shape, probability back on the 0-100 scale."""
    return {
        "label": outcome.label,
        "phishing_probability": float(f"{outcome.phishing_probability * 100:.12g}"),
        "persuasion_principles": [p.model_dump() for p in outcome.persuasion_principles],
        "explanation": list(outcome.explanation_features),
    }


def serialize_outcome(outcome: ClassificationOutcome) -> str:
    return json.dumps(outcome_to_dict(outcome), ensure_ascii=False)
