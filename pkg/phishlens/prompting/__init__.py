from .prompts import (
    FEATURE_CATALOG,
    build_classification_prompt,
    build_explanation_prompt,
    primed_feature,
)
from .parse import parse_classification_response, serialize_outcome, outcome_to_dict
from .backends import LlmBackend, ChatCompletionsBackend, DEFAULT_TEMPERATURE
from .chain import classify, classify_and_explain
