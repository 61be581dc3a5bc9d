from typing import List, Optional, Tuple, Union

import bittensor as bt

from phishlens.errors import BackendTransportError
from phishlens.prompting.backends import DEFAULT_TEMPERATURE, LlmBackend
from phishlens.prompting.parse import parse_classification_response
from phishlens.prompting.prompts import (
    DEFAULT_HEADER_BUDGET,
    build_classification_prompt,
    build_explanation_prompt,
)
from phishlens.protocol import (
    ChatMessage,
    ClassificationOutcome,
    DatasetEmail,
    PreprocessedEmail,
    PrimedFeature,
    UrlEnrichment,
)


def complete_with_retry(backend: LlmBackend, conversation: List[ChatMessage], temperature: float) -> str:
    """One retry on transport failure; parse failures are never retried."""
    try:
        return backend.complete(conversation, temperature=temperature)
    except BackendTransportError as e:
        bt.logging.warning(f"{backend.name} transport error, retrying once: {e}")
        return backend.complete(conversation, temperature=temperature)


def classify(
    email: Union[PreprocessedEmail, DatasetEmail],
    enrichment: Optional[UrlEnrichment],
    backend: LlmBackend,
    temperature: float = DEFAULT_TEMPERATURE,
    header_budget: int = DEFAULT_HEADER_BUDGET,
) -> Tuple[ClassificationOutcome, List[ChatMessage]]:
    """Runs the first prompt only. Returns the outcome and the conversation so far."""
    conversation = build_classification_prompt(email, enrichment, header_budget).messages()
    raw = complete_with_retry(backend, conversation, temperature)
    outcome = parse_classification_response(raw)
    conversation.append(ChatMessage(role="assistant", content=raw))
    return outcome, conversation


def classify_and_explain(
    email: Union[PreprocessedEmail, DatasetEmail],
    enrichment: Optional[UrlEnrichment],
    backend: LlmBackend,
    priming: Optional[PrimedFeature] = None,
    temperature: float = DEFAULT_TEMPERATURE,
    header_budget: int = DEFAULT_HEADER_BUDGET,
) -> Tuple[ClassificationOutcome, Optional[str]]:
    """
    The two-prompt chain.

    The explanation prompt is sent in the same conversation as the
    classification (system, user, assistant, user) when the verdict is phishing
    or when a priming feature forces an explanation. A legit verdict without
    priming returns no explanation.
    """
    outcome, conversation = classify(email, enrichment, backend, temperature, header_budget)
    if outcome.label != "phishing" and priming is None:
        return outcome, None

    conversation.extend(build_explanation_prompt(priming).messages())
    explanation = complete_with_retry(backend, conversation, temperature)
    return outcome, explanation.strip().strip('"').strip()
