import json
from dataclasses import dataclass
from typing import Any, Dict, Mapping, Optional

import bittensor as bt
from pydantic import ValidationError

from phishlens.enrichment import (
    BigDataCloudService,
    Enricher,
    EnrichmentMode,
    StaticGeoMap,
    VirusTotalClient,
    dns_resolver,
    enrichment_cache,
)
from phishlens.errors import ConfigError, MalformedMessage
from phishlens.ingest import NO_SUBJECT, parse_eml, preprocess_body
from phishlens.mock import MockLlmBackend
from phishlens.prompting import ChatCompletionsBackend, LlmBackend, classify_and_explain, outcome_to_dict, primed_feature
from phishlens.protocol import (
    ClassificationOutcome,
    PreprocessedEmail,
    PrimedFeature,
    UrlEnrichment,
    ValidationReport,
    WarningMessage,
    WarningPayload,
)
from phishlens.utils.config import AppConfig
from phishlens.utils.ratelimit import SlidingWindowLimiter
from phishlens.warning import build_payload, render_payload, validate_warning


def build_backend(settings: AppConfig) -> LlmBackend:
    if settings.llm.backend == "mock":
        if not settings.llm.fixtures:
            raise ConfigError("--llm mock requires --fixtures <path>")
        return MockLlmBackend.from_file(settings.llm.fixtures)
    if settings.llm.api_key is None:
        raise ConfigError("--llm live requires APOLLO_LLM_API_KEY")
    return ChatCompletionsBackend(
        api_key=settings.llm.api_key.get_secret_value(),
        model=settings.llm.model,
        base_url=settings.llm.base_url,
        limiter=SlidingWindowLimiter(settings.llm.rate_limit_per_min, name="llm"),
    )


def build_enricher(settings: AppConfig, blocking: bool = True) -> Enricher:
    """
    Wires the reputation client, resolver and country service from the
    settings. Each external service gets its own sliding-window limiter;
    ``blocking=False`` turns an exhausted window into RateLimited.
    """
    cfg = settings.enrichment
    rate = cfg.rate_limit_per_min

    vt_client = None
    if cfg.vt_api_key is not None:
        vt_client = VirusTotalClient(
            cfg.vt_api_key.get_secret_value(),
            limiter=SlidingWindowLimiter(rate, name="virustotal"),
            blocking=blocking,
        )

    resolver = service = None
    if cfg.geo == "live":
        resolver = dns_resolver
        service = BigDataCloudService(
            cfg.geo_api_key.get_secret_value() if cfg.geo_api_key is not None else None,
            limiter=SlidingWindowLimiter(rate, name="geolocation"),
            blocking=blocking,
        )
    elif cfg.geo == "stub":
        geo_map = StaticGeoMap.from_file(cfg.geo_stub) if cfg.geo_stub else StaticGeoMap.bundled()
        resolver, service = geo_map.resolver, geo_map

    return Enricher(
        vt_client=vt_client,
        resolver=resolver,
        country_service=service,
        cache=enrichment_cache(cfg.cache_ttl, cfg.cache_path),
        skip_uncertain=cfg.skip_uncertain,
    )


@dataclass(frozen=True)
class TriageResult:
    email: PreprocessedEmail
    outcome: ClassificationOutcome
    enrichment: Optional[UrlEnrichment] = None
    message: Optional[WarningMessage] = None
    validation: Optional[ValidationReport] = None
    payload: Optional[WarningPayload] = None

    def to_dict(self) -> Dict[str, Any]:
        """The verdict JSON shared by the command line and the HTTP service."""
        return {
            "verdict": outcome_to_dict(self.outcome),
            "enrichment": self.enrichment.model_dump() if self.enrichment is not None else None,
            "warning": self.payload.to_wire() if self.payload is not None else None,
            "explanation_validation": self.validation.model_dump() if self.validation is not None else None,
        }

    def render(self, fmt: str = "json") -> bytes:
        if fmt == "json" or self.payload is None:
            return (json.dumps(self.to_dict(), indent=2, ensure_ascii=False) + "\n").encode("utf-8")
        return render_payload(self.payload, fmt)


class TriagePipeline:
    """
    parse → enrich → classify_and_explain → validate → payload, for one email.

    The pipeline holds no per-request state besides the enrichment cache and
    the rate limiters, so one instance serves every request.
    """

    def __init__(
        self,
        settings: AppConfig,
        backend: Optional[LlmBackend] = None,
        enricher: Optional[Enricher] = None,
        blocking: bool = True,
    ):
        self.settings = settings
        self.backend = backend or build_backend(settings)
        self.enricher = enricher or build_enricher(settings, blocking=blocking)

    def priming(self, feature: Optional[str] = None, description: Optional[str] = None) -> Optional[PrimedFeature]:
        feature = feature or self.settings.prompting.feature
        if feature is None:
            return None
        return primed_feature(feature, description or self.settings.prompting.feature_description)

    def run(
        self,
        email: PreprocessedEmail,
        enrich: bool = True,
        feature: Optional[str] = None,
        feature_description: Optional[str] = None,
    ) -> TriageResult:
        mode = EnrichmentMode.live() if enrich and not self.settings.enrichment.off else EnrichmentMode.off()
        enrichment = self.enricher.enrich(email, mode)
        priming = self.priming(feature, feature_description)

        outcome, explanation = classify_and_explain(
            email,
            enrichment,
            self.backend,
            priming=priming,
            temperature=self.settings.llm.temperature,
            header_budget=self.settings.prompting.header_budget,
        )
        bt.logging.info(f"Verdict {outcome.label} ({outcome.phishing_probability:.2f})")
        if explanation is None:
            return TriageResult(email=email, outcome=outcome, enrichment=enrichment)

        validation = validate_warning(explanation)
        if not validation.ok:
            bt.logging.warning(
                f"Explanation does not meet the message constraints: {[v.detail for v in validation.violations]}"
            )
        message = WarningMessage.from_text(explanation, priming.key if priming is not None else None)
        return TriageResult(
            email=email,
            outcome=outcome,
            enrichment=enrichment,
            message=message,
            validation=validation,
            payload=build_payload(outcome, message),
        )

    def run_eml(self, raw: bytes, **kwargs) -> TriageResult:
        return self.run(parse_eml(raw), **kwargs)

    def run_fields(self, fields: Mapping[str, Any], **kwargs) -> TriageResult:
        """
        Triage from already-split fields ``{headers?, subject?, body}``. The body
        goes through the same HTML preprocessing as a parsed message.
        """
        markup = fields.get("body")
        if not isinstance(markup, str) or not markup.strip():
            raise MalformedMessage("fields.body must be a non-empty string")
        headers = fields.get("headers") or {}
        if not isinstance(headers, dict):
            raise MalformedMessage("fields.headers must be an object")
        body, urls = preprocess_body(markup)
        try:
            email = PreprocessedEmail(
                headers={str(k): str(v) for k, v in headers.items()},
                subject=fields.get("subject") or NO_SUBJECT,
                body=body,
                urls=urls,
            )
        except ValidationError as e:
            raise MalformedMessage(f"invalid fields: {e}") from e
        return self.run(email, **kwargs)
