import time
from dataclasses import dataclass
from typing import Callable, Literal, Optional

import bittensor as bt

from phishlens.enrichment.geolocation import CountryService, Resolver, StaticGeoMap, geolocate_host
from phishlens.enrichment.hosts import extract_primary_host
from phishlens.enrichment.simulator import SIMULATED_HOST, resolve_condition, simulate_enrichment
from phishlens.enrichment.virustotal import VirusTotalClient
from phishlens.errors import EnrichmentError, NotFound, UnparseableUrl
from phishlens.protocol import Label, PreprocessedEmail, SimulationCondition, UrlEnrichment, VtVerdicts
from phishlens.utils.misc import TtlCache


@dataclass(frozen=True)
class EnrichmentMode:
    kind: Literal["off", "live", "simulated"]
    condition: Optional[SimulationCondition] = None
    truth: Optional[Label] = None

    @classmethod
    def off(cls) -> "EnrichmentMode":
        return cls("off")

    @classmethod
    def live(cls) -> "EnrichmentMode":
        return cls("live")

    @classmethod
    def simulated(cls, condition, truth: Label) -> "EnrichmentMode":
        return cls("simulated", resolve_condition(condition), truth)


def _encode(enrichment: UrlEnrichment) -> dict:
    return enrichment.model_dump()


def _decode(raw: dict) -> UrlEnrichment:
    return UrlEnrichment.model_validate(raw)


def enrichment_cache(ttl: float = 86400, spill_path: Optional[str] = None, clock: Callable[[], float] = time.time) -> TtlCache:
    return TtlCache(ttl=ttl, clock=clock, spill_path=spill_path, encode=_encode, decode=_decode)


class Enricher:
    """
    Produces the UrlEnrichment of an email's primary URL.

    Live lookups go through the TTL cache keyed by host_url; a cache hit is
    reported with ``source="cache"``. Simulated lookups take their verdicts from
    the condition table and their country, when a resolver and country service
    are configured, from the real host.
    """

    def __init__(
        self,
        vt_client: Optional[VirusTotalClient] = None,
        resolver: Optional[Resolver] = None,
        country_service: Optional[CountryService] = None,
        cache: Optional[TtlCache] = None,
        skip_uncertain: bool = False,
    ):
        self.vt_client = vt_client
        self.resolver = resolver
        self.country_service = country_service
        self.cache = cache if cache is not None else enrichment_cache()
        self.skip_uncertain = skip_uncertain

    @classmethod
    def offline(cls) -> "Enricher":
        """No reputation client; countries come from the bundled stub map."""
        geo_map = StaticGeoMap.bundled()
        return cls(resolver=geo_map.resolver, country_service=geo_map)

    def _country(self, host_url: str) -> Optional[str]:
        if self.resolver is None or self.country_service is None:
            return None
        return geolocate_host(host_url, self.resolver, self.country_service)

    def _live(self, host_url: str) -> UrlEnrichment:
        cached = self.cache.get(host_url)
        if cached is not None:
            bt.logging.debug(f"Enrichment cache hit for {host_url}")
            return cached.model_copy(update={"source": "cache"})
        verdicts: Optional[VtVerdicts] = None
        if self.vt_client is None:
            bt.logging.debug("No reputation client configured (APOLLO_VT_API_KEY unset); skipping scan verdicts")
        else:
            try:
                verdicts = self.vt_client.lookup(host_url)
            except NotFound:
                verdicts = None
        enrichment = UrlEnrichment(
            host_url=host_url, country=self._country(host_url), verdicts=verdicts, source="live"
        )
        self.cache.set(host_url, enrichment)
        return enrichment

    def _simulated(self, host_url: Optional[str], mode: EnrichmentMode) -> Optional[UrlEnrichment]:
        country = None
        if host_url is not None:
            try:
                country = self._country(host_url)
            except EnrichmentError as e:
                bt.logging.warning(f"Geolocation of {host_url} failed, continuing without country: {e}")
        return simulate_enrichment(
            mode.condition, mode.truth, host_url=host_url or SIMULATED_HOST, country=country
        )

    def enrich(self, email: PreprocessedEmail, mode: EnrichmentMode) -> Optional[UrlEnrichment]:
        if mode.kind == "off" or not email.urls:
            return None
        if mode.kind == "simulated":
            try:
                host_url = extract_primary_host(email.urls)
            except UnparseableUrl:
                host_url = None
            enrichment = self._simulated(host_url, mode)
        else:
            host_url = extract_primary_host(email.urls)
            if host_url is None:
                return None
            enrichment = self._live(host_url)
        if (
            self.skip_uncertain
            and enrichment is not None
            and enrichment.verdicts is not None
            and enrichment.verdicts.is_uncertain()
        ):
            bt.logging.debug("Dropping fully uncertain reputation data from the prompt")
            return enrichment.model_copy(update={"verdicts": None})
        return enrichment


def enrich(email: PreprocessedEmail, mode: EnrichmentMode, enricher: Optional[Enricher] = None) -> Optional[UrlEnrichment]:
    return (enricher or Enricher()).enrich(email, mode)
