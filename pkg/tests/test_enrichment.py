import json

import pytest

from phishlens.data import data_path
from phishlens.enrichment import (
    DEFAULT_CONDITIONS,
    Enricher,
    EnrichmentMode,
    StaticGeoMap,
    VirusTotalClient,
    enrichment_cache,
    extract_primary_host,
    geolocate_host,
    load_condition_table,
    resolve_condition,
    simulate_enrichment,
    vt_url_id,
)
from phishlens.enrichment.simulator import SIMULATED_HOST
from phishlens.errors import AuthError, ConfigError, NotFound, RateLimited, TransportError, UnparseableUrl
from phishlens.protocol import CONDITION_NAMES, PreprocessedEmail, UrlEnrichment, VtVerdicts
from phishlens.utils.ratelimit import SlidingWindowLimiter

TABLE = [
    ("Q0", "legit", (0, 28, 0)),
    ("Q0", "phishing", (0, 28, 0)),
    ("Q25", "legit", (22, 21, 0)),
    ("Q25", "phishing", (0, 0, 6)),
    ("Q50", "legit", (43, 14, 0)),
    ("Q50", "phishing", (0, 0, 12)),
    ("Q75", "legit", (65, 7, 0)),
    ("Q75", "phishing", (0, 0, 19)),
    ("Q100", "legit", (87, 0, 0)),
    ("Q100", "phishing", (0, 0, 25)),
    ("Q25ERR", "legit", (0, 21, 6)),
    ("Q25ERR", "phishing", (22, 0, 0)),
    ("Q50ERR", "legit", (0, 14, 12)),
    ("Q50ERR", "phishing", (43, 0, 0)),
    ("Q75ERR", "legit", (0, 7, 19)),
    ("Q75ERR", "phishing", (65, 0, 0)),
    ("Q100ERR", "legit", (0, 0, 25)),
    ("Q100ERR", "phishing", (87, 0, 0)),
]


class FakeResponse:
    def __init__(self, status_code, payload=None):
        self.status_code = status_code
        self._payload = payload

    def json(self):
        if self._payload is None:
            raise ValueError("no JSON")
        return self._payload


class FakeSession:
    def __init__(self, response):
        self.response = response
        self.requests = []

    def get(self, url, **kwargs):
        self.requests.append((url, kwargs))
        if isinstance(self.response, Exception):
            raise self.response
        return self.response


def email_with(urls):
    return PreprocessedEmail(headers={}, subject="s", body="b", urls=urls)


@pytest.mark.parametrize(
    "urls, expected",
    [
        (["HTTPS://Example.COM:8443/a/b?c=d#e"], "https://example.com"),
        (["http://192.0.2.1/login", "https://other.example.com"], "http://192.0.2.1"),
        (["http://[2001:db8::1]/x"], "http://[2001:db8::1]"),
        ([], None),
    ],
)
def test_extract_primary_host(urls, expected):
    assert extract_primary_host(urls) == expected


@pytest.mark.parametrize("bad", ["not a url", "mailto:"])
def test_extract_primary_host_unparseable(bad):
    with pytest.raises(UnparseableUrl):
        extract_primary_host([bad])


@pytest.mark.parametrize("condition, truth, triple", TABLE)
def test_condition_table(condition, truth, triple):
    enrichment = simulate_enrichment(condition, truth)
    assert enrichment.verdicts.as_triple() == triple
    assert enrichment.source == "simulated"
    assert enrichment.host_url == SIMULATED_HOST


def test_defaults_come_from_the_bundled_table(tmp_path):
    assert load_condition_table() == DEFAULT_CONDITIONS
    assert list(DEFAULT_CONDITIONS) == list(CONDITION_NAMES)
    assert {(n, label, v.as_triple()) for n, c in DEFAULT_CONDITIONS.items() for label, v in c.table.items()} == set(TABLE)

    with open(data_path("conditions.json"), "r", encoding="utf-8") as f:
        raw = json.load(f)
    raw["Q50"]["phishing"] = [0, 1, 11]
    edited = tmp_path / "conditions.json"
    edited.write_text(json.dumps(raw), encoding="utf-8")
    assert load_condition_table(str(edited))["Q50"].table["phishing"].as_triple() == (0, 1, 11)


def test_no_url_condition_has_no_enrichment():
    assert simulate_enrichment("noURL", "phishing") is None
    assert simulate_enrichment("noURL", "legit") is None


def test_unknown_condition_lists_valid_names():
    with pytest.raises(ConfigError, match="Q100ERR"):
        resolve_condition("Q33")


def test_simulated_verdicts_stay_within_scanner_ranges():
    for condition in DEFAULT_CONDITIONS.values():
        for verdicts in condition.table.values():
            assert verdicts.within_simulator_ranges()


def test_vt_url_id_has_no_padding():
    assert vt_url_id("http://example.com") == "aHR0cDovL2V4YW1wbGUuY29t"


def test_vt_lookup_reads_last_analysis_stats():
    session = FakeSession(
        FakeResponse(
            200,
            {"data": {"attributes": {"last_analysis_stats": {"harmless": 60, "undetected": 20, "malicious": 3, "suspicious": 1}}}},
        )
    )
    client = VirusTotalClient("key", session=session)

    assert client.lookup("http://example.com").as_triple() == (60, 20, 3)
    url, kwargs = session.requests[0]
    assert url.endswith("/urls/aHR0cDovL2V4YW1wbGUuY29t")
    assert kwargs["headers"] == {"x-apikey": "key"}


@pytest.mark.parametrize(
    "status, error",
    [(401, AuthError), (403, AuthError), (404, NotFound), (429, RateLimited), (500, TransportError)],
)
def test_vt_status_mapping(status, error):
    client = VirusTotalClient("key", session=FakeSession(FakeResponse(status, {})))
    with pytest.raises(error):
        client.lookup("http://example.com")


def test_non_blocking_limiter_raises_rate_limited():
    limiter = SlidingWindowLimiter(1, clock=lambda: 0.0)
    payload = {"data": {"attributes": {"last_analysis_stats": {}}}}
    client = VirusTotalClient("key", limiter=limiter, blocking=False, session=FakeSession(FakeResponse(200, payload)))

    client.lookup("http://example.com")
    with pytest.raises(RateLimited):
        client.lookup("http://example.com")


def test_geolocation_through_stub_map():
    geo = StaticGeoMap({"Example.com": ["203.0.113.5"]}, {"203.0.113.5": "USA"})

    assert geolocate_host("https://example.com", geo.resolver, geo) == "USA"
    assert geolocate_host("https://unknown.example.org", geo.resolver, geo) is None
    assert geo.resolver("192.0.2.7") == ["192.0.2.7"]


class CountingClient:
    def __init__(self, verdicts=None, error=None):
        self.verdicts = verdicts
        self.error = error
        self.calls = 0

    def lookup(self, host_url):
        self.calls += 1
        if self.error is not None:
            raise self.error
        return self.verdicts


def test_live_enrichment_is_cached():
    client = CountingClient(VtVerdicts(n_harmless=1, n_undetected=2, n_malicious=3))
    geo = StaticGeoMap({"example.com": ["203.0.113.5"]}, {"203.0.113.5": "USA"})
    enricher = Enricher(vt_client=client, resolver=geo.resolver, country_service=geo)
    email = email_with(["https://example.com/login"])

    first = enricher.enrich(email, EnrichmentMode.live())
    second = enricher.enrich(email, EnrichmentMode.live())

    assert first == UrlEnrichment(
        host_url="https://example.com",
        country="USA",
        verdicts=VtVerdicts(n_harmless=1, n_undetected=2, n_malicious=3),
        source="live",
    )
    assert second.source == "cache"
    assert second.verdicts == first.verdicts
    assert client.calls == 1


def test_never_scanned_host_keeps_country_only():
    enricher = Enricher(vt_client=CountingClient(error=NotFound("never scanned")))
    enrichment = enricher.enrich(email_with(["https://example.com"]), EnrichmentMode.live())
    assert enrichment.verdicts is None


def test_cache_expires_after_ttl():
    now = [0.0]
    cache = enrichment_cache(ttl=10, clock=lambda: now[0])
    client = CountingClient(VtVerdicts(n_harmless=1, n_undetected=0, n_malicious=0))
    enricher = Enricher(vt_client=client, cache=cache)
    email = email_with(["https://example.com"])

    enricher.enrich(email, EnrichmentMode.live())
    now[0] = 11.0
    enricher.enrich(email, EnrichmentMode.live())
    assert client.calls == 2


def test_cache_spills_to_disk(tmp_path):
    path = str(tmp_path / "cache.json")
    enricher = Enricher(
        vt_client=CountingClient(VtVerdicts(n_harmless=5, n_undetected=0, n_malicious=0)),
        cache=enrichment_cache(spill_path=path),
    )
    enricher.enrich(email_with(["https://example.com"]), EnrichmentMode.live())

    reloaded = enrichment_cache(spill_path=path)
    assert reloaded.get("https://example.com").verdicts.n_harmless == 5


def test_enrichment_off_and_empty_urls():
    enricher = Enricher(vt_client=CountingClient(VtVerdicts(n_harmless=1, n_undetected=0, n_malicious=0)))
    assert enricher.enrich(email_with(["https://example.com"]), EnrichmentMode.off()) is None
    assert enricher.enrich(email_with([]), EnrichmentMode.live()) is None


def test_simulated_mode_uses_real_host_and_truth():
    enricher = Enricher()
    enrichment = enricher.enrich(
        email_with(["http://Paypa1.example.com/x"]), EnrichmentMode.simulated("Q50", "phishing")
    )
    assert enrichment.host_url == "http://paypa1.example.com"
    assert enrichment.verdicts.as_triple() == (0, 0, 12)


def test_skip_uncertain_drops_verdicts():
    enricher = Enricher(skip_uncertain=True)
    enrichment = enricher.enrich(email_with(["http://example.com"]), EnrichmentMode.simulated("Q0", "legit"))
    assert enrichment.verdicts is None
