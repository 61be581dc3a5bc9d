"""
Hosting-country lookup: hostname → IP addresses → ISO 3166-1 alpha-3 code.

A ``Resolver`` turns a hostname into addresses, a ``CountryService`` turns an
address into a country. Both have a live implementation (DNS, BigDataCloud)
and a static one backed by a JSON stub map for offline runs.
"""

import ipaddress
import json
from typing import Callable, Dict, List, Optional, Protocol

import bittensor as bt
import dns.exception
import dns.resolver
import requests

from phishlens.data import data_path
from phishlens.enrichment.hosts import hostname_of
from phishlens.errors import AuthError, ConfigError, RateLimited, TransportError
from phishlens.protocol import COUNTRY_PATTERN
from phishlens.utils.ratelimit import SlidingWindowLimiter

GEO_API_URL = "https://api.bigdatacloud.net/data/country-by-ip"
GEO_STUB_FILE = "geo_stub.json"

Resolver = Callable[[str], List[str]]


class CountryService(Protocol):
    def country_of(self, ip: str) -> Optional[str]: ...


def _ip_literal(host: str) -> Optional[str]:
    try:
        return str(ipaddress.ip_address(host))
    except ValueError:
        return None


def dns_resolver(host: str) -> List[str]:
    """A then AAAA records of ``host``; an empty list on any resolution failure."""
    literal = _ip_literal(host)
    if literal:
        return [literal]
    addresses: List[str] = []
    for rdtype in ("A", "AAAA"):
        try:
            answer = dns.resolver.resolve(host, rdtype, lifetime=5.0)
        except dns.exception.DNSException as e:
            bt.logging.trace(f"DNS {rdtype} {host}: {e}")
            continue
        addresses.extend(r.to_text() for r in answer)
        if addresses:
            break
    return addresses


class BigDataCloudService:
    def __init__(
        self,
        api_key: Optional[str] = None,
        limiter: Optional[SlidingWindowLimiter] = None,
        blocking: bool = True,
        base_url: str = GEO_API_URL,
        timeout: float = 10.0,
        session: Optional[requests.Session] = None,
    ):
        self.api_key = api_key
        self.limiter = limiter
        self.blocking = blocking
        self.base_url = base_url
        self.timeout = timeout
        self.session = session or requests.Session()

    def country_of(self, ip: str) -> Optional[str]:
        if self.limiter is not None:
            if self.blocking:
                self.limiter.acquire()
            else:
                self.limiter.acquire_or_raise()
        params = {"ip": ip}
        if self.api_key:
            params["key"] = self.api_key
        try:
            response = self.session.get(self.base_url, params=params, timeout=self.timeout)
        except requests.RequestException as e:
            raise TransportError(f"geolocation lookup failed for {ip}: {e}") from e
        if response.status_code in (401, 403):
            raise AuthError("geolocation service rejected the API key")
        if response.status_code == 429:
            raise RateLimited("geolocation service quota exceeded")
        if response.status_code >= 400:
            raise TransportError(f"geolocation service returned HTTP {response.status_code}")
        try:
            code = response.json().get("country", {}).get("isoAlpha3")
        except (ValueError, AttributeError) as e:
            raise TransportError(f"unexpected geolocation payload for {ip}: {e}") from e
        if not code or not COUNTRY_PATTERN.match(code):
            return None
        return code


class StaticGeoMap:
    """
    Offline resolver and country service backed by a stub map:

        {"resolve": {"example.com": ["203.0.113.5"]}, "countries": {"203.0.113.5": "USA"}}
    """

    def __init__(self, resolve: Dict[str, List[str]], countries: Dict[str, str]):
        self.resolve_map = {k.lower(): list(v) for k, v in resolve.items()}
        self.countries = dict(countries)

    @classmethod
    def from_file(cls, path: str) -> "StaticGeoMap":
        try:
            with open(path, "r", encoding="utf-8") as f:
                raw = json.load(f)
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"cannot read geolocation stub map {path}: {e}") from e
        return cls(raw.get("resolve", {}), raw.get("countries", {}))

    @classmethod
    def bundled(cls) -> "StaticGeoMap":
        return cls.from_file(data_path(GEO_STUB_FILE))

    def resolver(self, host: str) -> List[str]:
        literal = _ip_literal(host)
        if literal:
            return [literal]
        return list(self.resolve_map.get(host.lower(), []))

    def country_of(self, ip: str) -> Optional[str]:
        return self.countries.get(ip)


def geolocate_host(host_url: str, resolver: Resolver, service: CountryService) -> Optional[str]:
    """
    Country of the first address ``host_url`` resolves to.

    Returns None when the name does not resolve; service failures raise
    TransportError so that they stay distinguishable from a missing answer.
    """
    addresses = resolver(hostname_of(host_url))
    if not addresses:
        bt.logging.debug(f"{host_url} did not resolve; enrichment proceeds without a country")
        return None
    return service.country_of(addresses[0])
