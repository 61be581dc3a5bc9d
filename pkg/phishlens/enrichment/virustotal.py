import base64
from typing import Optional

import bittensor as bt
import requests

from phishlens.errors import AuthError, NotFound, RateLimited, TransportError
from phishlens.protocol import VtVerdicts
from phishlens.utils.ratelimit import SlidingWindowLimiter

VT_API_URL = "https://www.virustotal.com/api/v3"


def vt_url_id(host_url: str) -> str:
    """URL-safe base64 of the URL with '=' padding removed (v3 URL identifier)."""
    return base64.urlsafe_b64encode(host_url.encode("utf-8")).decode("ascii").rstrip("=")


class VirusTotalClient:
    """
    Reads the last analysis stats of a URL from the reputation service.

    Unknown stats categories (suspicious, timeout, ...) are dropped. When a
    limiter is attached, ``blocking`` selects between waiting for a slot and
    raising RateLimited straight away.
    """

    def __init__(
        self,
        api_key: str,
        limiter: Optional[SlidingWindowLimiter] = None,
        blocking: bool = True,
        base_url: str = VT_API_URL,
        timeout: float = 15.0,
        session: Optional[requests.Session] = None,
    ):
        self.api_key = api_key
        self.limiter = limiter
        self.blocking = blocking
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout
        self.session = session or requests.Session()

    def _throttle(self) -> None:
        if self.limiter is None:
            return
        if self.blocking:
            self.limiter.acquire()
        else:
            self.limiter.acquire_or_raise()

    def lookup(self, host_url: str) -> VtVerdicts:
        self._throttle()
        url = f"{self.base_url}/urls/{vt_url_id(host_url)}"
        try:
            response = self.session.get(url, headers={"x-apikey": self.api_key}, timeout=self.timeout)
        except requests.RequestException as e:
            raise TransportError(f"reputation lookup failed for {host_url}: {e}") from e

        status = response.status_code
        if status in (401, 403):
            raise AuthError("reputation service rejected the API key")
        if status == 404:
            raise NotFound(f"{host_url} has never been scanned")
        if status == 429:
            raise RateLimited("reputation service quota exceeded")
        if status >= 400:
            raise TransportError(f"reputation service returned HTTP {status}")

        try:
            stats = response.json()["data"]["attributes"]["last_analysis_stats"]
            verdicts = VtVerdicts(
                n_harmless=int(stats.get("harmless", 0)),
                n_undetected=int(stats.get("undetected", 0)),
                n_malicious=int(stats.get("malicious", 0)),
            )
        except (ValueError, KeyError, TypeError) as e:
            raise TransportError(f"unexpected reputation payload for {host_url}: {e}") from e
        bt.logging.debug(f"VT {host_url}: {verdicts.as_triple()}")
        return verdicts


def vt_lookup(host_url: str, client: VirusTotalClient) -> VtVerdicts:
    return client.lookup(host_url)
