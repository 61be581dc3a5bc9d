from typing import Optional, Sequence
from urllib.parse import urlsplit

from phishlens.errors import UnparseableUrl


def extract_primary_host(urls: Sequence[str]) -> Optional[str]:
    """
    'scheme://hostname' of the first URL, lowercased, with port, path, query
    and fragment dropped. Only the first URL is ever consulted.

    Raises:
        UnparseableUrl: the first entry has no recognizable scheme + authority.
    """
    if not urls:
        return None
    first = urls[0].strip()
    try:
        parts = urlsplit(first)
        hostname = parts.hostname
    except ValueError as e:
        raise UnparseableUrl(f"cannot parse URL {first!r}: {e}") from e
    if not parts.scheme or not hostname:
        raise UnparseableUrl(f"URL has no scheme or host: {first!r}")
    if ":" in hostname:
        hostname = f"[{hostname}]"
    return f"{parts.scheme.lower()}://{hostname.lower()}"


def hostname_of(host_url: str) -> str:
    """Bare hostname of a 'scheme://hostname' string, without IPv6 brackets."""
    return urlsplit(host_url).hostname or ""
