# The MIT License (MIT)
# Copyright © 2023 Yuma Rao
# Copyright © 2024 phishlens developers

# Permission is hereby granted, free of charge, to any person obtaining a copy of this software and associated
# documentation files (the “Software”), to deal in the Software without restriction, including without limitation
# the rights to use, copy, modify, merge, publish, distribute, sublicense, and/or sell copies of the Software,
# and to permit persons to whom the Software is furnished to do so, subject to the following conditions:

# The above copyright notice and this permission notice shall be included in all copies or substantial portions of
# the Software.

# THE SOFTWARE IS PROVIDED “AS IS”, WITHOUT WARRANTY OF ANY KIND, EXPRESS OR IMPLIED, INCLUDING BUT NOT LIMITED TO
# THE WARRANTIES OF MERCHANTABILITY, FITNESS FOR A PARTICULAR PURPOSE AND NONINFRINGEMENT. IN NO EVENT SHALL
# THE AUTHORS OR COPYRIGHT HOLDERS BE LIABLE FOR ANY CLAIM, DAMAGES OR OTHER LIABILITY, WHETHER IN AN ACTION
# OF CONTRACT, TORT OR OTHERWISE, ARISING FROM, OUT OF OR IN CONNECTION WITH THE SOFTWARE OR THE USE OR OTHER
# DEALINGS IN THE SOFTWARE.

import json
import os
import threading
import time
from typing import Any, Callable, Dict, Generic, Optional, Tuple, TypeVar

import bittensor as bt

T = TypeVar("T")


class TtlCache(Generic[T]):
    """
    Thread-safe key → value map whose entries expire ``ttl`` seconds after insertion.

    Args:
        ttl (float): Lifetime of an entry in seconds. A non-positive value keeps entries forever.
        clock (Callable[[], float]): Time source, ``time.time`` by default. Wall-clock time is used
            so that entries spilled to disk keep their age across processes.
        spill_path (str, optional): JSON file the cache is loaded from at construction and written to
            on every insertion. Values must then be JSON serializable; use ``encode``/``decode`` to map
            richer values to and from plain JSON.

    Example:
        cache = TtlCache(ttl=86400, spill_path="~/.phishlens/vt.json")
        cache.set("https://example.com", {"n_harmless": 87})
        cache.get("https://example.com")
    """

    def __init__(
        self,
        ttl: float = 86400,
        clock: Callable[[], float] = time.time,
        spill_path: Optional[str] = None,
        encode: Callable[[T], Any] = lambda v: v,
        decode: Callable[[Any], T] = lambda v: v,
    ):
        self.ttl = ttl if ttl > 0 else float("inf")
        self._clock = clock
        self._entries: Dict[str, Tuple[float, T]] = {}
        self._lock = threading.Lock()
        self._encode = encode
        self._decode = decode
        self.spill_path = os.path.expanduser(spill_path) if spill_path else None
        if self.spill_path and os.path.exists(self.spill_path):
            self._load()

    def _expired(self, stored_at: float, now: float) -> bool:
        return now - stored_at >= self.ttl

    def get(self, key: str) -> Optional[T]:
        with self._lock:
            entry = self._entries.get(key)
            if entry is None:
                return None
            stored_at, value = entry
            if self._expired(stored_at, self._clock()):
                del self._entries[key]
                return None
            return value

    def set(self, key: str, value: T) -> None:
        with self._lock:
            self._entries[key] = (self._clock(), value)
            if self.spill_path:
                self._spill()

    def __contains__(self, key: str) -> bool:
        return self.get(key) is not None

    def __len__(self) -> int:
        with self._lock:
            now = self._clock()
            return sum(1 for stored_at, _ in self._entries.values() if not self._expired(stored_at, now))

    def _load(self) -> None:
        try:
            with open(self.spill_path, "r", encoding="utf-8") as f:
                raw = json.load(f)
        except (OSError, json.JSONDecodeError) as e:
            bt.logging.warning(f"Ignoring unreadable cache file {self.spill_path}: {e}")
            return
        now = self._clock()
        for key, item in raw.items():
            stored_at = float(item["stored_at"])
            if not self._expired(stored_at, now):
                self._entries[key] = (stored_at, self._decode(item["value"]))
        bt.logging.debug(f"Loaded {len(self._entries)} cache entries from {self.spill_path}")

    def _spill(self) -> None:
        payload = {
            key: {"stored_at": stored_at, "value": self._encode(value)}
            for key, (stored_at, value) in self._entries.items()
        }
        directory = os.path.dirname(self.spill_path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        tmp = f"{self.spill_path}.tmp"
        with open(tmp, "w", encoding="utf-8") as f:
            json.dump(payload, f, sort_keys=True)
        os.replace(tmp, self.spill_path)
