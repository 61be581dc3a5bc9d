import threading
import time
from collections import deque
from typing import Callable, Deque

import bittensor as bt

from phishlens.errors import RateLimited


class SlidingWindowLimiter:
    """
    Allows at most ``rate`` acquisitions in any ``window`` seconds.

    Acquisitions are serialized; ``acquire`` sleeps until the oldest timestamp
    in the window expires, ``try_acquire`` returns False instead. Clock and
    sleep are injectable so tests can drive time by hand.
    """

    def __init__(
        self,
        rate: int,
        window: float = 60.0,
        name: str = "limiter",
        clock: Callable[[], float] = time.monotonic,
        sleep: Callable[[float], None] = time.sleep,
    ):
        if rate < 1:
            raise ValueError("rate must be >= 1")
        self.rate = rate
        self.window = window
        self.name = name
        self._clock = clock
        self._sleep = sleep
        self._stamps: Deque[float] = deque()
        self._lock = threading.Lock()

    def _evict(self, now: float) -> None:
        while self._stamps and now - self._stamps[0] >= self.window:
            self._stamps.popleft()

    def try_acquire(self) -> bool:
        with self._lock:
            now = self._clock()
            self._evict(now)
            if len(self._stamps) < self.rate:
                self._stamps.append(now)
                return True
            return False

    def acquire(self) -> None:
        with self._lock:
            while True:
                now = self._clock()
                self._evict(now)
                if len(self._stamps) < self.rate:
                    self._stamps.append(now)
                    return
                wait = self.window - (now - self._stamps[0])
                bt.logging.debug(f"{self.name}: rate limit reached, waiting {wait:.2f}s")
                self._sleep(wait)

    def acquire_or_raise(self) -> None:
        if not self.try_acquire():
            raise RateLimited(f"{self.name}: more than {self.rate} requests in {self.window:g}s")

    def in_window(self) -> int:
        with self._lock:
            self._evict(self._clock())
            return len(self._stamps)
