from abc import ABC, abstractmethod
from typing import List, Optional, Sequence, Tuple, Union

import bittensor as bt
import requests

from phishlens.errors import BackendAuthError, BackendTransportError
from phishlens.protocol import ChatMessage
from phishlens.utils.config import DEFAULT_BASE_URL, DEFAULT_MODEL, DEFAULT_TEMPERATURE
from phishlens.utils.ratelimit import SlidingWindowLimiter

Turn = Union[ChatMessage, Tuple[str, str]]


def as_messages(conversation: Sequence[Turn]) -> List[ChatMessage]:
    return [t if isinstance(t, ChatMessage) else ChatMessage(role=t[0], content=t[1]) for t in conversation]


class LlmBackend(ABC):
    """
    A chat model: an ordered conversation in, the assistant's text out.

    ``concurrent_safe`` tells callers whether ``complete`` may be invoked from
    several threads at once.
    """

    concurrent_safe: bool = True
    name: str = "backend"

    @abstractmethod
    def complete(self, conversation: Sequence[Turn], temperature: float = DEFAULT_TEMPERATURE) -> str: ...


class ChatCompletionsBackend(LlmBackend):
    """OpenAI-style ``/chat/completions`` client."""

    name = "live"

    def __init__(
        self,
        api_key: str,
        model: str = DEFAULT_MODEL,
        base_url: str = DEFAULT_BASE_URL,
        limiter: Optional[SlidingWindowLimiter] = None,
        timeout: float = 60.0,
        session: Optional[requests.Session] = None,
    ):
        self.api_key = api_key
        self.model = model
        self.base_url = base_url.rstrip("/")
        self.limiter = limiter
        self.timeout = timeout
        self.session = session or requests.Session()

    def complete(self, conversation: Sequence[Turn], temperature: float = DEFAULT_TEMPERATURE) -> str:
        if self.limiter is not None:
            self.limiter.acquire()
        payload = {
            "model": self.model,
            "temperature": temperature,
            "messages": [m.model_dump() for m in as_messages(conversation)],
        }
        try:
            response = self.session.post(
                f"{self.base_url}/chat/completions",
                json=payload,
                headers={"Authorization": f"Bearer {self.api_key}"},
                timeout=self.timeout,
            )
        except requests.RequestException as e:
            raise BackendTransportError(f"chat backend unreachable: {e}") from e

        if response.status_code in (401, 403):
            raise BackendAuthError("chat backend rejected the API key")
        if response.status_code >= 400:
            raise BackendTransportError(f"chat backend returned HTTP {response.status_code}")
        try:
            content = response.json()["choices"][0]["message"]["content"]
        except (ValueError, KeyError, IndexError, TypeError) as e:
            raise BackendTransportError(f"unexpected chat backend payload: {e}") from e
        bt.logging.trace(f"{self.model} answered {len(content)} chars")
        return content
