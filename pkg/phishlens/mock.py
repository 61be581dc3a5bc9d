import hashlib
import json
from typing import Any, Dict, List, Optional, Sequence

import bittensor as bt

from phishlens.errors import ConfigError, FixtureMissing
from phishlens.prompting.backends import DEFAULT_TEMPERATURE, LlmBackend, Turn, as_messages


def conversation_digest(conversation: Sequence[Turn]) -> str:
    """sha256 of the canonical JSON ``[[role, content], ...]``."""
    canonical = json.dumps(
        [[m.role, m.content] for m in as_messages(conversation)],
        ensure_ascii=False,
        separators=(",", ":"),
    )
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


class MockLlmBackend(LlmBackend):
    """
    Scripted, deterministic stand-in for a chat model.

    Fixtures are looked up in order:
      1. ``digests``: exact conversation digest → response text.
      2. ``rules``: the first rule whose ``match`` substrings all occur in the
         user turns; its ``responses`` list is indexed by the number of
         assistant turns already in the conversation.
      3. ``default``: a responses list indexed the same way.

    Answers depend only on (fixtures, conversation); ``calls`` and
    ``temperatures`` are recorded for inspection.
    """

    name = "mock"
    concurrent_safe = True

    def __init__(self, fixtures: Dict[str, Any]):
        self.digests: Dict[str, str] = dict(fixtures.get("digests", {}))
        self.rules: List[Dict[str, Any]] = list(fixtures.get("rules", []))
        self.default: List[str] = list(fixtures.get("default", []))
        self.calls = 0
        self.temperatures: List[float] = []

    @classmethod
    def from_file(cls, path: str) -> "MockLlmBackend":
        try:
            with open(path, "r", encoding="utf-8") as f:
                fixtures = json.load(f)
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"cannot read mock fixtures {path}: {e}") from e
        bt.logging.debug(f"Loaded mock fixtures from {path}")
        return cls(fixtures)

    def _scripted(self, responses: List[str], turn: int) -> Optional[str]:
        if turn < len(responses):
            return responses[turn]
        return None

    def complete(self, conversation: Sequence[Turn], temperature: float = DEFAULT_TEMPERATURE) -> str:
        self.calls += 1
        self.temperatures.append(temperature)
        messages = as_messages(conversation)

        digest = conversation_digest(messages)
        if digest in self.digests:
            return self.digests[digest]

        turn = sum(1 for m in messages if m.role == "assistant")
        user_text = "\n".join(m.content for m in messages if m.role == "user")
        for rule in self.rules:
            if all(needle in user_text for needle in rule.get("match", [])):
                response = self._scripted(rule.get("responses", []), turn)
                if response is not None:
                    return response
        response = self._scripted(self.default, turn)
        if response is not None:
            return response
        raise FixtureMissing(f"no scripted response for conversation {digest[:12]} (turn {turn})")
