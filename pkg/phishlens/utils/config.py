# The MIT License (MIT)
# Copyright © 2023 Yuma Rao
# Copyright © 2023 Opentensor Foundation
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

import argparse
import os
from typing import Any, Dict, List, Literal, Mapping, Optional, Sequence

import bittensor as bt
from pydantic import BaseModel, ConfigDict, Field, SecretStr, ValidationError

from phishlens.errors import ConfigError
from phishlens.protocol import CONDITION_NAMES, FEATURE_KEYS, FeatureKey

DEFAULT_MODEL = "gpt-4o-2024-05-13"
DEFAULT_BASE_URL = "https://api.openai.com/v1"
DEFAULT_TEMPERATURE = 0.0001
DEFAULT_LLM_RATE_LIMIT = 60
DEFAULT_BIND = "127.0.0.1:8080"

# Environment variable → dotted config key. Flags win over these, these win
# over the config file and the defaults.
ENV_OVERRIDES: Dict[str, tuple] = {
    "APOLLO_LLM_MODEL": ("llm.model", str),
    "APOLLO_LLM_TEMPERATURE": ("llm.temperature", float),
    "APOLLO_LLM_BASE_URL": ("llm.base_url", str),
    "APOLLO_LLM_RATE_LIMIT_PER_MIN": ("llm.rate_limit_per_min", int),
    "APOLLO_RATE_LIMIT_PER_MIN": ("enrichment.rate_limit_per_min", int),
}
# Secrets are read from the environment only.
ENV_SECRETS = {
    "APOLLO_LLM_API_KEY": "llm.api_key",
    "APOLLO_VT_API_KEY": "enrichment.vt_api_key",
    "APOLLO_GEO_API_KEY": "enrichment.geo_api_key",
}
SECRET_KEYS = frozenset(ENV_SECRETS.values())


class Section(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")


class LlmSettings(Section):
    backend: Literal["mock", "live"] = "mock"
    model: str = DEFAULT_MODEL
    temperature: float = Field(DEFAULT_TEMPERATURE, ge=0.0)
    base_url: str = DEFAULT_BASE_URL
    rate_limit_per_min: int = Field(DEFAULT_LLM_RATE_LIMIT, ge=1)
    api_key: Optional[SecretStr] = None
    fixtures: Optional[str] = Field(None, description="Mock backend fixture file")


class EnrichmentSettings(Section):
    off: bool = False
    geo: Literal["live", "stub", "off"] = "live"
    geo_stub: Optional[str] = Field(None, description="Stub map for geo=stub; the bundled map when unset")
    vt_api_key: Optional[SecretStr] = None
    geo_api_key: Optional[SecretStr] = None
    rate_limit_per_min: int = Field(4, ge=1)
    cache_ttl: float = 86400.0
    cache_path: Optional[str] = None
    skip_uncertain: bool = False
    conditions_file: Optional[str] = None


class PromptingSettings(Section):
    header_budget: int = Field(4000, ge=0)
    feature: Optional[FeatureKey] = None
    feature_description: Optional[str] = None


class EvaluationConfig(Section):
    conditions: List[str] = Field(default_factory=lambda: list(CONDITION_NAMES))
    reps: int = Field(1, ge=1)
    out_dir: str = "phishlens-run"
    eps: float = Field(1e-15, gt=0.0, lt=0.5)
    yates: bool = True
    fan_out: int = Field(1, ge=1)
    dont_save_events: bool = False


class ServerSettings(Section):
    bind: str = DEFAULT_BIND
    fan_out: int = Field(1, ge=1)

    @property
    def host(self) -> str:
        return self.bind.rsplit(":", 1)[0]

    @property
    def port(self) -> int:
        return int(self.bind.rsplit(":", 1)[1])


class AppConfig(Section):
    """Validated view of the command-line, environment and config-file settings."""

    llm: LlmSettings = LlmSettings()
    enrichment: EnrichmentSettings = EnrichmentSettings()
    prompting: PromptingSettings = PromptingSettings()
    evaluation: EvaluationConfig = EvaluationConfig()
    server: ServerSettings = ServerSettings()

    @classmethod
    def from_config(cls, config: "bt.Config", environ: Optional[Mapping[str, str]] = None) -> "AppConfig":
        environ = os.environ if environ is None else environ
        values: Dict[str, Dict[str, Any]] = {name: {} for name in cls.model_fields}
        for section, model in cls.model_fields.items():
            for field in model.annotation.model_fields:
                if f"{section}.{field}" in SECRET_KEYS:
                    continue
                value = _lookup(config, f"{section}.{field}")
                if value is not None:
                    values[section][field] = value

        for env, (key, cast) in ENV_OVERRIDES.items():
            if env in environ and not _flag_set(config, key):
                section, field = key.split(".")
                try:
                    values[section][field] = cast(environ[env])
                except ValueError as e:
                    raise ConfigError(f"{env}: {e}") from e
        for env, key in ENV_SECRETS.items():
            if environ.get(env):
                section, field = key.split(".")
                values[section][field] = environ[env]

        if _lookup(config, "evaluation.no_yates"):
            values["evaluation"]["yates"] = False
        conditions = values["evaluation"].get("conditions")
        if isinstance(conditions, str):
            values["evaluation"]["conditions"] = parse_conditions(conditions)
        bind = values["server"].get("bind")
        if bind is not None:
            parse_bind(bind)

        try:
            return cls(**{section: fields for section, fields in values.items()})
        except ValidationError as e:
            raise ConfigError(f"invalid configuration: {e}") from e

    def masked(self) -> Dict[str, Any]:
        """Dump with secrets shown as '**********'."""
        return self.model_dump(mode="json")


def _lookup(config: Any, dotted: str) -> Any:
    node = config
    for part in dotted.split("."):
        if node is None:
            return None
        node = node.get(part) if isinstance(node, dict) else getattr(node, part, None)
    return node


def _flag_set(config: Any, key: str) -> bool:
    is_set = getattr(config, "is_set", None)
    if not callable(is_set):
        return False
    try:
        return bool(is_set(key))
    except Exception:
        return False


def parse_conditions(text: str) -> List[str]:
    names = [n.strip() for n in text.split(",") if n.strip()]
    unknown = [n for n in names if n not in CONDITION_NAMES]
    if unknown or not names:
        raise ConfigError(
            f"unknown condition(s) {', '.join(unknown) or '(none given)'}; valid: {', '.join(CONDITION_NAMES)}"
        )
    if len(set(names)) != len(names):
        raise ConfigError(f"conditions listed more than once: {text}")
    return names


def parse_bind(bind: str) -> None:
    host, sep, port = bind.rpartition(":")
    if not sep or not host or not port.isdigit() or not 0 < int(port) < 65536:
        raise ConfigError(f"bind address must be host:port, got {bind!r}")


def check_config(cls, config: "bt.Config", environ: Optional[Mapping[str, str]] = None) -> AppConfig:
    r"""Checks/validates the config namespace object and returns its typed view."""
    bt.logging.check_config(config)
    app = AppConfig.from_config(config, environ)
    if app.llm.backend == "mock" and not app.llm.fixtures:
        raise ConfigError("--llm mock requires --fixtures <path>")
    if app.llm.backend == "live" and app.llm.api_key is None:
        raise ConfigError("--llm live requires APOLLO_LLM_API_KEY")
    return app


def add_args(cls, parser):
    """
    Adds the arguments shared by every command.
    """
    parser.add_argument(
        "--llm",
        dest="llm.backend",
        type=str,
        choices=["mock", "live"],
        help="Chat backend: the scripted mock or a live chat-completions API.",
        default="mock",
    )

    parser.add_argument(
        "--fixtures",
        dest="llm.fixtures",
        type=str,
        help="JSON fixture file of the mock backend.",
        default=None,
    )

    parser.add_argument(
        "--llm.model",
        type=str,
        help="Model name sent to the live backend.",
        default=DEFAULT_MODEL,
    )

    parser.add_argument(
        "--llm.temperature",
        type=float,
        help="Sampling temperature of both prompts.",
        default=DEFAULT_TEMPERATURE,
    )

    parser.add_argument(
        "--llm.base_url",
        type=str,
        help="Base URL of the chat-completions API.",
        default=DEFAULT_BASE_URL,
    )

    parser.add_argument(
        "--llm.rate_limit_per_min",
        type=int,
        help="Chat completions per minute allowed against the live backend.",
        default=DEFAULT_LLM_RATE_LIMIT,
    )

    parser.add_argument(
        "--enrichment.geo",
        type=str,
        choices=["live", "stub", "off"],
        help="Where hosting countries come from: DNS + geolocation service, a stub map, or nowhere.",
        default="live",
    )

    parser.add_argument(
        "--enrichment.geo_stub",
        type=str,
        help="Stub map {resolve: {host: [ip]}, countries: {ip: ISO3}} used with --enrichment.geo stub.",
        default=None,
    )

    parser.add_argument(
        "--enrichment.rate_limit_per_min",
        type=int,
        help="Outbound requests per minute allowed per external service.",
        default=4,
    )

    parser.add_argument(
        "--enrichment.cache_ttl",
        type=float,
        help="Seconds an enrichment result stays cached.",
        default=86400.0,
    )

    parser.add_argument(
        "--enrichment.cache_path",
        type=str,
        help="Optional JSON file the enrichment cache is spilled to.",
        default=None,
    )

    parser.add_argument(
        "--enrichment.skip_uncertain",
        action="store_true",
        help="Leave reputation data out of the prompt when no scanner took a position.",
        default=False,
    )

    parser.add_argument(
        "--enrichment.conditions_file",
        type=str,
        help="Condition table JSON replacing the bundled one.",
        default=None,
    )

    parser.add_argument(
        "--prompting.header_budget",
        type=int,
        help="Characters of headers included in the classification prompt.",
        default=4000,
    )


def add_classify_args(cls, parser):
    """Add classify specific arguments to the parser."""

    parser.add_argument("eml_path", nargs="?", help="The .eml file to triage.")

    parser.add_argument(
        "--no-enrich",
        dest="enrichment.off",
        action="store_true",
        help="Do not look up the primary URL.",
        default=False,
    )

    parser.add_argument(
        "--feature",
        dest="prompting.feature",
        type=str,
        choices=list(FEATURE_KEYS),
        help="Prime the explanation on one feature; forces an explanation even for a legit verdict.",
        default=None,
    )

    parser.add_argument(
        "--prompting.feature_description",
        type=str,
        help="Custom wording for --feature instead of the catalog one.",
        default=None,
    )

    parser.add_argument(
        "--format",
        dest="output.format",
        type=str,
        choices=["json", "text", "html"],
        help="Rendering of the warning.",
        default="json",
    )


def add_evaluate_args(cls, parser):
    """Add evaluate specific arguments to the parser."""

    # Evaluation resolves countries from the bundled stub map unless told otherwise.
    parser.set_defaults(**{"enrichment.geo": "stub"})

    parser.add_argument("dataset_path", nargs="?", help="Dataset CSV to evaluate.")

    parser.add_argument(
        "--conditions",
        dest="evaluation.conditions",
        type=str,
        help=f"Comma-separated conditions among {','.join(CONDITION_NAMES)}.",
        default=",".join(CONDITION_NAMES),
    )

    parser.add_argument(
        "--reps",
        dest="evaluation.reps",
        type=int,
        help="Repetitions of every condition.",
        default=1,
    )

    parser.add_argument(
        "--out",
        dest="evaluation.out_dir",
        type=str,
        help="Directory the reports are written to.",
        default="phishlens-run",
    )

    parser.add_argument(
        "--evaluation.eps",
        type=float,
        help="Probability clipping of the log-loss.",
        default=1e-15,
    )

    parser.add_argument(
        "--evaluation.no_yates",
        action="store_true",
        help="Disable the continuity correction of the 2x2 chi-square tests.",
        default=False,
    )

    parser.add_argument(
        "--evaluation.fan_out",
        type=int,
        help="Emails evaluated concurrently.",
        default=1,
    )

    parser.add_argument(
        "--evaluation.dont_save_events",
        action="store_true",
        help="If set, we dont save events to a log file.",
        default=False,
    )


def add_serve_args(cls, parser):
    """Add serve specific arguments to the parser."""

    parser.add_argument(
        "--bind",
        dest="server.bind",
        type=str,
        help="host:port to listen on.",
        default=DEFAULT_BIND,
    )

    parser.add_argument(
        "--server.fan_out",
        type=int,
        help="Requests handled concurrently.",
        default=1,
    )


def config(cls, argv: Optional[Sequence[str]] = None):
    """
    Returns the configuration object of a command after adding relevant arguments.
    """
    parser = argparse.ArgumentParser(prog=getattr(cls, "prog", None))
    bt.logging.add_args(parser)
    cls.add_args(parser)
    return bt.config(parser, args=list(argv) if argv is not None else None)
