import json
import logging

import pytest

from phishlens.commands import ClassifyCommand, EvaluateCommand, ServeCommand
from phishlens.errors import ConfigError, RateLimited
from phishlens.prompting import backends
from phishlens.utils import config as config_module
from phishlens.utils.config import AppConfig, parse_conditions
from phishlens.utils.logging import EVENTS_LOGGER_NAME, close_events_logger, setup_events_logger
from phishlens.utils.misc import TtlCache
from phishlens.utils.ratelimit import SlidingWindowLimiter


class FakeClock:
    def __init__(self, now=0.0):
        self.now = now
        self.sleeps = []

    def __call__(self):
        return self.now

    def sleep(self, seconds):
        self.sleeps.append(seconds)
        self.now += seconds


def settings(command, argv, environ=None):
    return AppConfig.from_config(command.config(argv), environ or {})


def test_defaults():
    app = settings(ClassifyCommand, [])
    assert app.llm.backend == "mock"
    assert app.llm.temperature == pytest.approx(0.0001)
    assert app.enrichment.rate_limit_per_min == 4
    assert app.prompting.header_budget == 4000
    assert app.enrichment.geo == "live"
    assert app.llm.rate_limit_per_min == 60
    assert settings(EvaluateCommand, []).enrichment.geo == "stub"
    assert settings(EvaluateCommand, ["--enrichment.geo", "off"]).enrichment.geo == "off"


def test_llm_defaults_have_one_source():
    app = settings(ClassifyCommand, [])
    assert (app.llm.model, app.llm.base_url, app.llm.temperature) == (
        backends.DEFAULT_MODEL,
        backends.DEFAULT_BASE_URL,
        backends.DEFAULT_TEMPERATURE,
    )
    assert backends.DEFAULT_MODEL is config_module.DEFAULT_MODEL
    assert backends.DEFAULT_TEMPERATURE is config_module.DEFAULT_TEMPERATURE


def test_flag_beats_environment():
    environ = {"APOLLO_LLM_MODEL": "env-model", "APOLLO_RATE_LIMIT_PER_MIN": "9"}
    app = settings(ClassifyCommand, ["--llm.model", "flag-model"], environ)
    assert app.llm.model == "flag-model"
    assert app.enrichment.rate_limit_per_min == 9


def test_environment_beats_file_beats_default(tmp_path, monkeypatch):
    (tmp_path / "phishlens.yaml").write_text(
        "llm.model: file-model\nllm.base_url: http://localhost:9999/v1\nllm.api_key: from-file\n",
        encoding="utf-8",
    )
    monkeypatch.chdir(tmp_path)
    argv = ["--config", "phishlens.yaml"]

    app = settings(ClassifyCommand, argv, {"APOLLO_LLM_MODEL": "env-model"})
    assert app.llm.model == "env-model"
    assert app.llm.base_url == "http://localhost:9999/v1"
    # Secrets never come from the file.
    assert app.llm.api_key is None


def test_bad_environment_value():
    with pytest.raises(ConfigError, match="APOLLO_LLM_TEMPERATURE"):
        settings(ClassifyCommand, [], {"APOLLO_LLM_TEMPERATURE": "warm"})


def test_secrets_are_masked():
    environ = {"APOLLO_LLM_API_KEY": "sk-secret", "APOLLO_VT_API_KEY": "vt-secret"}
    app = ClassifyCommand.check_config(ClassifyCommand.config(["--llm", "live"]), environ)
    assert app.llm.api_key.get_secret_value() == "sk-secret"
    dumped = json.dumps(app.masked())
    assert "sk-secret" not in dumped
    assert "vt-secret" not in dumped
    assert "**********" in dumped


def test_evaluation_flags():
    app = settings(
        EvaluateCommand,
        ["data.csv", "--conditions", "Q0, Q25ERR", "--reps", "3", "--evaluation.no_yates", "--evaluation.eps", "1e-6"],
    )
    assert app.evaluation.conditions == ["Q0", "Q25ERR"]
    assert app.evaluation.reps == 3
    assert app.evaluation.yates is False
    assert app.evaluation.eps == pytest.approx(1e-6)


@pytest.mark.parametrize("argv", [["--reps", "0"], ["--evaluation.eps", "0.5"], ["--conditions", ""]])
def test_invalid_evaluation_flags(argv):
    with pytest.raises(ConfigError):
        settings(EvaluateCommand, argv)


def test_parse_conditions():
    assert parse_conditions("noURL,Q100") == ["noURL", "Q100"]
    with pytest.raises(ConfigError, match="valid: noURL"):
        parse_conditions("Q10")
    with pytest.raises(ConfigError):
        parse_conditions("Q0,Q0")


def test_bind_address():
    app = settings(ServeCommand, ["--bind", "0.0.0.0:9000"])
    assert (app.server.host, app.server.port) == ("0.0.0.0", 9000)
    with pytest.raises(ConfigError):
        settings(ServeCommand, ["--bind", "localhost"])


def test_limiter_admits_rate_per_window():
    clock = FakeClock()
    limiter = SlidingWindowLimiter(4, window=60.0, clock=clock, sleep=clock.sleep)
    assert [limiter.try_acquire() for _ in range(5)] == [True, True, True, True, False]
    clock.now = 59.9
    assert not limiter.try_acquire()
    clock.now = 60.0
    assert limiter.try_acquire()
    assert limiter.in_window() == 1


def test_limiter_blocks_until_the_oldest_slot_expires():
    clock = FakeClock()
    limiter = SlidingWindowLimiter(2, window=60.0, clock=clock, sleep=clock.sleep)
    limiter.acquire()
    clock.now = 10.0
    limiter.acquire()
    clock.now = 15.0
    limiter.acquire()
    assert clock.sleeps == [pytest.approx(45.0)]
    assert clock.now == pytest.approx(60.0)


def test_limiter_non_blocking_raises():
    limiter = SlidingWindowLimiter(1, clock=FakeClock())
    limiter.acquire_or_raise()
    with pytest.raises(RateLimited):
        limiter.acquire_or_raise()
    with pytest.raises(ValueError):
        SlidingWindowLimiter(0)


def test_ttl_cache_expiry_and_spill(tmp_path):
    clock = FakeClock(1000.0)
    path = str(tmp_path / "cache" / "entries.json")
    cache = TtlCache(ttl=10, clock=clock, spill_path=path)
    cache.set("a", {"n": 1})
    assert cache.get("a") == {"n": 1}
    assert "a" in cache

    reloaded = TtlCache(ttl=10, clock=clock, spill_path=path)
    assert reloaded.get("a") == {"n": 1}

    clock.now += 10
    assert cache.get("a") is None
    assert len(cache) == 0
    assert len(TtlCache(ttl=10, clock=clock, spill_path=path)) == 0


def test_ttl_cache_ignores_unreadable_file(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json", encoding="utf-8")
    assert len(TtlCache(spill_path=str(path))) == 0


def test_events_logger(tmp_path):
    logger = setup_events_logger(str(tmp_path))
    try:
        assert setup_events_logger(str(tmp_path)) is logger
        assert len(logger.handlers) == 1
        logger.event("failed condition=Q0 repetition=0 email_id=3 error=NoJsonFound")
    finally:
        close_events_logger(logger)
    text = (tmp_path / "events.log").read_text(encoding="utf-8")
    assert "| EVENT |" in text
    assert "email_id=3" in text
    assert logging.getLogger(EVENTS_LOGGER_NAME).handlers == []
