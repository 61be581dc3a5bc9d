import base64
import io
import json

import pytest
from starlette.testclient import TestClient

from phishlens.api import create_app
from phishlens.commands import ClassifyCommand
from phishlens.enrichment import Enricher, VirusTotalClient
from phishlens.pipeline import TriagePipeline
from phishlens.utils.config import AppConfig, LlmSettings
from phishlens.utils.ratelimit import SlidingWindowLimiter

from .conftest import DATA_DIR, read_bytes

SCANNED = {"data": {"attributes": {"last_analysis_stats": {"harmless": 1, "undetected": 60, "malicious": 9}}}}


class StubResponse:
    status_code = 200

    def json(self):
        return SCANNED


class StubSession:
    def get(self, url, **kwargs):
        return StubResponse()


@pytest.fixture
def settings(fixtures_path):
    return AppConfig(llm=LlmSettings(fixtures=fixtures_path))


@pytest.fixture
def client(settings, mock_backend):
    pipeline = TriagePipeline(settings, backend=mock_backend, enricher=Enricher())
    return TestClient(create_app(pipeline, fan_out=2))


def eml_request(name, **options):
    return {"eml_base64": base64.b64encode(read_bytes(name)).decode("ascii"), **options}


def test_healthz(client):
    response = client.get("/healthz")
    assert response.status_code == 200
    assert response.text == "ok"


def test_classify_eml(client):
    response = client.post("/classify", json=eml_request("phishing_anchor.eml", enrich=False))
    assert response.status_code == 200
    body = response.json()
    assert body["verdict"]["label"] == "phishing"
    assert body["warning"]["severity"]
    assert body["warning"]["message"]["text"].startswith("The link in this email")


def test_classify_fields(client):
    fields = {
        "headers": {"From": "alerts@secure-bank-alerts.com"},
        "subject": "Action required",
        "body": "<p>Confirm <a href='http://secure-bank-alerts.com/c'>here</a>.</p><p>ref-0101</p>",
    }
    response = client.post("/classify", json={"fields": fields})
    assert response.status_code == 200
    body = response.json()
    assert body["verdict"]["label"] == "phishing"
    assert body["enrichment"]["host_url"] == "http://secure-bank-alerts.com"


@pytest.mark.parametrize(
    "payload",
    [
        {},
        {"eml_base64": "***not base64***"},
        {"fields": {"subject": "no body"}},
        {"fields": {"body": "   "}},
        [],
    ],
)
def test_bad_requests(client, payload):
    response = client.post("/classify", json=payload)
    assert response.status_code == 400
    assert response.json()["error"] == "MalformedMessage"


def test_body_is_not_json(client):
    response = client.post("/classify", content=b"{oops", headers={"content-type": "application/json"})
    assert response.status_code == 400


def test_backend_failure_maps_to_502(client):
    response = client.post("/classify", json=eml_request("multipart.eml", enrich=False))
    assert response.status_code == 502
    assert response.json()["error"] == "NoJsonFound"


def test_exhausted_window_gives_429(settings, mock_backend):
    vt = VirusTotalClient(
        "key",
        limiter=SlidingWindowLimiter(1, clock=lambda: 0.0, name="virustotal"),
        blocking=False,
        session=StubSession(),
    )
    pipeline = TriagePipeline(settings, backend=mock_backend, enricher=Enricher(vt_client=vt))
    client = TestClient(create_app(pipeline))

    def request(host):
        body = f"<p><a href='http://{host}/x'>open</a> ref-0101</p>"
        return client.post("/classify", json={"fields": {"body": body}})

    first = request("one.example.com")
    assert first.status_code == 200
    assert first.json()["enrichment"]["verdicts"]["n_malicious"] == 9

    second = request("two.example.com")
    assert second.status_code == 429
    assert second.json()["error"] == "RateLimited"


def test_http_and_cli_agree(client, fixtures_path):
    stdout = io.StringIO()
    code = ClassifyCommand.main(
        [f"{DATA_DIR}/phishing_anchor.eml", "--fixtures", fixtures_path, "--no-enrich"],
        environ={},
        stdout=stdout,
        stderr=io.StringIO(),
    )
    assert code == 0
    response = client.post("/classify", json=eml_request("phishing_anchor.eml", enrich=False))
    assert response.json() == json.loads(stdout.getvalue())
