import asyncio
import base64
import binascii
from typing import Any, Dict

import bittensor as bt
from pydantic import ValidationError
from starlette.applications import Starlette
from starlette.concurrency import run_in_threadpool
from starlette.requests import Request
from starlette.responses import JSONResponse, PlainTextResponse
from starlette.routing import Route

from phishlens.errors import EXIT_INPUT, MalformedMessage, PhishlensError
from phishlens.pipeline import TriagePipeline


def _error(e: Exception, status: int) -> JSONResponse:
    if isinstance(e, PhishlensError):
        return JSONResponse(e.to_dict(), status_code=e.http_status)
    return JSONResponse(
        {"error": type(e).__name__, "message": str(e), "exit_code": EXIT_INPUT},
        status_code=status,
    )


def _triage(pipeline: TriagePipeline, body: Dict[str, Any]):
    options = {
        "enrich": bool(body.get("enrich", True)),
        "feature": body.get("feature"),
        "feature_description": body.get("feature_description"),
    }
    if body.get("eml_base64"):
        try:
            raw = base64.b64decode(body["eml_base64"], validate=True)
        except (binascii.Error, TypeError, ValueError) as e:
            raise MalformedMessage(f"eml_base64 is not valid base64: {e}") from e
        return pipeline.run_eml(raw, **options)
    if isinstance(body.get("fields"), dict):
        return pipeline.run_fields(body["fields"], **options)
    raise MalformedMessage("request needs 'eml_base64' or 'fields'")


def create_app(pipeline: TriagePipeline, fan_out: int = 1) -> Starlette:
    """
    POST /classify takes ``{"eml_base64": ...}`` or ``{"fields": {headers,
    subject, body}}`` plus optional ``enrich``, ``feature`` and
    ``feature_description``, and answers with the verdict JSON. At most
    ``fan_out`` requests run the pipeline at once.
    """
    semaphore = asyncio.Semaphore(max(1, fan_out))

    async def classify(request: Request):
        try:
            body = await request.json()
        except ValueError as e:
            return _error(MalformedMessage(f"request body is not JSON: {e}"), 400)
        if not isinstance(body, dict):
            return _error(MalformedMessage("request body must be a JSON object"), 400)

        try:
            async with semaphore:
                result = await run_in_threadpool(_triage, pipeline, body)
        except PhishlensError as e:
            bt.logging.warning(f"/classify failed: {type(e).__name__}: {e}")
            return _error(e, e.http_status)
        except ValidationError as e:
            return _error(e, 400)
        return JSONResponse(result.to_dict())

    async def healthz(request: Request):
        return PlainTextResponse("ok")

    return Starlette(
        routes=[
            Route("/classify", classify, methods=["POST"]),
            Route("/healthz", healthz, methods=["GET"]),
        ]
    )
