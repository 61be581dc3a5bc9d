import html
import json
from typing import Literal, Optional

from phishlens.errors import ConfigError, RenderPrecondition
from phishlens.protocol import DEFAULT_ACTIONS, ClassificationOutcome, WarningMessage, WarningPayload

Format = Literal["json", "text", "html"]
FORMATS = ("json", "text", "html")

DEFAULT_TITLE = "This email looks like a phishing attempt"

HTML_TEMPLATE = """<div class="phishlens-warning" role="alertdialog" data-severity="{severity}">
  <div class="phishlens-warning__header">
    <h2>{title}</h2>
    <p class="phishlens-warning__probability">Phishing probability: {percent}</p>
  </div>
  <div class="phishlens-warning__message">
    <p>{message}</p>
  </div>
  <div class="phishlens-warning__actions">
{buttons}
  </div>
</div>"""


def build_payload(
    outcome: ClassificationOutcome,
    message: WarningMessage,
    title: str = DEFAULT_TITLE,
) -> WarningPayload:
    if outcome.label != "phishing" and message.primed_feature is None:
        raise RenderPrecondition("no warning for a legit verdict unless the explanation was primed")
    return WarningPayload(
        title=title,
        message=message,
        actions=list(DEFAULT_ACTIONS),
        probability=outcome.phishing_probability,
    )


def _percent(probability: float) -> str:
    return f"{probability * 100:.0f}%"


def render_text(payload: WarningPayload) -> str:
    rule = "=" * 60
    actions = "   ".join(f"[{i + 1}] {a}" for i, a in enumerate(payload.actions))
    return "\n".join(
        [
            rule,
            f"!! {payload.title.upper()} ({_percent(payload.probability)})",
            rule,
            payload.message.text,
            rule,
            actions,
            "",
        ]
    )


def render_html(payload: WarningPayload) -> str:
    buttons = "\n".join(
        f'    <button class="phishlens-warning__action" data-rank="{i}">{html.escape(a, quote=False)}</button>'
        for i, a in enumerate(payload.actions)
    )
    return HTML_TEMPLATE.format(
        severity=payload.severity,
        title=html.escape(payload.title, quote=False),
        percent=_percent(payload.probability),
        message=html.escape(payload.message.text, quote=False),
        buttons=buttons,
    ) + "\n"


def render_payload(payload: WarningPayload, fmt: Format = "json") -> bytes:
    if fmt == "json":
        return json.dumps(payload.to_wire(), indent=2, ensure_ascii=False).encode("utf-8")
    if fmt == "text":
        return render_text(payload).encode("utf-8")
    if fmt == "html":
        return render_html(payload).encode("utf-8")
    raise ConfigError(f"unknown format {fmt!r}; valid: {', '.join(FORMATS)}")


def render_warning(
    outcome: ClassificationOutcome,
    message: WarningMessage,
    fmt: Format = "json",
    title: Optional[str] = None,
) -> bytes:
    """
    Serializes the warning shown to the user.

    Raises:
        RenderPrecondition: the outcome is legit and the message was not primed.
    """
    payload = build_payload(outcome, message, title or DEFAULT_TITLE)
    return render_payload(payload, fmt)
