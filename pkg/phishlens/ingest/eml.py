import email
from email import policy
from email.errors import MissingHeaderBodySeparatorDefect
from email.header import decode_header, make_header
from email.message import Message
from typing import Dict, Optional

import bittensor as bt

from phishlens.errors import EmptyBody, MalformedMessage
from phishlens.ingest.body import preprocess_body
from phishlens.protocol import PreprocessedEmail

NO_SUBJECT = "NO SUBJECT"


def decode_header_value(value: str) -> str:
    """RFC-2047 encoded-words → plain text; folded lines are unfolded."""
    try:
        decoded = str(make_header(decode_header(value)))
    except (LookupError, UnicodeDecodeError, ValueError):
        decoded = value
    return " ".join(decoded.split())


def _decoded_headers(message: Message) -> Dict[str, str]:
    headers: Dict[str, str] = {}
    for name, value in message.items():
        text = decode_header_value(str(value))
        if name in headers:
            headers[name] = f"{headers[name]} | {text}"
        else:
            headers[name] = text
    return headers


def _part_text(part: Message) -> str:
    payload = part.get_payload(decode=True)
    if payload is None:
        return ""
    charset = part.get_content_charset() or "utf-8"
    try:
        return payload.decode(charset, errors="replace")
    except LookupError:
        return payload.decode("utf-8", errors="replace")


def _select_text_part(message: Message) -> Optional[Message]:
    html, plain = None, None
    for part in message.walk():
        if part.is_multipart():
            continue
        if part.get_content_disposition() == "attachment":
            continue
        ctype = part.get_content_type()
        if ctype == "text/html" and html is None:
            html = part
        elif ctype == "text/plain" and plain is None:
            plain = part
    return html if html is not None else plain


def parse_eml(raw: bytes) -> PreprocessedEmail:
    """
    Parses an RFC-822/MIME message into a PreprocessedEmail.

    The text/html part is preferred over text/plain when both exist, since it
    carries the anchors the meta-tagging step relies on.

    Raises:
        MalformedMessage: the bytes carry no header block or no header/body boundary.
        EmptyBody: no textual part could be found.
    """
    if not raw or not raw.strip():
        raise MalformedMessage("empty input")

    message = email.message_from_bytes(raw, policy=policy.compat32)
    if any(isinstance(d, MissingHeaderBodySeparatorDefect) for d in message.defects):
        raise MalformedMessage("no header/body boundary")
    if not message.keys():
        raise MalformedMessage("no headers found")

    headers = _decoded_headers(message)
    subject = decode_header_value(str(message.get("Subject", ""))) or NO_SUBJECT

    part = _select_text_part(message)
    if part is None:
        raise EmptyBody("no text/plain or text/html part")

    body, urls = preprocess_body(_part_text(part))
    bt.logging.trace(f"Parsed email: subject={subject!r} urls={len(urls)}")
    return PreprocessedEmail(headers=headers, subject=subject, body=body, urls=urls)
