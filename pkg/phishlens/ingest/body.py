"""
Body preprocessing: tag stripping, anchor meta-tagging, URL collection and
whitespace collapsing.
"""

import html
import re
import warnings
from typing import List, Tuple

from bs4 import BeautifulSoup, Comment, MarkupResemblesLocatorWarning, NavigableString, Tag

from phishlens.protocol import is_url

URL_PATTERN = re.compile(r"[a-zA-Z][a-zA-Z0-9+.\-]*://[^\s<>\"'\[\]]+")
TRAILING_PUNCTUATION = ".,;:!?)"

BLOCK_TAGS = (
    "p", "div", "tr", "li", "ul", "ol", "table", "blockquote", "section",
    "article", "header", "footer", "h1", "h2", "h3", "h4", "h5", "h6",
)
DROPPED_TAGS = ("script", "style", "head", "title")

_INLINE_BLANKS = re.compile(r"[^\S\n]+")
_NEWLINE_RUNS = re.compile(r"\n{2,}")
_RESIDUAL_TAG = re.compile(r"<(?=[a-zA-Z/!?])")
_ENTITY_LIKE = re.compile(r"&[#A-Za-z0-9]+;?")


def _defuse_entity(match: re.Match) -> str:
    raw = match.group(0)
    return raw if html.unescape(raw) == raw else "& " + raw[1:]


def meta_tag(kind: str, text: str) -> str:
    return f"[{kind}]{text}[/{kind}]"


def find_bare_urls(text: str) -> List[str]:
    found = []
    for match in URL_PATTERN.finditer(text):
        url = match.group(0).rstrip(TRAILING_PUNCTUATION)
        if is_url(url):
            found.append(url)
    return found


def collapse_whitespace(text: str) -> str:
    """Single spaces, single newlines, no leading/trailing blanks on any line."""
    text = text.replace("\r\n", "\n").replace("\r", "\n")
    text = _INLINE_BLANKS.sub(" ", text)
    text = "\n".join(line.strip() for line in text.split("\n"))
    text = _NEWLINE_RUNS.sub("\n", text)
    return text.strip()


def _anchor_replacement(anchor: Tag) -> str:
    href = (anchor.get("href") or "").strip()
    visible = anchor.get_text(" ", strip=True)
    scheme = href.split(":", 1)[0].lower() if ":" in href else ""
    if scheme == "mailto":
        return meta_tag("EMAIL", visible)
    if scheme == "tel":
        return meta_tag("PHONE", visible)
    if is_url(href):
        return meta_tag("URL", visible)
    return visible


def _collect_urls(soup: BeautifulSoup) -> List[str]:
    """hrefs and bare URLs, deduplicated, in document order."""
    seen = {}
    for node in soup.descendants:
        if isinstance(node, Tag):
            if node.name == "a":
                href = (node.get("href") or "").strip()
                if is_url(href) and not href.lower().startswith(("mailto:", "tel:")):
                    seen.setdefault(href, None)
        elif isinstance(node, NavigableString) and not isinstance(node, Comment):
            for url in find_bare_urls(str(node)):
                seen.setdefault(url, None)
    return list(seen)


def preprocess_body(markup: str) -> Tuple[str, List[str]]:
    """
    Turns HTML or plain text into the prompt-ready body.

    Anchors become ``[URL]text[/URL]``, ``[EMAIL]text[/EMAIL]`` or
    ``[PHONE]text[/PHONE]``; hrefs and bare URLs are returned in order of first
    appearance. Never raises: markup the parser cannot make sense of degrades
    to plain tag stripping.

    Returns:
        (body, urls)
    """
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", MarkupResemblesLocatorWarning)
        soup = BeautifulSoup(markup or "", "html.parser")

    for tag in soup(DROPPED_TAGS):
        tag.decompose()
    for comment in soup.find_all(string=lambda s: isinstance(s, Comment)):
        comment.extract()

    urls = _collect_urls(soup)

    for anchor in soup.find_all("a"):
        anchor.replace_with(NavigableString(_anchor_replacement(anchor)))
    for br in soup.find_all("br"):
        br.replace_with(NavigableString("\n"))
    for block in soup.find_all(BLOCK_TAGS):
        block.append(NavigableString("\n"))

    text = soup.get_text()
    # Entity-decoded text like "&lt;b&gt;" must not come back as a tag.
    text = _RESIDUAL_TAG.sub("< ", text)
    # Same for "&amp;lt;" decoding to "&lt;"; keeps a second pass a no-op.
    text = _ENTITY_LIKE.sub(_defuse_entity, text)
    return collapse_whitespace(text), urls
