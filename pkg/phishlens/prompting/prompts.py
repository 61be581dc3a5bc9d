from functools import lru_cache
from importlib import resources
from typing import Dict, Mapping, Optional, Union

from phishlens.ingest.dataset import to_preprocessed
from phishlens.protocol import DatasetEmail, PreprocessedEmail, PrimedFeature, PromptText, UrlEnrichment

DEFAULT_HEADER_BUDGET = 4000
TRUNCATED = "[TRUNCATED]"

UNPRIMED_OPENING = "Now take the most relevant feature among the ones in your explanations and"
PRIMED_OPENING = "Consider that the previous email is suspicious because {description}. Now"

# Default wording for the four primed features.
FEATURE_CATALOG: Dict[str, str] = {
    "tld_mispositioned": (
        "the Top-Level Domain of a URL in the email is mispositioned "
        "(e.g., as in the URL \"www.amazon.com.cz\")"
    ),
    "ip_address_url": "a URL in the email is an IP address instead of a normal hostname",
    "link_mismatch": (
        "a link shown in the email does not match its actual destination "
        "(e.g., \"click here\" is shown instead of the URL itself)"
    ),
    "young_domain": (
        "a URL in the email points to a very young domain, "
        "as phishing websites are generally hosted on newly created domains"
    ),
}


@lru_cache(maxsize=None)
def load_template(name: str) -> str:
    text = resources.files("phishlens.prompting").joinpath("templates").joinpath(name).read_text("utf-8")
    return text[:-1] if text.endswith("\n") else text


def primed_feature(key: str, description: Optional[str] = None) -> PrimedFeature:
    """Catalog entry for ``key``, optionally with a custom description."""
    return PrimedFeature(key=key, description=description if description is not None else FEATURE_CATALOG.get(key, ""))


def render_headers(headers: Mapping[str, str], budget: int = DEFAULT_HEADER_BUDGET) -> str:
    text = "\n".join(f"{name}: {value}" for name, value in headers.items())
    if budget >= 0 and len(text) > budget:
        text = text[:budget].rstrip() + TRUNCATED
    return text


def render_url_information(enrichment: Optional[UrlEnrichment]) -> str:
    if enrichment is None or (enrichment.country is None and enrichment.verdicts is None):
        return ""
    lines = ["", "", "URL Information:"]
    if enrichment.country is not None:
        lines.append(f"Server location: {enrichment.country}")
    if enrichment.verdicts is not None:
        v = enrichment.verdicts
        lines.extend(
            [
                "VirusTotal scan: [",
                f"harmless: {v.n_harmless},",
                f"undetected: {v.n_undetected},",
                f"malicious: {v.n_malicious}",
                "]",
            ]
        )
    return "\n".join(lines)


def build_classification_prompt(
    email: Union[PreprocessedEmail, DatasetEmail],
    enrichment: Optional[UrlEnrichment] = None,
    header_budget: int = DEFAULT_HEADER_BUDGET,
) -> PromptText:
    """
    First prompt of the chain: the fixed preamble as the system turn and the
    email, split into its HEADERS, SUBJECT and BODY sections, as the user turn.
    The URL Information block is present only when there is something to put in it.
    """
    if isinstance(email, DatasetEmail):
        email = to_preprocessed(email)
    headers = render_headers(email.headers, header_budget)
    headers_section = f"[HEADERS] {headers} [\\HEADERS]" if headers else "[HEADERS] [\\HEADERS]"
    user = load_template("classification_user.txt").format(
        headers_section=headers_section,
        subject=email.subject,
        body=email.body,
        url_information=render_url_information(enrichment),
    )
    return PromptText(system=load_template("classification_system.txt"), user=user)


def build_explanation_prompt(priming: Optional[PrimedFeature] = None) -> PromptText:
    if priming is None:
        opening = UNPRIMED_OPENING
    else:
        opening = PRIMED_OPENING.format(description=priming.description.strip().rstrip("."))
    return PromptText(user=load_template("explanation.txt").format(opening=opening))
