import html as html_module
import json
import random

import pytest

from phishlens.errors import ConfigError, RenderPrecondition
from phishlens.protocol import ClassificationOutcome, WarningMessage
from phishlens.warning import MAX_WORDS, render_payload, render_warning, validate_warning
from phishlens.warning.render import build_payload

EXPLANATIONS = {
    "ip_address_url": (
        "The email contains a link that is just a string of numbers (an IP address). Legitimate companies "
        "usually use a name, not numbers. Clicking on it could lead to a fake site that steals your information."
    ),
    "tld_mispositioned": (
        "The email's URL has a top-level domain like '.com' oddly placed before another domain. This is a trick "
        "to make a malicious link seem trustworthy. If clicked, it could lead to a fake site that steals your "
        "personal details."
    ),
    "link_mismatch": (
        'The email shows a link labeled "protect your account", but it points to a different, suspicious '
        "website. This mismatch can trick you into visiting a harmful website. You might unknowingly give away "
        "your personal information or passwords"
    ),
    "young_domain": (
        "The URL in the email leads to a very new domain. New domains are often used by scammers for fraud. "
        "You could be tricked into giving away personal details or downloading harmful software."
    ),
}


def outcome(label="phishing", probability=0.93):
    return ClassificationOutcome(
        label=label,
        phishing_probability=probability,
        explanation_features=["a", "b", "c"],
    )


@pytest.mark.parametrize("key", sorted(EXPLANATIONS))
def test_reference_explanations_validate(key):
    report = validate_warning(EXPLANATIONS[key])
    assert report.ok, report.violations
    assert report.sentence_count == 3
    assert report.word_count <= MAX_WORDS


def test_young_domain_counts():
    report = validate_warning(EXPLANATIONS["young_domain"])
    assert (report.word_count, report.sentence_count) == (33, 3)


def test_empty_message():
    report = validate_warning("")
    assert not report.ok
    assert [v.code for v in report.violations] == ["empty"]


def test_sixty_words_rejected():
    words = [f"word{i}" for i in range(60)]
    text = " ".join(words[:20]) + ". " + " ".join(words[20:40]) + ". " + " ".join(words[40:]) + "."
    report = validate_warning(text)

    assert report.word_count == len(text.split()) == 60
    assert [v.code for v in report.violations] == ["word_count"]


@pytest.mark.parametrize("text, count", [("Just one sentence.", 1), ("A. B. C. D. E.", 5)])
def test_sentence_count_bounds(text, count):
    report = validate_warning(text)
    assert report.sentence_count == count
    assert [v.code for v in report.violations] == ["sentence_count"]


def test_validation_never_raises_on_odd_input():
    assert validate_warning(None).violations[0].code == "empty"
    assert validate_warning("\n\t ").violations[0].code == "empty"


def test_message_parts():
    message = WarningMessage.from_text(EXPLANATIONS["young_domain"])
    assert message.parts.feature == "The URL in the email leads to a very new domain."
    assert message.parts.consequence.startswith("You could be tricked")
    assert WarningMessage.from_text("Only one sentence here.").parts is None


def test_json_payload_mirrors_outcome():
    message = WarningMessage.from_text(EXPLANATIONS["young_domain"])
    payload = json.loads(render_warning(outcome(), message, "json"))

    assert payload["probability"] == 0.93
    assert payload["severity"] == "danger"
    assert payload["actions"] == ["Back to safety", "Proceed anyway"]
    assert payload["message"] == {
        "text": EXPLANATIONS["young_domain"],
        "word_count": 33,
        "primed_feature": None,
    }


def test_legit_outcome_needs_priming():
    message = WarningMessage.from_text(EXPLANATIONS["young_domain"])
    with pytest.raises(RenderPrecondition):
        render_warning(outcome("legit", 0.1), message)

    primed = WarningMessage.from_text(EXPLANATIONS["tld_mispositioned"], "tld_mispositioned")
    payload = json.loads(render_warning(outcome("legit", 0.1), primed))
    assert payload["message"]["primed_feature"] == "tld_mispositioned"


@pytest.mark.parametrize("key", ["young_domain", "ip_address_url"])
def test_message_text_is_embedded_unchanged(key):
    message = WarningMessage.from_text(EXPLANATIONS[key])
    text = render_warning(outcome(), message, "text").decode("utf-8")
    html = render_warning(outcome(), message, "html").decode("utf-8")

    assert EXPLANATIONS[key] in text
    assert EXPLANATIONS[key] in html
    assert html.index("Back to safety") < html.index("Proceed anyway")
    assert "93%" in text


def test_html_escapes_markup():
    message = WarningMessage.from_text("Link <b>here</b> is odd. It is fake. You lose data.")
    html = render_warning(outcome(), message, "html").decode("utf-8")
    assert "&lt;b&gt;here&lt;/b&gt;" in html


def test_unknown_format():
    payload = build_payload(outcome(), WarningMessage.from_text("A. B. C."))
    with pytest.raises(ConfigError):
        render_payload(payload, "pdf")


def test_escaped_html_decodes_to_the_message_text():
    text = 'Terms & Conditions say "verify now". Q&A pages never ask that. Your <account> could be taken.'
    message = WarningMessage.from_text(text)
    page = render_warning(outcome(), message, "html").decode("utf-8")
    start = page.index('<div class="phishlens-warning__message">')
    paragraph = page[page.index("<p>", start) + 3 : page.index("</p>", start)]

    assert "Terms &amp; Conditions" in paragraph
    assert "<account>" not in paragraph
    assert html_module.unescape(paragraph) == text
    assert text in render_warning(outcome(), message, "text").decode("utf-8")
    assert json.loads(render_warning(outcome(), message, "json"))["message"]["text"] == text


def test_word_count_matches_whitespace_split():
    rng = random.Random(11)
    vocabulary = ["link", "fake.", "URL", "a", "(IP)", "don't", "e-mail", "50%", "Click!"]
    blanks = [" ", "  ", "\t", "\n", " \n "]
    for _ in range(200):
        tokens = [rng.choice(vocabulary) for _ in range(rng.randint(0, 70))]
        text = rng.choice(["", " ", "\n"]) + "".join(t + rng.choice(blanks) for t in tokens)
        report = validate_warning(text)
        assert report.word_count == len(tokens) == len(text.split())
        assert ("word_count" in [v.code for v in report.violations]) == (len(tokens) > MAX_WORDS)
