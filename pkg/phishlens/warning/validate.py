from phishlens.protocol import ValidationReport, Violation, split_sentences

MAX_WORDS = 50
MIN_SENTENCES = 2
MAX_SENTENCES = 4


def validate_warning(text: str) -> ValidationReport:
    """
    Advisory structural check of an explanation message; never raises.

    The message should be non-empty, at most 50 whitespace-separated words and
    2 to 4 sentences (feature, hazard, consequence, tolerating one split part).
    """
    text = text or ""
    word_count = len(text.split())
    sentence_count = len(split_sentences(text))
    violations = []
    if not text.strip():
        violations.append(Violation(code="empty", detail="explanation is empty"))
    if word_count > MAX_WORDS:
        violations.append(Violation(code="word_count", detail=f"word_count={word_count} > {MAX_WORDS}"))
    if text.strip() and not MIN_SENTENCES <= sentence_count <= MAX_SENTENCES:
        violations.append(
            Violation(
                code="sentence_count",
                detail=f"sentence_count={sentence_count} outside {MIN_SENTENCES}..{MAX_SENTENCES}",
            )
        )
    return ValidationReport(
        ok=not violations,
        word_count=word_count,
        sentence_count=sentence_count,
        violations=violations,
    )
