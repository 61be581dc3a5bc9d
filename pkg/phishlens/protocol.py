import re
import typing
from urllib.parse import urlsplit

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from typing import Dict, List, Literal, Optional

# ----------------------------------------------------------------------
# PROTOCOL: value types exchanged between ingest → enrichment → prompting
#           → warning, and recorded by the evaluation harness.
# ----------------------------------------------------------------------

Label = Literal["phishing", "legit"]
LABELS: typing.Tuple[str, ...] = ("phishing", "legit")

ConditionName = Literal[
    "noURL", "Q0", "Q25", "Q50", "Q75", "Q100",
    "Q25ERR", "Q50ERR", "Q75ERR", "Q100ERR",
]
CONDITION_NAMES: typing.Tuple[str, ...] = typing.get_args(ConditionName)

FeatureKey = Literal["ip_address_url", "tld_mispositioned", "link_mismatch", "young_domain"]
FEATURE_KEYS: typing.Tuple[str, ...] = typing.get_args(FeatureKey)

TAG_PATTERN = re.compile(r"<[a-zA-Z/!]")
SENTENCE_BREAK = re.compile(r"(?<=[.!?])\s+")
COUNTRY_PATTERN = re.compile(r"^[A-Z]{3}$")

# Observed ranges of the reputation counts on real phishing/genuine URLs.
HARMLESS_RANGE = (0, 87)
UNDETECTED_RANGE = (0, 28)
MALICIOUS_RANGE = (0, 25)


def is_url(value: str) -> bool:
    """True when ``value`` has both a scheme and an authority."""
    try:
        parts = urlsplit(value)
    except ValueError:
        return False
    return bool(parts.scheme) and bool(parts.netloc)


def split_sentences(text: str) -> List[str]:
    """Splits after '.', '!' or '?' when followed by whitespace; abbreviations are not special-cased."""
    return [s.strip() for s in SENTENCE_BREAK.split(text.strip()) if s.strip()]


class Frozen(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")


# ----------------------------------------------------------------------
# email_ingest
# ----------------------------------------------------------------------


class PreprocessedEmail(Frozen):
    """
    An email reduced to what the prompter needs: decoded headers, a subject,
    an HTML-free body with anchors replaced by meta-tags, and its URLs.
    """

    headers: Dict[str, str] = Field(
        default_factory=dict,
        description="Header name → decoded value, in source order",
    )
    subject: str = Field(
        ...,
        min_length=1,
        description="Decoded subject, 'NO SUBJECT' when the source had none",
    )
    body: str = Field(
        ...,
        description="Tag-free, meta-tagged, whitespace-collapsed body",
    )
    urls: List[str] = Field(
        default_factory=list,
        description="URLs in order of first appearance in the original body",
    )

    @field_validator("body")
    @classmethod
    def _no_tags(cls, value: str) -> str:
        if TAG_PATTERN.search(value):
            raise ValueError("body still contains HTML tags")
        return value

    @field_validator("urls")
    @classmethod
    def _urls_are_urls(cls, value: List[str]) -> List[str]:
        for url in value:
            if not is_url(url):
                raise ValueError(f"not a URL: {url!r}")
        return value


class DatasetEmail(Frozen):
    """One row of an evaluation dataset: <body, sender, receiver, date, subject, URLs, label>."""

    id: int = Field(..., ge=0)
    body: str
    sender: str
    receiver: str
    date: str
    subject: str
    urls: List[str] = Field(default_factory=list)
    label: Label


# ----------------------------------------------------------------------
# enrichment
# ----------------------------------------------------------------------


class VtVerdicts(Frozen):
    n_harmless: int = Field(..., ge=0, description="Scanners reporting harmless")
    n_undetected: int = Field(..., ge=0, description="Scanners reporting undetected")
    n_malicious: int = Field(..., ge=0, description="Scanners reporting malicious")

    def within_simulator_ranges(self) -> bool:
        return (
            HARMLESS_RANGE[0] <= self.n_harmless <= HARMLESS_RANGE[1]
            and UNDETECTED_RANGE[0] <= self.n_undetected <= UNDETECTED_RANGE[1]
            and MALICIOUS_RANGE[0] <= self.n_malicious <= MALICIOUS_RANGE[1]
        )

    def is_uncertain(self) -> bool:
        """No scanner took a position either way."""
        return self.n_harmless == 0 and self.n_malicious == 0

    def as_triple(self) -> typing.Tuple[int, int, int]:
        return (self.n_harmless, self.n_undetected, self.n_malicious)


class UrlEnrichment(Frozen):
    host_url: str = Field(..., description="'protocol://hostname' of the primary URL")
    country: Optional[str] = Field(
        default=None, description="ISO 3166-1 alpha-3 code of the hosting server"
    )
    verdicts: Optional[VtVerdicts] = None
    source: Literal["live", "simulated", "cache"]

    @field_validator("host_url")
    @classmethod
    def _bare_host(cls, value: str) -> str:
        parts = urlsplit(value)
        if not parts.scheme or not parts.netloc:
            raise ValueError(f"host_url needs scheme and host: {value!r}")
        if parts.path or parts.query or parts.fragment:
            raise ValueError(f"host_url must not carry path/query/fragment: {value!r}")
        return value

    @field_validator("country")
    @classmethod
    def _alpha3(cls, value: Optional[str]) -> Optional[str]:
        if value is not None and not COUNTRY_PATTERN.match(value):
            raise ValueError(f"country must be ISO 3166-1 alpha-3, got {value!r}")
        return value


class SimulationCondition(Frozen):
    name: ConditionName
    table: Dict[Label, VtVerdicts] = Field(
        default_factory=dict,
        description="Per ground-truth class verdicts; empty for noURL",
    )

    @model_validator(mode="after")
    def _check_table(self) -> "SimulationCondition":
        if self.name == "noURL":
            if self.table:
                raise ValueError("noURL carries no verdicts")
            return self
        missing = set(LABELS) - set(self.table)
        if missing:
            raise ValueError(f"{self.name}: missing rows for {sorted(missing)}")
        for label, verdicts in self.table.items():
            if not verdicts.within_simulator_ranges():
                raise ValueError(f"{self.name}/{label}: {verdicts.as_triple()} outside observed ranges")
        return self


# ----------------------------------------------------------------------
# prompting
# ----------------------------------------------------------------------


class ChatMessage(Frozen):
    role: Literal["system", "user", "assistant"]
    content: str


class PromptText(Frozen):
    system: str = Field(default="", description="Role/goal preamble, sent as the system turn")
    user: str = Field(..., min_length=1, description="Email payload or follow-up instruction")

    def render(self) -> str:
        if not self.system:
            return self.user
        return f"{self.system}\n\n{self.user}"

    def messages(self) -> List[ChatMessage]:
        turns = []
        if self.system:
            turns.append(ChatMessage(role="system", content=self.system))
        turns.append(ChatMessage(role="user", content=self.user))
        return turns


class PersuasionPrinciple(Frozen):
    name: str = Field(..., min_length=1, description="authority, scarcity, ...")
    evidence: str = Field(..., min_length=1, description="The quoted email fragment")
    rationale: str = Field(..., min_length=1)


class ClassificationOutcome(Frozen):
    label: Label
    phishing_probability: float = Field(..., ge=0.0, le=1.0)
    persuasion_principles: List[PersuasionPrinciple] = Field(default_factory=list)
    explanation_features: List[str] = Field(..., min_length=3, max_length=5)


class PrimedFeature(Frozen):
    key: FeatureKey
    description: str = Field(
        ..., min_length=1, description="Completes 'the previous email is suspicious because ...'"
    )

    @field_validator("description")
    @classmethod
    def _not_blank(cls, value: str) -> str:
        if not value.strip():
            raise ValueError("priming description must not be blank")
        return value


# ----------------------------------------------------------------------
# warning
# ----------------------------------------------------------------------


class Violation(Frozen):
    code: Literal["empty", "word_count", "sentence_count"]
    detail: str


class ValidationReport(Frozen):
    ok: bool
    word_count: int = Field(..., ge=0)
    sentence_count: int = Field(..., ge=0)
    violations: List[Violation] = Field(default_factory=list)


class WarningParts(Frozen):
    feature: str
    hazard: str
    consequence: str


class WarningMessage(Frozen):
    text: str
    word_count: int = Field(..., ge=0)
    parts: Optional[WarningParts] = None
    primed_feature: Optional[FeatureKey] = None

    @model_validator(mode="after")
    def _count_matches(self) -> "WarningMessage":
        if self.word_count != len(self.text.split()):
            raise ValueError("word_count must equal the whitespace-token count of text")
        return self

    @classmethod
    def from_text(cls, text: str, primed_feature: Optional[str] = None) -> "WarningMessage":
        """
        Builds the message and, when the text reads as feature / hazard /
        consequence (three sentences, or four with a split hazard), its parts.
        """
        sentences = split_sentences(text)
        parts = None
        if len(sentences) in (3, 4):
            parts = WarningParts(
                feature=sentences[0],
                hazard=" ".join(sentences[1:-1]),
                consequence=sentences[-1],
            )
        return cls(text=text, word_count=len(text.split()), parts=parts, primed_feature=primed_feature)


DEFAULT_ACTIONS = ("Back to safety", "Proceed anyway")


class WarningPayload(Frozen):
    severity: Literal["danger"] = "danger"
    title: str
    message: WarningMessage
    actions: List[str] = Field(default_factory=lambda: list(DEFAULT_ACTIONS), min_length=1)
    probability: float = Field(..., ge=0.0, le=1.0)

    def to_wire(self) -> Dict[str, typing.Any]:
        return {
            "severity": self.severity,
            "title": self.title,
            "message": {
                "text": self.message.text,
                "word_count": self.message.word_count,
                "primed_feature": self.message.primed_feature,
            },
            "actions": list(self.actions),
            "probability": self.probability,
        }


# ----------------------------------------------------------------------
# evaluation
# ----------------------------------------------------------------------


class PredictionRecord(Frozen):
    email_id: int
    condition: ConditionName
    repetition: int = Field(..., ge=0)
    truth: Label
    predicted: Label
    probability: float = Field(..., ge=0.0, le=1.0)
    correct: bool

    @model_validator(mode="after")
    def _correctness(self) -> "PredictionRecord":
        if self.correct != (self.truth == self.predicted):
            raise ValueError("correct must equal (truth == predicted)")
        return self


class FailedRecord(Frozen):
    email_id: int
    condition: ConditionName
    repetition: int = Field(..., ge=0)
    truth: Label
    error: str
    message: str


class ConfusionMatrix(Frozen):
    tp: int = Field(0, ge=0)
    fp: int = Field(0, ge=0)
    tn: int = Field(0, ge=0)
    fn: int = Field(0, ge=0)

    @property
    def n(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


class MetricsReport(Frozen):
    precision: float = Field(..., ge=0.0, le=1.0)
    recall: float = Field(..., ge=0.0, le=1.0)
    accuracy: float = Field(..., ge=0.0, le=1.0)
    f1: float = Field(..., ge=0.0, le=1.0)
    log_loss: float = Field(..., ge=0.0)
    roc_auc: Optional[float] = Field(default=None, ge=0.0, le=1.0)
    n_correct: int = Field(..., ge=0)
    n_wrong: int = Field(..., ge=0)
    n_unconfident: int = Field(0, ge=0, description="Records whose own log-loss is >= 1")
    undefined: List[str] = Field(
        default_factory=list, description="Metrics reported as 0 because of a zero denominator"
    )


class ChiSquareResult(Frozen):
    statistic: float = Field(..., ge=0.0)
    p_value: float = Field(..., ge=0.0, le=1.0)
    dof: int = 1
    degenerate: bool = False


class PairwiseChiSquare(Frozen):
    a: str
    b: str
    statistic: float = Field(..., ge=0.0)
    p_raw: float = Field(..., ge=0.0, le=1.0)
    p_corrected: float = Field(..., ge=0.0, le=1.0)
    degenerate: bool = False

    @model_validator(mode="after")
    def _corrected_not_smaller(self) -> "PairwiseChiSquare":
        if self.p_corrected < self.p_raw:
            raise ValueError("corrected p-value must not be smaller than the raw p-value")
        return self


class AnovaResult(Frozen):
    f: float
    df1: int
    df2: int
    p_value: float = Field(..., ge=0.0, le=1.0)


class StatsTable(Frozen):
    groups: List[str] = Field(default_factory=list, description="Group order used by the matrices")
    omnibus: Optional[ChiSquareResult] = None
    pairwise: List[PairwiseChiSquare] = Field(default_factory=list)
    anova: Optional[AnovaResult] = None
    tukey: Optional[List[List[float]]] = None


class MetricsRow(Frozen):
    condition: ConditionName
    repetition: int = Field(..., ge=0)
    n_failed: int = Field(0, ge=0, description="Rows excluded from the metrics because the chain failed")
    metrics: MetricsReport

    def to_report(self) -> Dict[str, typing.Any]:
        row = {"condition": self.condition, "repetition": self.repetition, "n_failed": self.n_failed}
        row.update(self.metrics.model_dump())
        return row


class EvaluationRun(Frozen):
    conditions: List[ConditionName]
    repetitions: int = Field(..., ge=1)
    records: List[PredictionRecord] = Field(default_factory=list)
    failures: List[FailedRecord] = Field(default_factory=list)
    metrics: List[MetricsRow] = Field(default_factory=list)
    stats: Dict[str, typing.Any] = Field(default_factory=dict)
