import json
from pathlib import Path
from typing import Iterable, List, Union

import pandas as pd
from pydantic import ValidationError

from phishlens.errors import SchemaError
from phishlens.ingest.body import preprocess_body
from phishlens.ingest.eml import NO_SUBJECT
from phishlens.protocol import LABELS, DatasetEmail, PreprocessedEmail, is_url

COLUMNS = ["id", "body", "sender", "receiver", "date", "subject", "urls", "label"]


def _decode_urls(cell: str, row: int) -> List[str]:
    if not cell.strip():
        return []
    try:
        urls = json.loads(cell)
    except json.JSONDecodeError as e:
        raise SchemaError(f"urls cell is not a JSON array: {e.msg}", row=row) from e
    if not isinstance(urls, list) or not all(isinstance(u, str) for u in urls):
        raise SchemaError("urls cell must be a JSON array of strings", row=row)
    return urls


def load_dataset(path: Union[str, Path]) -> List[DatasetEmail]:
    """
    Reads the evaluation dataset CSV.

    Ids are reassigned 0..n-1 in file order; the file's own id column is only
    required to be present. Row numbers in errors count data rows from 1.
    """
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False, encoding="utf-8")
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise SchemaError(f"unreadable dataset {path}: {e}") from e

    missing = [c for c in COLUMNS if c not in frame.columns]
    if missing:
        raise SchemaError(f"missing column(s): {', '.join(missing)}")

    emails = []
    for index, row in enumerate(frame.itertuples(index=False)):
        number = index + 1
        record = row._asdict()
        label = record["label"].strip()
        if label not in LABELS:
            raise SchemaError(f"bad label {label!r}", row=number)
        try:
            emails.append(
                DatasetEmail(
                    id=index,
                    body=record["body"],
                    sender=record["sender"],
                    receiver=record["receiver"],
                    date=record["date"],
                    subject=record["subject"],
                    urls=_decode_urls(record["urls"], number),
                    label=label,
                )
            )
        except ValidationError as e:
            raise SchemaError(str(e), row=number) from e
    return emails


def write_dataset(emails: Iterable[DatasetEmail], path: Union[str, Path]) -> None:
    rows = [
        {
            "id": e.id,
            "body": e.body,
            "sender": e.sender,
            "receiver": e.receiver,
            "date": e.date,
            "subject": e.subject,
            "urls": json.dumps(e.urls, ensure_ascii=False),
            "label": e.label,
        }
        for e in emails
    ]
    pd.DataFrame(rows, columns=COLUMNS).to_csv(path, index=False, encoding="utf-8")


def to_preprocessed(email: DatasetEmail) -> PreprocessedEmail:
    """Gives a dataset tuple the same shape parse_eml produces."""
    body, found = preprocess_body(email.body)
    headers = {}
    for name, value in (("From", email.sender), ("To", email.receiver), ("Date", email.date)):
        if value:
            headers[name] = value
    urls = [u for u in email.urls if is_url(u)] if email.urls else found
    return PreprocessedEmail(
        headers=headers,
        subject=email.subject.strip() or NO_SUBJECT,
        body=body,
        urls=urls,
    )
