"""Per-article event extraction and the constraint-adherence check.

One article goes in; at most one dated, one-sentence event summary comes
out. The model may answer with a null marker (nothing in the article fits
the constraint), a well-formed "YYYY-MM-DD: summary" line, or garbage —
parsing is total, so every possible response maps to exactly one of
{summary, null, rejection}, and rejections are logged rather than raised:
one bad generation must not kill a long stream.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from datetime import date
from pathlib import Path
from typing import IO

from .corpus import Article, TopicQuery
from .gateway import LLMGateway
from .temporal import resolve_time_refs


@dataclass(frozen=True)
class EventSummary:
    """A dated one-sentence event description extracted from one article."""

    event_date: date
    description: str
    source_article_id: str
    topic: str
    constraint: str
    arrival_index: int

    def stamped(self) -> str:
        """Canonical "YYYY-MM-DD: description" form used in prompts/output."""
        return f"{self.event_date.isoformat()}: {self.description}"


_NULL_MARKER = re.compile(r"^(?:null|none)\.?$", re.IGNORECASE)
_DATE_LINE = re.compile(r"^\s*(\d{4})-(\d{2})-(\d{2})\s*:\s*(.*\S)\s*$")


class ExtractionLog:
    """Append-only JSONL audit log of per-article extraction decisions."""

    def __init__(self, stream: IO[str] | None = None, path: str | Path | None = None):
        if stream is not None and path is not None:
            raise ValueError("pass either a stream or a path, not both")
        self._own = path is not None
        self._stream = open(path, "w", encoding="utf-8") if path is not None else stream

    def write(self, article_id: str, decision: str, **extra: object) -> None:
        if self._stream is None:
            return
        record = {"article_id": article_id, "decision": decision, **extra}
        self._stream.write(json.dumps(record, ensure_ascii=False) + "\n")
        self._stream.flush()

    def close(self) -> None:
        if self._own and self._stream is not None:
            self._stream.close()
            self._stream = None

    def __enter__(self) -> "ExtractionLog":
        return self

    def __exit__(self, *exc: object) -> None:
        self.close()


def render_article(article: Article) -> str:
    """Article as shown to the model: publication stamp, title, then the
    body with day-resolvable sentences date-prefixed."""
    body = resolve_time_refs(article.text, article.publication_date)
    return f"Published: {article.publication_date.isoformat()}\n{article.title}\n\n{body}"


def parse_summary_response(text: str) -> tuple[str, tuple[date, str] | None, dict]:
    """Classify a model response.

    Returns (kind, payload, detail) where kind is one of "event", "null",
    "rejected"; payload is (event_date, description) for "event" and None
    otherwise; detail carries diagnostics for the audit log.
    """
    stripped = text.strip()
    if not stripped:
        return "rejected", None, {"reason": "empty response"}
    lines = [ln for ln in stripped.splitlines() if ln.strip()]
    if _NULL_MARKER.match(lines[0].strip()):
        return "null", None, {}
    date_lines = [m for ln in lines if (m := _DATE_LINE.match(ln))]
    if not date_lines:
        return "rejected", None, {"reason": "no date line", "head": stripped[:120]}
    first = date_lines[0]
    try:
        event_date = date(int(first.group(1)), int(first.group(2)), int(first.group(3)))
    except ValueError:
        return "rejected", None, {
            "reason": "impossible calendar date",
            "head": first.group(0)[:120],
        }
    detail = {}
    if len(date_lines) > 1:
        detail["extra_date_lines"] = len(date_lines) - 1
    return "event", (event_date, first.group(4)), detail


def constrained_topic_sum(
    gateway: LLMGateway,
    article: Article,
    query: TopicQuery,
    arrival_index: int,
    log: ExtractionLog | None = None,
) -> EventSummary | None:
    """Ask the model for one constraint-adhering event from one article.

    Returns None both for an explicit null answer and for unparseable
    output; the two cases are distinguished only in the audit log.
    """
    response = gateway.chat(
        "summary",
        keyword=query.keyword,
        constraint=query.constraint,
        content=render_article(article),
    )
    kind, payload, detail = parse_summary_response(response)
    if kind == "event":
        # The accepted/rejected_reflection decision is logged by the caller
        # once the constraint check has run, so each article gets exactly
        # one decision line. Dropped surplus date lines are still recorded
        # here as a supplementary warning.
        if detail and log:
            log.write(article.id, "parse_warning", **detail)
        event_date, description = payload
        return EventSummary(
            event_date=event_date,
            description=description,
            source_article_id=article.id,
            topic=query.keyword,
            constraint=query.constraint,
            arrival_index=arrival_index,
        )
    if log:
        log.write(article.id, "null" if kind == "null" else "rejected_parse", **detail)
    return None


def adhere_to_constraint(
    gateway: LLMGateway, summary: EventSummary, query: TopicQuery
) -> bool:
    """True iff the model affirms the summary satisfies the constraint.

    Anything that does not start with "yes" (case-insensitive) counts as a
    rejection: this check exists to raise precision, so ambiguity is
    resolved against keeping the summary.
    """
    answer = gateway.chat(
        "self_reflect",
        keyword=query.keyword,
        event=summary.stamped(),
        constraint=query.constraint,
    )
    return answer.strip().lower().startswith("yes")
