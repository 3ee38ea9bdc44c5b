"""Rule-based resolution of time references, anchored on an article's
publication date.

Sentences that contain at least one day-resolvable reference get a
"(YYYY-MM-DD) " prefix; the sentence text itself is never touched, so
stripping every prefix reproduces the input byte-for-byte.

The rule inventory is deliberately small and day-granular (see RULES.md):
explicit dates, today/tonight/yesterday/tomorrow, last/this/next + weekday,
and "N days ago". Coarser expressions (last week, in June, 2019) are
recognized but resolve to nothing, because a wrong day guess is worse than
no guess for date-based evaluation.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from datetime import date, timedelta

MONTHS = {
    "january": 1, "february": 2, "march": 3, "april": 4, "may": 5, "june": 6,
    "july": 7, "august": 8, "september": 9, "october": 10, "november": 11,
    "december": 12,
}
# Common three/four letter abbreviations map onto the same numbers.
MONTH_ABBREV = {name[:3]: num for name, num in MONTHS.items()}
MONTH_ABBREV["sept"] = 9

WEEKDAYS = {
    "monday": 0, "tuesday": 1, "wednesday": 2, "thursday": 3,
    "friday": 4, "saturday": 5, "sunday": 6,
}

NUMBER_WORDS = {
    "one": 1, "two": 2, "three": 3, "four": 4, "five": 5, "six": 6,
    "seven": 7, "eight": 8, "nine": 9, "ten": 10, "eleven": 11, "twelve": 12,
}

_MONTH_RE = "|".join(list(MONTHS) + list(MONTH_ABBREV))
_WEEKDAY_RE = "|".join(WEEKDAYS)
_NUMWORD_RE = "|".join(NUMBER_WORDS)

# Each pattern tags its match with a rule name; resolution happens per rule.
_PATTERNS: list[tuple[str, re.Pattern[str]]] = [
    ("iso", re.compile(r"\b(\d{4})-(\d{2})-(\d{2})\b")),
    (
        "month_day_year",
        re.compile(
            rf"\b({_MONTH_RE})\.?\s+(\d{{1,2}})(?:st|nd|rd|th)?,?\s+(\d{{4}})\b",
            re.IGNORECASE,
        ),
    ),
    (
        "day_month_year",
        re.compile(
            rf"\b(\d{{1,2}})(?:st|nd|rd|th)?\s+({_MONTH_RE})\.?,?\s+(\d{{4}})\b",
            re.IGNORECASE,
        ),
    ),
    ("deictic_day", re.compile(r"\b(today|tonight|yesterday|tomorrow)\b", re.IGNORECASE)),
    (
        "rel_weekday",
        re.compile(rf"\b(last|this|next)\s+({_WEEKDAY_RE})\b", re.IGNORECASE),
    ),
    (
        "days_ago",
        re.compile(rf"\b(\d+|{_NUMWORD_RE})\s+days?\s+ago\b", re.IGNORECASE),
    ),
    # Recognized but not day-resolvable: matched so they can shadow nothing
    # and show up in diagnostics, resolved to None.
    (
        "coarse",
        re.compile(
            rf"\b(?:last|this|next)\s+(?:week|month|year)\b"
            rf"|\b(?:in\s+)(?:{_MONTH_RE})\b"
            rf"|\blast\s+night\b",
            re.IGNORECASE,
        ),
    ),
]


@dataclass(frozen=True)
class TimeExpressionMatch:
    """One recognized time expression inside a sentence."""

    sentence_index: int
    span: tuple[int, int]
    surface: str
    resolved: date | None


def resolve_weekday(reference: date, weekday: int, direction: str) -> date:
    """Resolve last/next/this + weekday relative to a reference date.

    last: greatest date strictly before the reference with that weekday.
    next: least date strictly after.
    this: the matching day of the reference's Monday-start week.
    """
    if not 0 <= weekday <= 6:
        raise ValueError(f"weekday out of range: {weekday}")
    if direction == "last":
        delta = (reference.weekday() - weekday) % 7
        return reference - timedelta(days=delta or 7)
    if direction == "next":
        delta = (weekday - reference.weekday()) % 7
        return reference + timedelta(days=delta or 7)
    if direction == "this":
        monday = reference - timedelta(days=reference.weekday())
        return monday + timedelta(days=weekday)
    raise ValueError(f"unknown direction: {direction!r}")


def _month_number(name: str) -> int:
    key = name.lower().rstrip(".")
    return MONTHS.get(key) or MONTH_ABBREV[key]


def _resolve_match(rule: str, m: re.Match[str], pub: date) -> date | None:
    try:
        if rule == "iso":
            return date(int(m.group(1)), int(m.group(2)), int(m.group(3)))
        if rule == "month_day_year":
            return date(int(m.group(3)), _month_number(m.group(1)), int(m.group(2)))
        if rule == "day_month_year":
            return date(int(m.group(3)), _month_number(m.group(2)), int(m.group(1)))
        if rule == "deictic_day":
            word = m.group(1).lower()
            if word in ("today", "tonight"):
                return pub
            return pub - timedelta(days=1) if word == "yesterday" else pub + timedelta(days=1)
        if rule == "rel_weekday":
            direction = m.group(1).lower()
            return resolve_weekday(pub, WEEKDAYS[m.group(2).lower()], direction)
        if rule == "days_ago":
            raw = m.group(1).lower()
            n = int(raw) if raw.isdigit() else NUMBER_WORDS[raw]
            return pub - timedelta(days=n)
    except (ValueError, OverflowError):
        return None  # impossible calendar dates (2021-02-30) resolve to nothing
    return None


def find_time_expressions(
    sentence: str, publication_date: date, sentence_index: int = 0
) -> list[TimeExpressionMatch]:
    """All recognized time expressions in one sentence, by position.

    Overlapping matches keep the earliest-starting (longest on ties).
    """
    found: list[tuple[int, int, str, date | None]] = []
    for rule, pattern in _PATTERNS:
        for m in pattern.finditer(sentence):
            resolved = None if rule == "coarse" else _resolve_match(rule, m, publication_date)
            found.append((m.start(), m.end(), m.group(0), resolved))
    # Day-resolvable matches claim their spans first so a vague phrase can
    # never shadow an explicit date it overlaps; earlier/longer wins ties.
    found.sort(key=lambda t: (t[3] is None, t[0], -t[1]))
    picked: list[tuple[int, int, str, date | None]] = []
    for start, end, surface, resolved in found:
        if any(start < pe and ps < end for ps, pe, _, _ in picked):
            continue
        picked.append((start, end, surface, resolved))
    picked.sort(key=lambda t: t[0])
    return [
        TimeExpressionMatch(sentence_index=sentence_index, span=(s, e), surface=surf, resolved=r)
        for s, e, surf, r in picked
    ]


_SENTENCE_BOUNDARY = re.compile(r"[.!?][\"'”’)\]]*\s+|\n+")
_WORD_BEFORE = re.compile(r"[A-Za-z]+$")


def _is_abbreviation_dot(text: str, dot_index: int) -> bool:
    """True when the period at dot_index ends a month abbreviation
    ("Sept. 9, 1988") rather than a sentence."""
    if text[dot_index] != ".":
        return False
    word = _WORD_BEFORE.search(text, 0, dot_index)
    return bool(word) and word.group(0).lower() in MONTH_ABBREV


def sentence_spans(text: str) -> list[tuple[int, int]]:
    """Split text into contiguous sentence spans covering every byte.

    Trailing punctuation and whitespace belong to the preceding span, so
    joining the spans reproduces the input exactly. The splitter is naive
    about most abbreviations — harmless, since an extra boundary only means
    an extra prefix opportunity — but a period ending a month abbreviation
    is never a boundary, or "Sept. 9, 1988" would be torn apart and lost.
    """
    spans: list[tuple[int, int]] = []
    start = 0
    for m in _SENTENCE_BOUNDARY.finditer(text):
        if _is_abbreviation_dot(text, m.start()):
            continue
        spans.append((start, m.end()))
        start = m.end()
    if start < len(text):
        spans.append((start, len(text)))
    return spans


def resolve_time_refs(body: str, publication_date: date) -> str:
    """Prefix day-resolvable sentences with "(YYYY-MM-DD) ".

    The earliest-positioned day-resolvable expression in a sentence decides
    the prefix; one prefix per sentence; unresolvable sentences pass through.
    """
    out: list[str] = []
    for idx, (start, end) in enumerate(sentence_spans(body)):
        sentence = body[start:end]
        resolved = next(
            (
                m.resolved
                for m in find_time_expressions(sentence, publication_date, idx)
                if m.resolved is not None
            ),
            None,
        )
        if resolved is not None:
            out.append(f"({resolved.isoformat()}) ")
        out.append(sentence)
    return "".join(out)


_PREFIX = re.compile(r"\(\d{4}-\d{2}-\d{2}\) ")


def strip_date_prefixes(text: str) -> str:
    """Inverse of resolve_time_refs for texts free of literal prefixes."""
    return _PREFIX.sub("", text)
