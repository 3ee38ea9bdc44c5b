"""Time-expression resolution: golden vectors, the splitting contract,
and round-trip behavior on synthetic documents."""

import json
import random
from datetime import date, timedelta
from pathlib import Path

import pytest

from reacts.temporal import (
    find_time_expressions,
    resolve_time_refs,
    resolve_weekday,
    sentence_spans,
    strip_date_prefixes,
)

GOLDEN = json.loads(
    (Path(__file__).parent / "data" / "temporal_golden.json").read_text(encoding="utf-8")
)


@pytest.mark.parametrize(
    "pub, text, expected",
    [(v["pub"], v["text"], v["date"]) for v in GOLDEN],
    ids=[v["text"][:40] for v in GOLDEN],
)
def test_golden_vectors(pub, text, expected):
    out = resolve_time_refs(text, date.fromisoformat(pub))
    if expected is None:
        assert out == text
    else:
        assert out.startswith(f"({expected}) ")
        assert out == f"({expected}) {text}"


def test_yesterday_relative_to_publication():
    out = resolve_time_refs("Shares plunged yesterday.", date(2024, 8, 14))
    assert out == "(2024-08-13) Shares plunged yesterday."


def test_last_friday_relative_to_wednesday():
    # 2024-08-14 is a Wednesday; the previous Friday is the 9th.
    out = resolve_time_refs("Protests erupted last Friday.", date(2024, 8, 14))
    assert out == "(2024-08-09) Protests erupted last Friday."


def test_resolve_weekday_last_is_strictly_before():
    wed = date(2024, 8, 14)
    assert resolve_weekday(wed, 4, "last") == date(2024, 8, 9)   # Friday
    assert resolve_weekday(wed, 2, "last") == date(2024, 8, 7)   # same weekday -> a week back
    assert resolve_weekday(wed, 1, "last") == date(2024, 8, 13)  # Tuesday


def test_resolve_weekday_next_is_strictly_after():
    wed = date(2024, 8, 14)
    assert resolve_weekday(wed, 0, "next") == date(2024, 8, 19)
    assert resolve_weekday(wed, 2, "next") == date(2024, 8, 21)  # same weekday -> a week on


def test_resolve_weekday_this_uses_monday_start_week():
    wed = date(2024, 8, 14)
    assert resolve_weekday(wed, 0, "this") == date(2024, 8, 12)
    assert resolve_weekday(wed, 3, "this") == date(2024, 8, 15)
    assert resolve_weekday(wed, 6, "this") == date(2024, 8, 18)


def test_resolve_weekday_rejects_bad_arguments():
    with pytest.raises(ValueError, match="weekday out of range"):
        resolve_weekday(date(2024, 8, 14), 7, "last")
    with pytest.raises(ValueError, match="unknown direction"):
        resolve_weekday(date(2024, 8, 14), 0, "previous")


def test_explicit_date_beats_overlapping_coarse_phrase():
    """'in June 14, 2020' contains the vague 'in June'; the day-resolvable
    expression must win the overlap."""
    matches = find_time_expressions("The fair opens in June 14, 2020 downtown.", date(2024, 8, 14))
    resolved = [m for m in matches if m.resolved is not None]
    assert len(resolved) == 1
    assert resolved[0].surface == "June 14, 2020"
    assert resolved[0].resolved == date(2020, 6, 14)


def test_one_prefix_per_sentence_even_with_two_expressions():
    text = "The deal signed 2020-03-02 closed yesterday."
    out = resolve_time_refs(text, date(2020, 3, 10))
    # earliest-positioned expression decides
    assert out == f"(2020-03-02) {text}"
    assert out.count("(") == 1


def test_multiple_sentences_each_get_own_prefix():
    text = "It launched yesterday. Reviews arrive tomorrow."
    out = resolve_time_refs(text, date(2020, 3, 10))
    assert out == "(2020-03-09) It launched yesterday. (2020-03-11) Reviews arrive tomorrow."


def test_sentence_spans_cover_every_byte():
    text = 'He said "Stop!" Then he left.\nNew paragraph here. And more?  Yes.'
    spans = sentence_spans(text)
    assert "".join(text[s:e] for s, e in spans) == text
    assert spans[0] == (0, spans[1][0])


def test_sentence_spans_keep_month_abbreviation_intact():
    text = "Born Sept. 9, 1988. He grew up abroad."
    spans = sentence_spans(text)
    sentences = [text[s:e] for s, e in spans]
    assert sentences == ["Born Sept. 9, 1988. ", "He grew up abroad."]


def test_abbreviation_period_then_real_boundary():
    text = "He spoke on Oct. 3, 2019. The crowd cheered loudly."
    out = resolve_time_refs(text, date(2024, 8, 14))
    assert out == "(2019-10-03) He spoke on Oct. 3, 2019. The crowd cheered loudly."


def test_strip_date_prefixes_inverts_resolution():
    text = "It launched yesterday. Reviews arrive tomorrow. Nothing else happened."
    resolved = resolve_time_refs(text, date(2020, 3, 10))
    assert strip_date_prefixes(resolved) == text
    # stripping is idempotent
    assert strip_date_prefixes(strip_date_prefixes(resolved)) == text


def _random_sentence(rng: random.Random, pub: date) -> str:
    filler = rng.choice(["The board met", "Crews assembled", "Numbers improved",
                         "The show opened", "Rates held steady"])
    kind = rng.randrange(5)
    if kind == 0:
        when = pub - timedelta(days=rng.randrange(0, 4000))
        return f"{filler} on {when.isoformat()}."
    if kind == 1:
        return f"{filler} {rng.choice(['yesterday', 'today', 'tomorrow'])}."
    if kind == 2:
        day = rng.choice(["Monday", "Tuesday", "Wednesday", "Thursday",
                          "Friday", "Saturday", "Sunday"])
        return f"{filler} {rng.choice(['last', 'next', 'this'])} {day}."
    if kind == 3:
        return f"{filler} {rng.randrange(1, 30)} days ago."
    return f"{filler} without any stated time."


def test_thousand_sentence_round_trip():
    """resolve then strip is the identity on a large synthetic document."""
    rng = random.Random(20240814)
    pub = date(2024, 8, 14)
    text = " ".join(_random_sentence(rng, pub) for _ in range(1000))
    resolved = resolve_time_refs(text, pub)
    assert strip_date_prefixes(resolved) == text
    spans = sentence_spans(text)
    assert "".join(text[s:e] for s, e in spans) == text
    assert len(spans) == 1000
