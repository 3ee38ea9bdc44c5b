"""Single-article extraction: response parsing is total, the constraint
check is yes-prefixed, and decisions are audit-logged."""

import io
import json
from datetime import date

import pytest

from reacts.extractor import (
    EventSummary,
    ExtractionLog,
    adhere_to_constraint,
    constrained_topic_sum,
    parse_summary_response,
    render_article,
)

import _helpers


def test_render_article_layout():
    art = _helpers.SMALL_POOL[0]
    rendered = render_article(art)
    header, _, body = rendered.partition("\n\n")
    assert header == "Published: 2020-01-06\nFalcon probe lifts off"
    # "yesterday" resolves against the publication date
    assert body.startswith("(2020-01-05) Spark launched the falcon probe yesterday.")


def test_render_article_without_time_expressions():
    art = _helpers.make_article("x", "2020-04-02", "Title", "Nothing dated here.")
    assert render_article(art) == "Published: 2020-04-02\nTitle\n\nNothing dated here."


# --- parse_summary_response: every response maps to exactly one outcome ---

def test_parse_well_formed_event():
    kind, payload, detail = parse_summary_response("2020-01-05: Spark launches the probe.")
    assert kind == "event"
    assert payload == (date(2020, 1, 5), "Spark launches the probe.")
    assert detail == {}


def test_parse_event_with_surrounding_noise():
    kind, payload, _ = parse_summary_response(
        "Sure, here is the summary:\n  2020-01-05:   Spark launches the probe.  \n")
    assert kind == "event"
    assert payload == (date(2020, 1, 5), "Spark launches the probe.")


@pytest.mark.parametrize("text", ["None.", "None", "none", "null", "NULL.", "  None.  "])
def test_parse_null_markers(text):
    assert parse_summary_response(text) == ("null", None, {})


def test_parse_null_only_counts_on_first_line():
    kind, payload, _ = parse_summary_response("Answer:\nNone.")
    # "None." not on the first non-blank line is not a null marker
    assert kind == "rejected"


def test_parse_garbage_reports_head():
    kind, payload, detail = parse_summary_response("banana")
    assert kind == "rejected"
    assert payload is None
    assert detail == {"reason": "no date line", "head": "banana"}


def test_parse_empty_response():
    assert parse_summary_response("   \n ") == ("rejected", None, {"reason": "empty response"})


def test_parse_impossible_calendar_date():
    kind, _, detail = parse_summary_response("2021-02-30: Ghost event.")
    assert kind == "rejected"
    assert detail["reason"] == "impossible calendar date"


def test_parse_multiple_date_lines_keeps_first():
    response = ("2020-01-05: First event.\n"
                "2020-02-10: Second event.\n"
                "2020-03-15: Third event.")
    kind, payload, detail = parse_summary_response(response)
    assert kind == "event"
    assert payload == (date(2020, 1, 5), "First event.")
    assert detail == {"extra_date_lines": 2}


def test_parse_skips_non_date_preamble_lines():
    kind, payload, _ = parse_summary_response("Timeline entry follows\n2020-06-01: It happened.")
    assert kind == "event"
    assert payload[0] == date(2020, 6, 1)


# --- constrained_topic_sum / adhere_to_constraint over the scripted mock ---

def _extract(article, backend=None, log=None, arrival_index=0):
    gw = _helpers.gateway(backend)
    return constrained_topic_sum(gw, article, _helpers.query(), arrival_index, log=log)


def test_extract_returns_event_summary():
    summary = _extract(_helpers.SMALL_POOL[0], arrival_index=3)
    assert isinstance(summary, EventSummary)
    assert summary.event_date == date(2020, 1, 5)
    assert summary.description == "Spark launches the falcon probe."
    assert summary.source_article_id == "a1"
    assert summary.arrival_index == 3
    assert summary.stamped() == _helpers.E_FALCON


def test_extract_null_logs_and_returns_none():
    buf = io.StringIO()
    with ExtractionLog(stream=buf) as log:
        assert _extract(_helpers.SMALL_POOL[1], log=log) is None
    record = json.loads(buf.getvalue())
    assert record == {"article_id": "a2", "decision": "null"}


def test_extract_garbage_logs_rejection():
    buf = io.StringIO()
    with ExtractionLog(stream=buf) as log:
        assert _extract(_helpers.SMALL_POOL[5], log=log) is None
    record = json.loads(buf.getvalue())
    assert record["decision"] == "rejected_parse"
    assert record["reason"] == "no date line"
    assert record["head"] == "banana"


def test_adhere_to_constraint_yes_variants():
    gw = _helpers.gateway()
    summary = constrained_topic_sum(gw, _helpers.SMALL_POOL[0], _helpers.query(), 0)
    assert adhere_to_constraint(gw, summary, _helpers.query()) is True


def test_adhere_to_constraint_rejects_non_yes_prefix():
    gw = _helpers.gateway()
    summary = constrained_topic_sum(gw, _helpers.SMALL_POOL[4], _helpers.query(), 0)
    assert adhere_to_constraint(gw, summary, _helpers.query()) is False


@pytest.mark.parametrize("answer, expected", [
    ("Yes", True),
    ("yes. Definitely the same.", True),
    ("YES — aligned.", True),
    ("No", False),
    ("Possibly, but the dates differ.", False),  # ambiguity counts as no
    ("The answer is yes", False),                # must be a prefix
    ("", False),
])
def test_adhere_to_constraint_prefix_policy(answer, expected):
    backend = _helpers.spark_backend()
    summary = constrained_topic_sum(
        _helpers.gateway(backend), _helpers.SMALL_POOL[0], _helpers.query(), 0)
    _helpers.script_reflect(backend, summary.stamped(), answer)
    got = adhere_to_constraint(_helpers.gateway(backend), summary, _helpers.query())
    assert got is expected


# --- ExtractionLog ---

def test_extraction_log_truncates_existing_file(tmp_path):
    path = tmp_path / "log.jsonl"
    path.write_text("stale line\n")
    with ExtractionLog(path=path) as log:
        log.write("a1", "null")
    lines = path.read_text().splitlines()
    assert len(lines) == 1
    assert json.loads(lines[0])["article_id"] == "a1"


def test_extraction_log_rejects_stream_and_path(tmp_path):
    with pytest.raises(ValueError, match="not both"):
        ExtractionLog(stream=io.StringIO(), path=tmp_path / "x.jsonl")


def test_extraction_log_none_is_silent():
    log = ExtractionLog()
    log.write("a1", "null")  # no stream: a no-op, not an error
    log.close()


def test_extraction_log_extra_fields_serialized():
    buf = io.StringIO()
    ExtractionLog(stream=buf).write("a9", "rejected_parse", reason="no date line", head="x")
    assert json.loads(buf.getvalue()) == {
        "article_id": "a9", "decision": "rejected_parse",
        "reason": "no date line", "head": "x",
    }
