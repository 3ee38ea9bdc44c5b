import json
import random
from datetime import date

import pytest

from reacts.corpus import (
    Article,
    CorpusError,
    TopicQuery,
    dataset_stats,
    dump_article_pool,
    load_article_pool,
    load_ground_truth,
    parse_iso_date,
)

import _helpers


def test_parse_iso_date_accepts_strict_form():
    assert parse_iso_date("2020-02-29") == date(2020, 2, 29)


@pytest.mark.parametrize("bad", [
    "2020-2-9",        # not zero-padded
    "2020/02/09",
    "20200209",
    "2021-02-30",      # impossible day
    "2020-13-01",
    "yesterday",
    "2020-02-09T00:00",
])
def test_parse_iso_date_rejects_loose_forms(bad):
    with pytest.raises(ValueError):
        parse_iso_date(bad)


def test_parse_iso_date_rejects_non_strings():
    with pytest.raises(ValueError):
        parse_iso_date(20200209)


def test_topic_query_validation():
    q = TopicQuery(keyword="Spark", constraint="anything", l=3, k=2)
    assert (q.l, q.k) == (3, 2)
    with pytest.raises(ValueError):
        TopicQuery(keyword="", constraint="c", l=1, k=1)
    with pytest.raises(ValueError):
        TopicQuery(keyword="k", constraint="", l=1, k=1)
    with pytest.raises(ValueError):
        TopicQuery(keyword="k", constraint="c", l=0, k=1)
    with pytest.raises(ValueError):
        TopicQuery(keyword="k", constraint="c", l=1, k=0)


def test_load_article_pool_sorts_by_date_then_id(tmp_path):
    """Pools come back ordered by (publication_date, id) regardless of
    the order the lines were written in."""
    pool = tmp_path / "pool.jsonl"
    records = [
        {"id": "z", "date": "2020-01-02", "title": "t", "text": "x"},
        {"id": "a", "date": "2020-01-02", "title": "t", "text": "x"},
        {"id": "m", "date": "2019-12-31", "title": "t", "text": "x"},
    ]
    pool.write_text("\n".join(json.dumps(r) for r in records) + "\n")
    loaded = load_article_pool(pool)
    assert [a.id for a in loaded] == ["m", "a", "z"]


def test_load_article_pool_skips_blank_lines(tmp_path):
    pool = tmp_path / "pool.jsonl"
    pool.write_text(
        '{"id": "a", "date": "2020-01-01", "text": "x"}\n'
        "\n"
        '   \n'
        '{"id": "b", "date": "2020-01-02", "text": "y"}\n'
    )
    loaded = load_article_pool(pool)
    assert [a.id for a in loaded] == ["a", "b"]
    assert loaded[0].title == ""  # title is optional


def test_load_article_pool_duplicate_id(tmp_path):
    pool = tmp_path / "pool.jsonl"
    pool.write_text(
        '{"id": "a", "date": "2020-01-01", "text": "x"}\n'
        '{"id": "a", "date": "2020-01-02", "text": "y"}\n'
    )
    with pytest.raises(CorpusError, match="duplicate article id"):
        load_article_pool(pool)


def test_load_article_pool_reports_line_number(tmp_path):
    pool = tmp_path / "pool.jsonl"
    pool.write_text(
        '{"id": "a", "date": "2020-01-01", "text": "x"}\n'
        "{not json}\n"
    )
    with pytest.raises(CorpusError, match=r":2: malformed JSON"):
        load_article_pool(pool)


def test_load_article_pool_missing_field(tmp_path):
    pool = tmp_path / "pool.jsonl"
    pool.write_text('{"id": "a", "date": "2020-01-01"}\n')
    with pytest.raises(CorpusError, match="missing field"):
        load_article_pool(pool)


def test_load_article_pool_bad_date_names_article(tmp_path):
    pool = tmp_path / "pool.jsonl"
    pool.write_text('{"id": "a", "date": "2020-1-1", "text": "x"}\n')
    with pytest.raises(CorpusError, match="'a'"):
        load_article_pool(pool)


def test_load_article_pool_empty_id(tmp_path):
    pool = tmp_path / "pool.jsonl"
    pool.write_text('{"id": "", "date": "2020-01-01", "text": "x"}\n')
    with pytest.raises(CorpusError, match="empty article id"):
        load_article_pool(pool)


def test_load_article_pool_missing_file(tmp_path):
    with pytest.raises(CorpusError, match="not found"):
        load_article_pool(tmp_path / "nope.jsonl")


def test_pool_round_trip(tmp_path):
    rng = random.Random(7)
    articles = [
        Article(
            id=f"art-{i}",
            publication_date=date(2020, rng.randint(1, 12), rng.randint(1, 28)),
            title=f"title {i}",
            text=f"body {i} with ünïcode",
        )
        for i in range(25)
    ]
    articles.sort(key=lambda a: (a.publication_date, a.id))
    path = tmp_path / "pool.jsonl"
    dump_article_pool(articles, path)
    assert load_article_pool(path) == articles


def test_load_ground_truth_single_file(tmp_path):
    gold = _helpers.write_gold(tmp_path / "gold.json")
    timelines = load_ground_truth(gold)
    assert len(timelines) == 1
    tl = timelines[0]
    assert tl.topic == _helpers.TOPIC
    assert tl.constraint == _helpers.CONSTRAINT
    assert tl.events == (
        (date(2020, 1, 5), "Spark launches the falcon probe."),
        (date(2020, 2, 10), "Spark launches the nova engine."),
    )
    assert tl.dates() == {date(2020, 1, 5), date(2020, 2, 10)}


def test_load_ground_truth_sorts_events_by_date(tmp_path):
    obj = {
        "topic": "T",
        "timelines": [{
            "constraint": "c",
            "events": [
                {"date": "2021-05-01", "text": "later"},
                {"date": "2020-05-01", "text": "earlier"},
            ],
        }],
    }
    timelines = load_ground_truth(_helpers.write_gold(tmp_path / "g.json", obj))
    assert [t for _, t in timelines[0].events] == ["earlier", "later"]


def test_load_ground_truth_list_form(tmp_path):
    objs = [
        {"topic": "A", "timelines": [{"constraint": "c1", "events": []}]},
        {"topic": "B", "timelines": [
            {"constraint": "c2", "events": []},
            {"constraint": "c3", "events": []},
        ]},
    ]
    timelines = load_ground_truth(_helpers.write_gold(tmp_path / "g.json", objs))
    assert [(t.topic, t.constraint) for t in timelines] == [
        ("A", "c1"), ("B", "c2"), ("B", "c3"),
    ]


def test_load_ground_truth_directory(tmp_path):
    d = tmp_path / "gold"
    d.mkdir()
    _helpers.write_gold(d / "b.json", {"topic": "B", "timelines": [{"constraint": "x"}]})
    _helpers.write_gold(d / "a.json", {"topic": "A", "timelines": [{"constraint": "y"}]})
    # files are visited in sorted order
    timelines = load_ground_truth(d)
    assert [t.topic for t in timelines] == ["A", "B"]


def test_load_ground_truth_empty_directory(tmp_path):
    d = tmp_path / "gold"
    d.mkdir()
    with pytest.raises(CorpusError, match="no .json files"):
        load_ground_truth(d)


def test_load_ground_truth_missing_constraint(tmp_path):
    obj = {"topic": "T", "timelines": [{"events": []}]}
    with pytest.raises(CorpusError, match="without constraint"):
        load_ground_truth(_helpers.write_gold(tmp_path / "g.json", obj))


def test_load_ground_truth_bad_event_date(tmp_path):
    obj = {
        "topic": "T",
        "timelines": [{"constraint": "c", "events": [{"date": "2021-02-30", "text": "x"}]}],
    }
    with pytest.raises(CorpusError, match="bad event date"):
        load_ground_truth(_helpers.write_gold(tmp_path / "g.json", obj))


def test_load_ground_truth_malformed_json(tmp_path):
    path = tmp_path / "g.json"
    path.write_text("{nope")
    with pytest.raises(CorpusError, match="malformed JSON"):
        load_ground_truth(path)


def test_dataset_stats_counts_distinct_topics():
    timelines = load_ground_truth_fixture()
    stats = dataset_stats(timelines)
    assert stats == {"topics": 2, "timelines": 3, "events": 4}


def load_ground_truth_fixture():
    from reacts.corpus import GroundTruthTimeline
    mk = lambda topic, constraint, n: GroundTruthTimeline(
        topic=topic,
        constraint=constraint,
        events=tuple((date(2020, 1, i + 1), f"e{i}") for i in range(n)),
    )
    return [mk("A", "c1", 1), mk("A", "c2", 2), mk("B", "c1", 1)]
