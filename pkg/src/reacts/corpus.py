"""Article pools, topic queries, and ground-truth timelines.

File formats:
  * Article pool: JSONL, one object per line:
        {"id": str, "date": "YYYY-MM-DD", "title": str, "text": str}
  * Ground truth: JSON, one topic object or a list of them:
        {"topic": str, "timelines": [{"constraint": str,
                                      "events": [{"date": ..., "text": ...}]}]}
    A directory of such files is also accepted (read in filename order).

Everything is read-only after load and safe to share across threads.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path


class CorpusError(Exception):
    """Raised for malformed pool or ground-truth files."""


def parse_iso_date(value: str) -> date:
    """Parse a day-granular YYYY-MM-DD string; reject anything looser."""
    if not isinstance(value, str) or len(value) != 10:
        raise ValueError(f"not a YYYY-MM-DD date: {value!r}")
    return date.fromisoformat(value)


@dataclass(frozen=True)
class Article:
    """One dated news document from a topic's pool."""

    id: str
    publication_date: date
    title: str
    text: str


@dataclass(frozen=True)
class TopicQuery:
    """What to summarize: entity keyword, constraint sentence, and the
    requested timeline shape (l dates, k sentences per date)."""

    keyword: str
    constraint: str
    l: int
    k: int

    def __post_init__(self) -> None:
        if not self.keyword:
            raise ValueError("keyword must be non-empty")
        if not self.constraint:
            raise ValueError("constraint must be non-empty")
        if self.l < 1 or self.k < 1:
            raise ValueError("l and k must be >= 1")


@dataclass(frozen=True)
class GroundTruthTimeline:
    """A reference timeline for one (topic, constraint) pair."""

    topic: str
    constraint: str
    events: tuple[tuple[date, str], ...] = field(default_factory=tuple)

    def dates(self) -> set[date]:
        return {d for d, _ in self.events}


def load_article_pool(path: str | Path) -> list[Article]:
    """Load a JSONL article pool, sorted by (publication_date, id).

    Duplicate ids, malformed lines, and invalid dates are errors; the sort
    makes the chronological queue reproducible even when the true within-day
    publication order is unknown.
    """
    path = Path(path)
    if not path.exists():
        raise CorpusError(f"article pool not found: {path}")
    articles: list[Article] = []
    seen: set[str] = set()
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"{path}:{lineno}: malformed JSON: {exc}") from exc
            try:
                art_id = record["id"]
                raw_date = record["date"]
                title = record.get("title", "")
                text = record["text"]
            except (KeyError, TypeError) as exc:
                raise CorpusError(f"{path}:{lineno}: missing field {exc}") from exc
            if not art_id:
                raise CorpusError(f"{path}:{lineno}: empty article id")
            try:
                pub = parse_iso_date(raw_date)
            except ValueError as exc:
                raise CorpusError(f"invalid date for article {art_id!r}: {exc}") from exc
            if art_id in seen:
                raise CorpusError(f"duplicate article id {art_id!r}")
            seen.add(art_id)
            articles.append(Article(id=art_id, publication_date=pub, title=title, text=text))
    articles.sort(key=lambda a: (a.publication_date, a.id))
    return articles


def dump_article_pool(articles: list[Article], path: str | Path) -> None:
    """Serialize a pool back to JSONL (inverse of load_article_pool)."""
    with Path(path).open("w", encoding="utf-8") as fh:
        for art in articles:
            fh.write(
                json.dumps(
                    {
                        "id": art.id,
                        "date": art.publication_date.isoformat(),
                        "title": art.title,
                        "text": art.text,
                    },
                    ensure_ascii=False,
                )
                + "\n"
            )


def _timelines_from_topic(obj: dict, source: str) -> list[GroundTruthTimeline]:
    try:
        topic = obj["topic"]
        raw_timelines = obj["timelines"]
    except (KeyError, TypeError) as exc:
        raise CorpusError(f"{source}: missing field {exc}") from exc
    out: list[GroundTruthTimeline] = []
    for tl in raw_timelines:
        if "constraint" not in tl:
            raise CorpusError(f"{source}: timeline without constraint (topic {topic!r})")
        events: list[tuple[date, str]] = []
        for ev in tl.get("events", []):
            try:
                when = parse_iso_date(ev["date"])
            except (KeyError, ValueError) as exc:
                raise CorpusError(
                    f"{source}: bad event date in topic {topic!r}: {exc}"
                ) from exc
            events.append((when, ev.get("text", "")))
        events.sort(key=lambda e: e[0])
        out.append(
            GroundTruthTimeline(
                topic=topic, constraint=tl["constraint"], events=tuple(events)
            )
        )
    return out


def load_ground_truth(path: str | Path) -> list[GroundTruthTimeline]:
    """Load ground-truth timelines from a JSON file or a directory of them."""
    path = Path(path)
    if not path.exists():
        raise CorpusError(f"ground truth not found: {path}")
    files = sorted(path.glob("*.json")) if path.is_dir() else [path]
    if not files:
        raise CorpusError(f"no .json files in {path}")
    timelines: list[GroundTruthTimeline] = []
    for file in files:
        with file.open(encoding="utf-8") as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"{file}: malformed JSON: {exc}") from exc
        topics = data if isinstance(data, list) else [data]
        for obj in topics:
            timelines.extend(_timelines_from_topic(obj, str(file)))
    return timelines


def dataset_stats(timelines: list[GroundTruthTimeline]) -> dict[str, int]:
    """Topic/timeline/event counts, e.g. for dataset sanity checks."""
    return {
        "topics": len({tl.topic for tl in timelines}),
        "timelines": len(timelines),
        "events": sum(len(tl.events) for tl in timelines),
    }
